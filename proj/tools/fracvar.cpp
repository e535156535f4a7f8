#include "fracvar/cli.hpp"

int main(int argc, char** argv) { return fracvar::run_cli(argc, argv); }
