#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fracvar/cli.hpp"

using namespace fracvar;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "fracvar");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) v.push_back(l);
  return v;
}

}  // namespace

TEST(Cli, VariationRows) {
  const auto r = run({"variation", "--phi", "tent", "--b", "2", "--alpha", "2^(-1/3)", "--p", "3", "--n", "2:12"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 13u);
  EXPECT_EQ(l[0].rfind("# fracvar", 0), 0u);
  EXPECT_EQ(l[1], "n,p,t,b,alpha,phi,value");
  EXPECT_EQ(l[2].rfind("2,3,1,2,", 0), 0u) << l[2];
}

TEST(Cli, Deterministic) {
  const std::vector<std::string> args{"moments", "--phi", "skewed:l=1", "--b", "3", "--hurst", "0.5",
                                      "--method", "mc", "--k", "3", "--samples", "20000", "--seed", "5"};
  const auto a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  auto threaded = args;
  threaded.insert(threaded.end(), {"--threads", "3"});
  EXPECT_EQ(lines(run(threaded).out).back(), lines(a.out).back());
}

TEST(Cli, ClassifyPlain) {
  const auto crit = run({"classify", "--phi", "tent", "--b", "2", "--alpha", "0.5", "--format", "plain"});
  ASSERT_EQ(crit.code, 0) << crit.err;
  EXPECT_NE(crit.out.find("CriticalVanishing"), std::string::npos);
  const auto rough = run({"classify", "--phi", "tent", "--b", "3", "--alpha", "3^(-1/3)", "--format", "plain"});
  EXPECT_NE(rough.out.find("Rough q=3"), std::string::npos) << rough.out;
}

TEST(Cli, MomentsRecursion) {
  const auto r = run({"moments", "--phi", "skewed:l=1", "--b", "3", "--alpha", "3^(-1/3)", "--k", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 6u);
  const std::string last = l.back();
  ASSERT_EQ(last.rfind("3,", 0), 0u);
  EXPECT_NEAR(std::stod(last.substr(2)), 27.0 / 256.0, 1e-14);
  const auto ex = run({"moments", "--mu", "-1", "--nu", "1", "--p", "0.5", "--gamma", "0.5", "--k", "2"});
  EXPECT_NEAR(std::stod(lines(ex.out).back().substr(2)), 1.0 / 3.0, 1e-15);
}

TEST(Cli, SweepReportsRowErrors) {
  const auto r = run({"sweep", "--phi", "tent", "--b", "2", "--grid", "0.25,0.5,1", "--method", "recursion"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 5u);
  EXPECT_NE(l[3].find(",ok"), std::string::npos) << l[3];
  EXPECT_NE(l[4].find("error:"), std::string::npos) << l[4];
}

TEST(Cli, OutFile) {
  const auto path = std::filesystem::temp_directory_path() / "fracvar_cli_test.csv";
  const auto r = run({"eval", "--phi", "tent", "--b", "2", "--alpha", "0.5", "--t", "0.5", "0.25", "--out", path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto l = lines(ss.str());
  ASSERT_EQ(l.size(), 4u);
  EXPECT_EQ(l[2], "0.5,0.5");
  EXPECT_EQ(l[3], "0.25,0.5");
  std::filesystem::remove(path);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"variation", "--bogus"}).code, 1);
  EXPECT_EQ(run({"variation", "--phi", "tent", "--b", "2"}).code, 1);  // no alpha
  EXPECT_EQ(run({"variation", "--alpha", "0.5", "--hurst", "0.5"}).code, 1);
  EXPECT_EQ(run({"variation", "--alpha", "0.5", "--p", "0.5"}).code, 1);
  EXPECT_EQ(run({"signed", "--alpha", "0.7", "--q", "2"}).code, 1);
  EXPECT_EQ(run({"classify", "--phi", "wave", "--alpha", "0.7"}).code, 1);
  // regime and budget failures are runtime errors
  EXPECT_EQ(run({"slope", "--alpha", "0.4"}).code, 2);
  const auto big = run({"variation", "--alpha", "0.7", "--n", "30:31"});
  EXPECT_EQ(big.code, 2);
  EXPECT_NE(big.err.find("budget"), std::string::npos) << big.err;
}
