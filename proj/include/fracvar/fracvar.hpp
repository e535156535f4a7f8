#pragma once

#include "fracvar/analysis.hpp"
#include "fracvar/base_function.hpp"
#include "fracvar/bernoulli_moments.hpp"
#include "fracvar/common.hpp"
#include "fracvar/fractal.hpp"
#include "fracvar/increment_model.hpp"
#include "fracvar/monte_carlo.hpp"
#include "fracvar/parse.hpp"
#include "fracvar/partition_variation.hpp"
#include "fracvar/report.hpp"
