#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fracvar/base_function.hpp"
#include "fracvar/fractal.hpp"

namespace fracvar {

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

inline bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

inline double parse_double(const std::string& s, const char* what) {
  const std::string t = trim(s);
  if (t.empty()) throw std::invalid_argument(std::string(what) + ": empty number");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || !std::isfinite(v))
    throw std::invalid_argument(std::string(what) + ": cannot parse '" + s + "' as a number");
  return v;
}

inline int parse_int(const std::string& s, const char* what) {
  const std::string t = trim(s);
  std::size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(t, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (t.empty() || pos != t.size()) throw std::invalid_argument(std::string(what) + ": cannot parse '" + s + "' as an integer");
  return v;
}

// "a/b" or a decimal.
inline double parse_ratio(const std::string& s, const char* what) {
  const auto slash = s.find('/');
  if (slash == std::string::npos) return parse_double(s, what);
  const double den = parse_double(s.substr(slash + 1), what);
  if (den == 0.0) throw std::invalid_argument(std::string(what) + ": zero denominator in '" + s + "'");
  return parse_double(s.substr(0, slash), what) / den;
}

}  // namespace detail

// CSV with a header line, then rows "t,value".
inline std::vector<Breakpoint> read_breakpoints_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("pwl: cannot open '" + path + "'");
  std::vector<Breakpoint> bps;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    line = detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("pwl: malformed row '" + line + "' in " + path);
    bps.push_back({detail::parse_double(line.substr(0, comma), "pwl t"),
                   detail::parse_double(line.substr(comma + 1), "pwl value")});
  }
  return bps;
}

// tent | tent:scale=S | skewed:l=L | sine:amp=A | degenerate:inner=<phi> | pwl:@file.csv
// b and alpha are those of the enclosing fractal (skewed tent and degenerate maps need them).
inline BaseFunction parse_phi(const std::string& text, int b, double alpha) {
  const std::string s = detail::trim(text);
  using detail::starts_with;
  if (s == "tent") return BaseFunction::tent();
  if (starts_with(s, "tent:scale=")) return BaseFunction::scaled_tent(detail::parse_double(s.substr(11), "tent scale"));
  if (starts_with(s, "skewed:l=")) return BaseFunction::skewed_tent(detail::parse_int(s.substr(9), "skewed l"), b);
  if (s == "sine") return BaseFunction::sine(1.0);
  if (starts_with(s, "sine:amp=")) return BaseFunction::sine(detail::parse_ratio(s.substr(9), "sine amplitude"));
  if (starts_with(s, "degenerate:inner="))
    return BaseFunction::degenerate(parse_phi(s.substr(17), b, alpha), alpha, b);
  if (starts_with(s, "pwl:@")) {
    const std::string path = s.substr(5);
    return BaseFunction::piecewise_linear(read_breakpoints_csv(path), "pwl:@" + path);
  }
  throw std::invalid_argument("unknown phi '" + text +
                              "' (expected tent, tent:scale=S, skewed:l=L, sine:amp=A, degenerate:inner=..., pwl:@file)");
}

// alpha = sign * base^exponent, or a plain decimal.
struct AlphaExpr {
  double value = 0.0;
  std::optional<double> hurst;  // set when base == b, so that alpha = sign * b^-H exactly
  int sign = 1;
};

// Accepts decimals ("0.7", "-0.45") and power forms "b^(-1/3)", "-3^(-1/3)", "2^-0.5".
inline AlphaExpr parse_alpha(const std::string& text, int b) {
  std::string s = detail::trim(text);
  AlphaExpr out;
  const auto caret = s.find('^');
  if (caret == std::string::npos) {
    out.value = detail::parse_double(s, "alpha");
    out.sign = out.value < 0.0 ? -1 : 1;
    return out;
  }
  std::string base = detail::trim(s.substr(0, caret));
  std::string expo = detail::trim(s.substr(caret + 1));
  if (!base.empty() && base[0] == '-') {
    out.sign = -1;
    base = detail::trim(base.substr(1));
  } else if (!base.empty() && base[0] == '+') {
    base = detail::trim(base.substr(1));
  }
  if (base.size() >= 2 && base.front() == '(' && base.back() == ')') base = base.substr(1, base.size() - 2);
  if (expo.size() >= 2 && expo.front() == '(' && expo.back() == ')') expo = expo.substr(1, expo.size() - 2);
  const double base_value = base == "b" ? static_cast<double>(b) : detail::parse_double(base, "alpha base");
  if (!(base_value > 0.0)) throw std::invalid_argument("alpha: base must be positive in '" + text + "'");
  const double e = detail::parse_ratio(expo, "alpha exponent");
  out.value = out.sign * std::pow(base_value, e);
  if (base_value == static_cast<double>(b)) out.hurst = -e;
  return out;
}

inline FractalSpec make_spec(const BaseFunction& phi, int b, const AlphaExpr& a) {
  if (a.hurst && *a.hurst > 0.0) return FractalSpec::from_hurst(phi, b, *a.hurst, a.sign);
  return FractalSpec(phi, b, a.value);
}

// "lo:hi" or a single integer.
inline std::pair<int, int> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    const int n = detail::parse_int(text, "range");
    return {n, n};
  }
  return {detail::parse_int(text.substr(0, colon), "range"), detail::parse_int(text.substr(colon + 1), "range")};
}

// "lo:hi:step" grid, or a comma-separated list.
inline std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> g;
  if (std::count(text.begin(), text.end(), ':') == 2) {
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 + 1);
    const double lo = detail::parse_double(text.substr(0, c1), "grid");
    const double hi = detail::parse_double(text.substr(c1 + 1, c2 - c1 - 1), "grid");
    const double step = detail::parse_double(text.substr(c2 + 1), "grid");
    if (!(step > 0.0)) throw std::invalid_argument("grid: step must be > 0");
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    // Rounded to 12 digits so that 0.05:0.95:0.05 yields 0.15, not 0.15000000000000002.
    for (long i = 0; i <= count; ++i) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.12g", lo + static_cast<double>(i) * step);
      g.push_back(std::strtod(buf, nullptr));
    }
    return g;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) g.push_back(detail::parse_double(item, "grid"));
  return g;
}

}  // namespace fracvar
