#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "fracvar/analysis.hpp"
#include "fracvar/partition_variation.hpp"

namespace fracvar {

// Shortest round-trip form, so identical values always print identically.
inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

// Fields containing commas or quotes are quoted.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_series_csv(std::ostream& os, const VariationSeries& s, double alpha, const std::string& phi) {
  os << "n,p,t,b,alpha,phi,value\n";
  for (const auto& [n, v] : s.values)
    os << n << ',' << fmt(s.p) << ',' << fmt(s.t) << ',' << s.b << ',' << fmt(alpha) << ',' << csv_field(phi) << ','
       << fmt(v) << '\n';
}

// Failed rows keep their place in H order; the status column carries the error.
inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows, int b, const std::string& phi) {
  os << "H,q,slope,error,method,b,phi,status\n";
  for (const auto& r : rows)
    os << fmt(r.H) << ',' << fmt(r.q) << ',' << fmt(r.slope) << ',' << fmt(r.error) << ',' << to_string(r.method)
       << ',' << b << ',' << csv_field(phi) << ',' << (r.ok() ? std::string("ok") : csv_field("error: " + r.error_tag))
       << '\n';
}

}  // namespace fracvar
