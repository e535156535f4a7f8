#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fracvar/analysis.hpp"
#include "fracvar/bernoulli_moments.hpp"
#include "fracvar/increment_model.hpp"
#include "fracvar/monte_carlo.hpp"
#include "fracvar/partition_variation.hpp"
#include "fracvar/report.hpp"

namespace fracvar {

struct CriterionResult {
  std::string id;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t mc_samples = 1'000'000;
  std::uint64_t sweep_samples = 20'000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool include_sweep = true;
  std::string figure_dir;  // sweep CSVs are written here when non-empty
};

namespace acceptance_detail {

inline double rel_err(double x, double ref) {
  return ref == 0.0 ? std::fabs(x) : std::fabs(x - ref) / std::fabs(ref);
}

class Runner {
 public:
  Runner(std::ostream& out) : out_(out) {}

  void run(const std::string& id, const std::string& title, const std::function<bool(std::ostringstream&)>& body) {
    CriterionResult r{id, title, false, "", 0.0};
    std::ostringstream detail;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      r.pass = body(detail);
    } catch (const std::exception& e) {
      detail << " exception: " << e.what();
      r.pass = false;
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.detail = detail.str();
    out_ << (r.pass ? "PASS " : "FAIL ") << r.id << "  " << r.title << "  |" << r.detail << "  (" << fmt_time(r.seconds)
         << ")\n";
    out_.flush();
    results_.push_back(std::move(r));
  }

  std::vector<CriterionResult> take() { return std::move(results_); }

 private:
  static std::string fmt_time(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3fs", s);
    return buf;
  }

  std::ostream& out_;
  std::vector<CriterionResult> results_;
};

inline std::string fmtg(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

}  // namespace acceptance_detail

// Runs every acceptance criterion and prints one PASS/FAIL line per check.
inline std::vector<CriterionResult> run_acceptance(std::ostream& out, const AcceptanceOptions& opt = {}) {
  using acceptance_detail::fmtg;
  using acceptance_detail::rel_err;
  acceptance_detail::Runner runner(out);

  // 1. Check values of E[Z^3].
  auto third_moment = [](int b, int ell) {
    const auto l = iid_params(b, ell);
    return moments_recursive(l.mu, l.nu, l.p, std::pow(static_cast<double>(b), -2.0 / 3.0), 3).moments[3];
  };
  auto timed_third_moment = [&](int b, int ell, double& per_call) {
    constexpr int reps = 1000;
    double v = 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) v = third_moment(b, ell);
    per_call = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
    return v;
  };
  runner.run("1a", "E[Z^3] = 27/256 for b=3, l=1 (rel 1e-12, < 1 ms)", [&](std::ostringstream& d) {
    double per_call = 0.0;
    const double v = timed_third_moment(3, 1, per_call);
    const double e = rel_err(v, 27.0 / 256.0);
    d << " value=" << fmtg(v) << " rel_err=" << fmtg(e) << " time/call=" << fmtg(per_call * 1e3) << "ms";
    return e <= 1e-12 && per_call < 1e-3;
  });
  runner.run("1b", "E[Z^3] = -875/6912 for b=6, l=5 (rel 1e-12, < 1 ms)", [&](std::ostringstream& d) {
    double per_call = 0.0;
    const double v = timed_third_moment(6, 5, per_call);
    const double e = rel_err(v, -875.0 / 6912.0);
    d << " value=" << fmtg(v) << " target=" << fmtg(-875.0 / 6912.0) << " rel_err=" << fmtg(e)
      << " closed_form=" << fmtg(third_moment_closed_form(6, 5)) << " time/call=" << fmtg(per_call * 1e3) << "ms";
    return e <= 1e-12 && per_call < 1e-3;
  });

  // 2. Closed form for k = 3.
  runner.run("2", "k=3 closed form for all b <= 8, 1 <= l <= b-1 (rel 1e-12)", [&](std::ostringstream& d) {
    double worst = 0.0;
    int cases = 0;
    for (int b = 2; b <= 8; ++b)
      for (int ell = 1; ell < b; ++ell) {
        const double ref = third_moment_closed_form(b, ell);
        const double v = third_moment(b, ell);
        // b = 2l gives 0 exactly; compare absolutely there.
        worst = std::max(worst, ref == 0.0 ? std::fabs(v) : rel_err(v, ref));
        ++cases;
      }
    d << " cases=" << cases << " worst_err=" << fmtg(worst);
    return worst <= 1e-12;
  });

  // 3. Moment form of V_{p,1,n} against the partition sums.
  runner.run("3", "V_{p,1,n} moment identity vs partition sums (1e-9 scaled, < 30 s)", [&](std::ostringstream& d) {
    const auto t0 = std::chrono::steady_clock::now();
    int cases = 0, failures = 0;
    double worst = 0.0;
    for (int b : {2, 3}) {
      const std::vector<BaseFunction> phis{BaseFunction::tent(), BaseFunction::skewed_tent(1, b),
                                           BaseFunction::sine(0.5)};
      for (const auto& phi : phis)
        for (double a : {0.45, 0.7}) {
          if (a <= 1.0 / b) continue;
          for (double sign : {1.0, -1.0}) {
            const FractalSpec spec(phi, b, sign * a);
            for (double p : {1.0, 2.0, 3.0, 4.5})
              for (int n = 0; n <= 8; ++n) {
                const double ps = partition_sum(spec, p, 1.0, n);
                const double lv = variation_from_increments(spec, p, n);
                const double err = std::fabs(lv - ps) / std::max(1.0, std::fabs(ps));
                worst = std::max(worst, err);
                ++cases;
                if (!(err <= 1e-9)) ++failures;
              }
          }
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    d << " cases=" << cases << " failures=" << failures << " worst_scaled_err=" << fmtg(worst);
    return failures == 0 && secs < 30.0;
  });

  // 4. Signed variation for the skewed tent b=3, l=1.
  const FractalSpec skew3 = FractalSpec::from_hurst(BaseFunction::skewed_tent(1, 3), 3, 1.0 / 3.0);
  runner.run("4", "|Vhat_{3,10} - 27/256| <= 5e-3 (b=3, l=1, alpha=3^(-1/3))", [&](std::ostringstream& d) {
    const double v = signed_partition_sum(skew3, 3, 1.0, 10);
    const auto law = iid_params(3, 1);
    const auto oracle = signed_moment_truncated(law, skew3.gamma(), 3, 10);
    const double dev = std::fabs(v - 27.0 / 256.0);
    d << " Vhat_10=" << fmtg(v) << " |dev|=" << fmtg(dev) << " E[S_10^3]=" << fmtg(oracle.value)
      << " |Vhat-E[S^3]|=" << fmtg(std::fabs(v - oracle.value));
    return dev <= 5e-3 && std::fabs(v - oracle.value) <= 1e-10;
  });

  // 5. Symmetric law: the signed sums vanish.
  runner.run("5", "|Vhat_{3,n}| <= 1e-10 for n <= 12 (tent b=2, alpha=2^(-1/3))", [&](std::ostringstream& d) {
    const auto spec = FractalSpec::from_hurst(BaseFunction::tent(), 2, 1.0 / 3.0);
    double worst = 0.0;
    for (int n = 0; n <= 12; ++n) worst = std::max(worst, std::fabs(signed_partition_sum(spec, 3, 1.0, n)));
    d << " max|Vhat|=" << fmtg(worst);
    return worst <= 1e-10;
  });

  // 6. Negative alpha: alternating signs.
  runner.run("6", "alternating Vhat_{3,n}, (-1)^n Vhat -> E[Z^3] at gamma<0 (5e-3)", [&](std::ostringstream& d) {
    const auto spec = FractalSpec::from_hurst(BaseFunction::skewed_tent(1, 3), 3, 1.0 / 3.0, -1);
    const auto law = iid_params(3, 1);
    const double limit = moments_recursive(law.mu, law.nu, law.p, spec.gamma(), 3).moments[3];
    bool alternates = true;
    double prev = signed_partition_sum(spec, 3, 1.0, 3);
    d << " Vhat_3=" << fmtg(prev);
    for (int n = 4; n <= 8; ++n) {
      const double v = signed_partition_sum(spec, 3, 1.0, n);
      if (!(v * prev < 0.0)) alternates = false;
      prev = v;
    }
    const int n_final = 10;
    const double v10 = signed_partition_sum(spec, 3, 1.0, n_final);
    const double dev = std::fabs(v10 - limit);  // (-1)^10 = 1
    d << " alternates(3..8)=" << (alternates ? "yes" : "no") << " limit=" << fmtg(limit) << " (-1)^10 Vhat_10="
      << fmtg(v10) << " |dev|=" << fmtg(dev);
    return alternates && dev <= 5e-3;
  });

  // 7. Markov law of the tent increments for odd b.
  runner.run("7", "tent increments at b in {3,5}, m <= 6 follow the 3-state chain exactly", [&](std::ostringstream& d) {
    const auto tent = BaseFunction::tent();
    int checks = 0;
    bool ok = true;
    for (int b : {3, 5}) {
      const auto law = markov_params(b);
      auto state_of = [&](int m, std::uint64_t k) {
        const double y = lambda_coeff(tent, b, m, k);
        const double r = std::nearbyint(y);
        if (std::fabs(y - r) > 1e-9 || std::fabs(r) > 1.0) throw std::runtime_error("non-ternary increment");
        return static_cast<int>(r) + 1;
      };
      for (int m = 1; m <= 6; ++m) {
        const std::uint64_t bm = checked_ipow(b, m);
        const std::uint64_t bm1 = bm / b;
        std::array<std::array<std::int64_t, 3>, 3> pair{};
        std::array<std::int64_t, 3> first{};
        for (std::uint64_t k = 0; k < bm; ++k) {
          const int y = state_of(m, k);
          if (m == 1)
            ++first[y];
          else
            ++pair[state_of(m - 1, k % bm1)][y];
        }
        if (m == 1) {
          for (int j = 0; j < 3; ++j) {
            ++checks;
            if (Rational(first[j], static_cast<std::int64_t>(bm)) != law.initial[j]) ok = false;
          }
          continue;
        }
        for (int i = 0; i < 3; ++i) {
          const std::int64_t row = pair[i][0] + pair[i][1] + pair[i][2];
          if (row == 0) continue;
          for (int j = 0; j < 3; ++j) {
            ++checks;
            if (Rational(pair[i][j], row) != law.transition[i][j]) ok = false;
          }
        }
      }
    }
    d << " exact_rational_checks=" << checks;
    return ok;
  });

  // 8. Regime trichotomy on finite n.
  runner.run("8a", "Takagi: V_{2,1,12} < 0.5 V_{2,1,6}", [&](std::ostringstream& d) {
    const FractalSpec spec(BaseFunction::tent(), 2, 0.5);
    const double v6 = partition_sum(spec, 2.0, 1.0, 6), v12 = partition_sum(spec, 2.0, 1.0, 12);
    d << " V6=" << fmtg(v6) << " V12=" << fmtg(v12);
    return v12 < 0.5 * v6;
  });
  runner.run("8b", "alpha=1/4: V_{1,1,n} nondecreasing and V_{1,1,12} <= C sum (|alpha| b)^m", [&](std::ostringstream& d) {
    const FractalSpec spec(BaseFunction::tent(), 2, 0.25);
    bool mono = true;
    double prev = partition_sum(spec, 1.0, 1.0, 1);
    for (int n = 2; n <= 12; ++n) {
      const double v = partition_sum(spec, 1.0, 1.0, n);
      if (v < prev) mono = false;
      prev = v;
    }
    const double bound = spec.phi().lipschitz_constant() / (1.0 - std::fabs(spec.alpha()) * spec.b());
    d << " V12=" << fmtg(prev) << " bound=" << fmtg(bound) << " nondecreasing=" << (mono ? "yes" : "no");
    return mono && prev <= bound;
  });
  const auto rough = FractalSpec::from_hurst(BaseFunction::tent(), 2, 1.0 / 3.0);
  runner.run("8c", "alpha=2^(-1/3): V_{3,1,n}, n=8..12, within 2% of the enumerated slope", [&](std::ostringstream& d) {
    const auto sl = variation_slope(rough, SlopeMethod::Enumeration);
    double worst = 0.0;
    for (int n = 8; n <= 12; ++n) worst = std::max(worst, rel_err(partition_sum(rough, 3.0, 1.0, n), sl.slope));
    d << " slope=" << fmtg(sl.slope) << " (+-" << fmtg(sl.error) << ", depth " << sl.depth
      << ") worst_rel_dev=" << fmtg(worst);
    return worst <= 0.02;
  });

  // 9. Linearity in t.
  runner.run("9", "|V_{3,t,10} - t V_{3,1,10}| / V_{3,1,10} <= 5% at t = 1/4, 1/2, 3/4", [&](std::ostringstream& d) {
    const double v1 = partition_sum(rough, 3.0, 1.0, 10);
    double worst = 0.0;
    for (double t : {0.25, 0.5, 0.75})
      worst = std::max(worst, std::fabs(partition_sum(rough, 3.0, t, 10) - t * v1) / v1);
    d << " V_{3,1,10}=" << fmtg(v1) << " worst_rel_dev=" << fmtg(worst);
    return worst <= 0.05;
  });

  // 10. Degenerate family phi = g - alpha g(b.).
  const FractalSpec degen(BaseFunction::degenerate(BaseFunction::sine(1.0), 0.7, 2), 2, 0.7);
  runner.run("10a", "degenerate sine, b=2, alpha=0.7: max|S_12| <= 1e-9", [&](std::ostringstream& d) {
    const auto rep = classify(degen, 12);
    const auto& ev = *rep.degenerate_evidence;
    d << " max|S_12|=" << fmtg(ev.max_abs_Sn) << " tail_bound=" << fmtg(ev.tail_bound)
      << " zero_candidate=" << (ev.zero_candidate ? "yes" : "no");
    return ev.max_abs_Sn <= 1e-9;
  });
  runner.run("10b", "degenerate sine: V_{q,1,n} decreasing for n = 4..10", [&](std::ostringstream& d) {
    const double q = degen.q_exponent();
    bool dec = true;
    double prev = partition_sum(degen, q, 1.0, 4);
    d << " q=" << fmtg(q) << " V4=" << fmtg(prev);
    for (int n = 5; n <= 10; ++n) {
      const double v = partition_sum(degen, q, 1.0, n);
      if (!(v < prev)) dec = false;
      prev = v;
    }
    d << " V10=" << fmtg(prev);
    return dec;
  });

  // 11. Monte Carlo against the exact values.
  auto mc_line = [&](std::ostringstream& d, const McResult& mc, double ref) {
    const double z = std::fabs(mc.estimate - ref) / mc.std_error;
    d << " mc=" << fmtg(mc.estimate) << " se=" << fmtg(mc.std_error) << " ref=" << fmtg(ref) << " z=" << fmtg(z);
    return z <= 4.0;
  };
  runner.run("11a", "MC E[Z^3] (b=3, l=1) vs 27/256 within 4 se", [&](std::ostringstream& d) {
    return mc_line(d, mc_estimate(skew3, 3, true, 0, opt.mc_samples, opt.seed, opt.threads), 27.0 / 256.0);
  });
  runner.run("11b", "MC E[Z^3] (b=6, l=5) vs recursion within 4 se", [&](std::ostringstream& d) {
    const auto spec = FractalSpec::from_hurst(BaseFunction::skewed_tent(5, 6), 6, 1.0 / 3.0);
    return mc_line(d, mc_estimate(spec, 3, true, 0, opt.mc_samples, opt.seed, opt.threads), third_moment(6, 5));
  });
  runner.run("11c", "MC E[S_10^3] vs the exact signed sum Vhat_{3,10} within 4 se", [&](std::ostringstream& d) {
    const double v = signed_partition_sum(skew3, 3, 1.0, 10);
    return mc_line(d, mc_estimate(skew3, 3, true, 10, opt.mc_samples, opt.seed, opt.threads), v);
  });
  runner.run("11d", "fixed seed reproduces byte-identical CSV across thread counts", [&](std::ostringstream& d) {
    auto csv = [&](unsigned threads) {
      SlopeParams sp;
      sp.samples = 200'000;
      sp.seed = opt.seed;
      sp.threads = threads;
      std::ostringstream os;
      write_sweep_csv(os, hurst_sweep(BaseFunction::skewed_tent(1, 3), 3, {0.25, 1.0 / 3.0, 0.5}, SlopeMethod::MonteCarlo, sp),
                      3, "skewed:l=1");
      return os.str();
    };
    const std::string a = csv(1), b = csv(1), c = csv(4);
    d << " bytes=" << a.size() << " same_run=" << (a == b ? "yes" : "no") << " threads_1_vs_4=" << (a == c ? "yes" : "no");
    return a == b && a == c;
  });

  if (opt.include_sweep) {
    runner.run("fig1", "Hurst sweeps (tent x5 and sine 1/2, b=2..5) without row errors", [&](std::ostringstream& d) {
      int rows = 0, errors = 0;
      const std::vector<std::pair<std::string, BaseFunction>> panels{{"tent:scale=5", BaseFunction::scaled_tent(5.0)},
                                                                      {"sine:amp=0.5", BaseFunction::sine(0.5)}};
      for (const auto& [label, phi] : panels)
        for (int b = 2; b <= 5; ++b) {
          SlopeParams sp;
          sp.samples = opt.sweep_samples;
          sp.seed = opt.seed;
          sp.threads = opt.threads;
          const auto table = hurst_sweep(phi, b, default_hurst_grid(), SlopeMethod::MonteCarlo, sp);
          for (const auto& r : table) {
            ++rows;
            if (!r.ok() || !std::isfinite(r.slope)) ++errors;
          }
          if (!opt.figure_dir.empty()) {
            std::filesystem::create_directories(opt.figure_dir);
            std::string name = label.substr(0, label.find(':'));
            std::ofstream f(opt.figure_dir + "/sweep_" + name + "_b" + std::to_string(b) + ".csv");
            f << "# sweep phi=" << label << " b=" << b << " method=mc samples=" << sp.samples << " seed=" << sp.seed
              << "\n";
            write_sweep_csv(f, table, b, label);
          }
        }
      d << " rows=" << rows << " row_errors=" << errors;
      return errors == 0;
    });
  }

  auto results = runner.take();
  int passed = 0;
  for (const auto& r : results) passed += r.pass ? 1 : 0;
  out << passed << "/" << results.size() << " acceptance checks passed\n";
  return results;
}

}  // namespace fracvar
