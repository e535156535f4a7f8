#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fracvar/acceptance.hpp"
#include "fracvar/analysis.hpp"
#include "fracvar/bernoulli_moments.hpp"
#include "fracvar/fractal.hpp"
#include "fracvar/increment_model.hpp"
#include "fracvar/monte_carlo.hpp"
#include "fracvar/parse.hpp"
#include "fracvar/partition_variation.hpp"
#include "fracvar/report.hpp"

namespace fracvar {

namespace cli_detail {

// Raised for bad flag values found after CLI11 has parsed the command line.
struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string phi = "tent";
  int b = 2;
  std::optional<std::string> alpha;
  std::optional<double> hurst;
  std::string format = "csv";
  std::string out;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

inline void add_spec_options(CLI::App* app, Common& c) {
  app->add_option("--phi", c.phi, "base function: tent, tent:scale=S, skewed:l=L, sine:amp=A, degenerate:inner=..., pwl:@file.csv")
      ->capture_default_str();
  app->add_option("--b", c.b, "base b >= 2")->capture_default_str();
  auto* a = app->add_option("--alpha", c.alpha, "alpha: decimal or power form such as b^(-1/3), -3^(-1/3)");
  auto* h = app->add_option("--hurst", c.hurst, "Hurst parameter H, alpha = b^-H");
  a->excludes(h);
  h->excludes(a);
}

inline void add_output_options(CLI::App* app, Common& c) {
  app->add_option("--format", c.format, "output format")->check(CLI::IsMember({"csv", "plain"}))->capture_default_str();
  app->add_option("--out", c.out, "write output to this file instead of stdout");
  app->add_option("--threads", c.threads, "worker threads (0: hardware concurrency); results do not depend on it");
}

inline FractalSpec build_spec(const Common& c) {
  if (!c.alpha && !c.hurst) throw usage_error("one of --alpha or --hurst is required");
  AlphaExpr a;
  if (c.hurst) {
    a.hurst = *c.hurst;
    a.value = std::pow(static_cast<double>(c.b), -*c.hurst);
  } else {
    a = parse_alpha(*c.alpha, c.b);
  }
  const BaseFunction phi = parse_phi(c.phi, c.b, a.value);
  return make_spec(phi, c.b, a);
}

inline std::uint64_t env_budget(std::uint64_t fallback) {
  if (const char* v = std::getenv("FRACVAR_BUDGET")) {
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v, &end, 10);
    if (end == v || *end != '\0' || x == 0) throw usage_error("FRACVAR_BUDGET must be a positive integer");
    return x;
  }
  return fallback;
}

// Comment line recording the full invocation.
inline std::string config_line(int argc, const char* const* argv) {
  std::string s = "# fracvar";
  for (int i = 1; i < argc; ++i) {
    s += ' ';
    s += argv[i];
  }
  if (const char* v = std::getenv("FRACVAR_BUDGET")) s += std::string(" FRACVAR_BUDGET=") + v;
  return s + "\n";
}

inline SlopeMethod parse_method(const std::string& m) {
  if (m == "recursion") return SlopeMethod::Recursion;
  if (m == "enumeration" || m == "enumerate") return SlopeMethod::Enumeration;
  if (m == "mc" || m == "monte_carlo") return SlopeMethod::MonteCarlo;
  throw usage_error("unknown method '" + m + "'");
}

}  // namespace cli_detail

// Exit codes: 0 success, 1 argument errors, 2 numerical or budget failures.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace cli_detail;
  CLI::App app{"Variation, moments and regimes of the fractal functions f(t) = sum alpha^m phi(b^m t)", "fracvar"};
  app.require_subcommand(1);
  Common c;

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate f at points t");
  std::vector<double> eval_t;
  double eval_tol = 1e-12;
  add_spec_options(eval, c);
  add_output_options(eval, c);
  eval->add_option("--t", eval_t, "points t >= 0")->required();
  eval->add_option("--tol", eval_tol, "truncation tolerance")->capture_default_str();

  // variation / signed
  auto* variation = app.add_subcommand("variation", "partition sums V_{p,t,n} along b-adic partitions");
  auto* signed_cmd = app.add_subcommand("signed", "signed partition sums for odd q");
  double var_p = 2.0, var_t = 1.0;
  int sgn_q = 3;
  std::string n_range = "1:10";
  for (auto* sc : {variation, signed_cmd}) {
    add_spec_options(sc, c);
    add_output_options(sc, c);
    sc->add_option("--t", var_t, "time horizon in [0,1]")->capture_default_str();
    sc->add_option("--n", n_range, "n or n_min:n_max")->capture_default_str();
  }
  variation->add_option("--p", var_p, "power p >= 1")->capture_default_str();
  signed_cmd->add_option("--q", sgn_q, "odd power q")->capture_default_str();

  // classify
  auto* classify_cmd = app.add_subcommand("classify", "regime of (phi, b, alpha)");
  int cls_depth = default_degeneracy_depth;
  add_spec_options(classify_cmd, c);
  add_output_options(classify_cmd, c);
  classify_cmd->add_option("--depth", cls_depth, "depth of the exact support used as degeneracy evidence")
      ->capture_default_str();

  // slope
  auto* slope = app.add_subcommand("slope", "E|Z|^q, the slope of the q-th variation");
  std::string slope_method = "enumeration";
  SlopeParams sp;
  add_spec_options(slope, c);
  add_output_options(slope, c);
  slope->add_option("--method", slope_method, "recursion | enumeration | mc")->capture_default_str();
  slope->add_option("--depth", sp.depth, "truncation depth (0: automatic)")->capture_default_str();
  slope->add_option("--samples", sp.samples, "Monte Carlo samples")->capture_default_str();
  slope->add_option("--seed", c.seed, "random seed")->capture_default_str();

  // signed-limit
  auto* signed_limit = app.add_subcommand("signed-limit", "limit of the signed q-th variation for a skewed tent");
  add_spec_options(signed_limit, c);
  add_output_options(signed_limit, c);

  // moments
  auto* moments = app.add_subcommand("moments", "moments E[Z^k] of the Bernoulli convolution");
  std::optional<double> m_mu, m_nu, m_p, m_gamma;
  int m_k = 3, m_depth = 0;
  std::string m_method = "recursion", m_dump;
  std::uint64_t m_samples = 1'000'000;
  add_spec_options(moments, c);
  add_output_options(moments, c);
  moments->add_option("--mu", m_mu, "lower atom mu < 0");
  moments->add_option("--nu", m_nu, "upper atom nu > 0");
  moments->add_option("--p", m_p, "P[Y = nu]");
  moments->add_option("--gamma", m_gamma, "ratio gamma in (-1,1)");
  moments->add_option("--k", m_k, "highest moment")->capture_default_str();
  moments->add_option("--method", m_method, "recursion | enumerate | mc")->capture_default_str();
  moments->add_option("--depth", m_depth, "partial-sum depth for enumerate / mc (0: automatic)")->capture_default_str();
  moments->add_option("--samples", m_samples, "Monte Carlo samples")->capture_default_str();
  moments->add_option("--seed", c.seed, "random seed")->capture_default_str();
  moments->add_option("--dump", m_dump, "write the exact distribution of S_depth (value,probability,state) to this CSV");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "slope E|Z|^{1/H} over a grid of Hurst parameters");
  std::string sw_grid = "0.05:0.95:0.05", sw_method = "mc";
  int sw_sign = 1;
  SlopeParams swp;
  swp.samples = 100'000;
  sweep->add_option("--phi", c.phi, "base function")->capture_default_str();
  sweep->add_option("--b", c.b, "base b >= 2")->capture_default_str();
  add_output_options(sweep, c);
  sweep->add_option("--grid", sw_grid, "lo:hi:step or comma list of H values")->capture_default_str();
  sweep->add_option("--method", sw_method, "recursion | enumeration | mc")->capture_default_str();
  sweep->add_option("--samples", swp.samples, "Monte Carlo samples per row")->capture_default_str();
  sweep->add_option("--depth", swp.depth, "truncation depth (0: automatic)")->capture_default_str();
  sweep->add_option("--seed", c.seed, "random seed")->capture_default_str();
  sweep->add_option("--sign", sw_sign, "sign of alpha (+1 or -1)")->check(CLI::IsMember({1, -1}))->capture_default_str();

  // convergence
  auto* convergence = app.add_subcommand("convergence", "growth rate of log V_{p,t,n} against the prediction");
  double cv_p = 2.0, cv_t = 1.0;
  std::string cv_range = "2:12";
  add_spec_options(convergence, c);
  add_output_options(convergence, c);
  convergence->add_option("--p", cv_p, "power p >= 1")->capture_default_str();
  convergence->add_option("--t", cv_t, "time horizon in [0,1]")->capture_default_str();
  convergence->add_option("--n", cv_range, "n_min:n_max")->capture_default_str();

  // selftest
  auto* selftest = app.add_subcommand("selftest", "run the acceptance suite");
  AcceptanceOptions acc;
  bool acc_no_sweep = false;
  selftest->add_option("--mc-samples", acc.mc_samples, "Monte Carlo samples for the consistency checks")
      ->capture_default_str();
  selftest->add_option("--sweep-samples", acc.sweep_samples, "Monte Carlo samples per sweep row")->capture_default_str();
  selftest->add_option("--figure-dir", acc.figure_dir, "write the sweep CSVs to this directory");
  selftest->add_flag("--no-sweep", acc_no_sweep, "skip the Hurst sweeps");
  selftest->add_option("--threads", c.threads, "worker threads")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code;
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return 1;
  }

  std::ofstream file;
  std::ostringstream buffer;
  const bool csv = c.format == "csv";
  const std::string header = config_line(argc, argv);

  try {
    if (*selftest) {
      acc.threads = c.threads;
      acc.include_sweep = !acc_no_sweep;
      const auto results = run_acceptance(out, acc);
      for (const auto& r : results)
        if (!r.pass) return 2;
      return 0;
    }

    std::ostream& os = buffer;
    if (*eval) {
      const auto spec = build_spec(c);
      if (csv) os << header << "t,value\n";
      for (double t : eval_t) {
        const double v = eval_f(spec, t, eval_tol);
        if (csv)
          os << fmt(t) << ',' << fmt(v) << '\n';
        else
          os << "f(" << fmt(t) << ") = " << fmt(v) << '\n';
      }
    } else if (*variation || *signed_cmd) {
      const auto spec = build_spec(c);
      const auto [lo, hi] = parse_range(n_range);
      const bool is_signed = static_cast<bool>(*signed_cmd);
      if (is_signed && (sgn_q < 1 || sgn_q % 2 == 0)) throw usage_error("--q must be an odd positive integer");
      const auto budget = env_budget(default_partition_budget);
      VariationSeries s;
      if (is_signed && sgn_q == 1) {
        // q = 1 is allowed for diagnostics; the series wrapper needs q >= 3.
        s = VariationSeries{1.0, var_t, spec.b(), true, {}};
        for (int n = lo; n <= hi; ++n) {
          const auto bn = checked_ipow(spec.b(), n);
          if (bn == 0 || bn > budget)
            throw budget_exceeded("signed: b^n exceeds the budget of " + std::to_string(budget) +
                                  " increments at n=" + std::to_string(n));
          s.values.emplace_back(n, signed_partition_sum(spec, 1, var_t, n, c.threads));
        }
      } else {
        s = variation_series(spec, is_signed ? sgn_q : var_p, var_t, lo, hi, is_signed, budget, c.threads);
      }
      if (csv) {
        os << header;
        write_series_csv(os, s, spec.alpha(), spec.phi().label());
      } else {
        for (const auto& [n, v] : s.values)
          os << (is_signed ? "Vhat_{" : "V_{") << fmt(s.p) << ',' << fmt(s.t) << ',' << n << "} = " << fmt(v) << '\n';
      }
    } else if (*classify_cmd) {
      const auto spec = build_spec(c);
      const auto rep = classify(spec, cls_depth, env_budget(default_streaming_budget));
      const auto& ev = rep.degenerate_evidence;
      if (csv) {
        os << header << "regime,q,H,max_abs_Sn,depth,tail_bound,zero_candidate,sufficient_condition\n";
        os << to_string(rep.regime) << ',' << fmt(rep.q) << ',' << fmt(rep.hurst) << ','
           << (ev ? fmt(ev->max_abs_Sn) : "") << ',' << (ev ? std::to_string(ev->depth) : "") << ','
           << (ev ? fmt(ev->tail_bound) : "") << ',' << (ev ? (ev->zero_candidate ? "true" : "false") : "") << ','
           << (rep.sufficient_condition_holds ? (*rep.sufficient_condition_holds ? "true" : "false") : "") << '\n';
      } else {
        os << to_string(rep.regime);
        if (rep.regime == Regime::Rough) os << " q=" << fmt(rep.q) << " H=" << fmt(rep.hurst);
        os << '\n';
        if (ev)
          os << "max|S_" << ev->depth << "| = " << fmt(ev->max_abs_Sn) << " (tail bound " << fmt(ev->tail_bound)
             << ")" << (ev->zero_candidate ? ", Z = 0 candidate" : "") << '\n';
        if (rep.sufficient_condition_holds)
          os << "sufficient condition: " << (*rep.sufficient_condition_holds ? "holds" : "not verified") << '\n';
      }
    } else if (*slope) {
      const auto spec = build_spec(c);
      sp.seed = c.seed;
      sp.threads = c.threads;
      sp.budget = env_budget(sp.budget);
      const auto r = variation_slope(spec, parse_method(slope_method), sp);
      if (csv)
        os << header << "q,slope,error,method,depth,samples\n"
           << fmt(r.q) << ',' << fmt(r.slope) << ',' << fmt(r.error) << ',' << to_string(r.method) << ',' << r.depth
           << ',' << r.samples << '\n';
      else
        os << "E|Z|^" << fmt(r.q) << " = " << fmt(r.slope) << " +- " << fmt(r.error) << " (" << to_string(r.method)
           << ")\n";
    } else if (*signed_limit) {
      const auto spec = build_spec(c);
      const auto r = signed_variation_limit(spec);
      if (csv)
        os << header << "kind,q,value,value_even_n,value_odd_n\n"
           << to_string(r.kind) << ',' << r.q << ',' << fmt(r.value) << ',' << fmt(r.value_even_n) << ','
           << fmt(r.value_odd_n) << '\n';
      else if (r.kind == SignedLimitKind::OscillatingPair)
        os << "OscillatingPair even n -> " << fmt(r.value_even_n) << ", odd n -> " << fmt(r.value_odd_n) << '\n';
      else
        os << to_string(r.kind) << ' ' << fmt(r.value) << '\n';
    } else if (*moments) {
      if (m_k < 0) throw usage_error("--k must be >= 0");
      const bool explicit_law = m_mu || m_nu || m_p || m_gamma;
      if (m_method == "recursion") {
        double mu, nu, p, gamma;
        if (explicit_law) {
          if (!(m_mu && m_nu && m_p && m_gamma)) throw usage_error("--mu, --nu, --p and --gamma go together");
          mu = *m_mu, nu = *m_nu, p = *m_p, gamma = *m_gamma;
        } else {
          const auto spec = build_spec(c);
          const auto law = increment_law(spec.phi(), spec.b(), DistributionMode::IIDTwoPoint);
          const auto& l = std::get<IIDTwoPointLaw>(law);
          mu = l.mu, nu = l.nu, p = l.p, gamma = spec.gamma();
        }
        const auto t = moments_recursive(mu, nu, p, gamma, m_k);
        if (csv) os << header << "k,moment\n";
        for (int k = 0; k <= m_k; ++k)
          os << (csv ? std::to_string(k) + "," : "E[Z^" + std::to_string(k) + "] = ") << fmt(t.moments[k]) << '\n';
      } else if (m_method == "enumerate" || m_method == "enumeration" || m_method == "mc") {
        if (explicit_law) throw usage_error("--mu/--nu/--p/--gamma apply to --method recursion only");
        const auto spec = build_spec(c);
        const IncrementLaw law = increment_law(spec.phi(), spec.b());
        const bool mc = m_method == "mc";
        if (csv) os << header << (mc ? "k,moment,std_error,depth,samples\n" : "k,moment,error_bound,depth\n");
        const auto budget = env_budget(default_streaming_budget);
        const int depth = m_depth > 0 ? m_depth : enumeration_depth(law, spec.gamma(), m_k, 1e-6, budget);
        for (int k = 1; k <= m_k; ++k) {
          if (mc) {
            const auto r = mc_estimate(spec, k, true, m_depth, m_samples, c.seed, c.threads);
            if (csv)
              os << k << ',' << fmt(r.estimate) << ',' << fmt(r.std_error) << ',' << r.depth << ',' << r.samples
                 << '\n';
            else
              os << "E[Z^" << k << "] ~ " << fmt(r.estimate) << " +- " << fmt(r.std_error) << '\n';
          } else {
            const auto r = signed_moment_enumerated(law, spec.gamma(), k, depth, budget);
            if (csv)
              os << k << ',' << fmt(r.value) << ',' << fmt(r.error_bound) << ',' << r.depth << '\n';
            else
              os << "E[S_" << depth << "^" << k << "] = " << fmt(r.value) << " (|E[Z^" << k
                 << "] - it| <= " << fmt(r.error_bound) << ")\n";
          }
        }
        if (!m_dump.empty()) {
          const auto dist = exact_partial_sum_distribution(spec, depth, DistributionMode::Auto,
                                                           env_budget(default_enumeration_budget));
          std::ofstream dump(m_dump);
          if (!dump) throw usage_error("cannot open --dump file '" + m_dump + "'");
          dump << header << "value,probability,state\n";
          for (std::size_t i = 0; i < dist.size(); ++i)
            dump << fmt(dist.values[i]) << ',' << fmt(dist.probabilities[i]) << ',' << int(dist.states[i]) << '\n';
        }
      } else {
        throw usage_error("unknown --method '" + m_method + "' (recursion | enumerate | mc)");
      }
    } else if (*sweep) {
      const auto grid = parse_grid(sw_grid);
      const BaseFunction phi = parse_phi(c.phi, c.b, 0.0);
      swp.seed = c.seed;
      swp.threads = c.threads;
      swp.budget = env_budget(swp.budget);
      const auto rows = hurst_sweep(phi, c.b, grid, parse_method(sw_method), swp, sw_sign);
      if (csv) {
        os << header;
        write_sweep_csv(os, rows, c.b, phi.label());
      } else {
        for (const auto& r : rows) {
          os << "H=" << fmt(r.H) << " q=" << fmt(r.q) << ' ';
          if (r.ok())
            os << "slope=" << fmt(r.slope) << " +- " << fmt(r.error) << '\n';
          else
            os << "error: " << r.error_tag << '\n';
        }
      }
    } else if (*convergence) {
      const auto spec = build_spec(c);
      const auto [lo, hi] = parse_range(cv_range);
      const auto rep = convergence_report(spec, cv_p, cv_t, lo, hi, env_budget(default_partition_budget), c.threads);
      if (csv) {
        os << header << "n,value,predicted_rate\n";
        for (const auto& [n, v] : rep.series.values) os << n << ',' << fmt(v) << ',' << fmt(rep.predicted_rate) << '\n';
        os << "# predicted=" << to_string(rep.predicted) << " observed=" << to_string(rep.observed)
           << " observed_rate=" << fmt(rep.observed_rate) << '\n';
      } else {
        for (const auto& [n, v] : rep.series.values) os << "V_" << n << " = " << fmt(v) << '\n';
        os << "predicted rate " << fmt(rep.predicted_rate) << " (" << to_string(rep.predicted) << "), observed rate "
           << fmt(rep.observed_rate) << " (" << to_string(rep.observed) << ")\n";
      }
    }
  } catch (const usage_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  if (!c.out.empty()) {
    file.open(c.out);
    if (!file) {
      err << "error: cannot open --out file '" << c.out << "'\n";
      return 1;
    }
    file << buffer.str();
  } else {
    out << buffer.str();
  }
  return 0;
}

}  // namespace fracvar
