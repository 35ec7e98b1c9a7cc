#pragma once

// kernelgauge command line: verify, sweep, kernel-eval, selftest.
// Exit codes: 0 pass, 1 verdict fail, 2 config error, 3 inconclusive or
// numerical failure.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "kernelgauge/scenario.hpp"
#include "kernelgauge/selftest.hpp"
#include "kernelgauge/verifier.hpp"

namespace kernelgauge {

enum ExitCode : int { exit_pass = 0, exit_fail = 1, exit_config = 2, exit_inconclusive = 3 };

inline int exit_code(Verdict v) {
  switch (v) {
    case Verdict::pass: return exit_pass;
    case Verdict::fail: return exit_fail;
    case Verdict::inconclusive: return exit_inconclusive;
  }
  return exit_inconclusive;
}

/// Fixed formatting so reruns are byte-identical.
inline std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

/// KERNELGAUGE_THREADS, else the hardware concurrency.
inline unsigned thread_cap() {
  if (const char* env = std::getenv("KERNELGAUGE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw InvalidConfig("KERNELGAUGE_THREADS must be a positive integer");
    return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct VerifyOutcome {
  VerificationReport report;
  std::optional<double> monodromy_defect;
};

inline VerifyOutcome run_verify(const Scenario& sc) {
  const WeightModel m(sc.config);
  VerifyOutcome out{verify(m, sc.run.verify), std::nullopt};
  if (out.report.prediction.flags.phi_shape && out.report.prediction.flags.psi_shape) {
    out.monodromy_defect = f0_construct(m).monodromy_defect;
  }
  return out;
}

inline std::string report_csv(const Scenario& sc, const VerifyOutcome& o) {
  const VerificationReport& r = o.report;
  const WeightConfig& c = sc.config;
  std::ostringstream s;
  s << "quantity,value\n";
  s << "domain," << to_string(c.domain.kind()) << "\n";
  s << "q," << num(c.domain.inner_radius()) << "\n";
  s << "re_z0," << num(c.z0.real()) << "\n";
  s << "im_z0," << num(c.z0.imag()) << "\n";
  s << "k," << c.k << "\n";
  s << "K," << num(r.K.value) << "\n";
  s << "K_error," << num(r.K.error_estimate()) << "\n";
  s << "B," << num(r.B.value) << "\n";
  s << "B_error," << num(r.B.error_estimate()) << "\n";
  s << "I_c," << num(r.I_c) << "\n";
  s << "ratio," << num(r.ratio) << "\n";
  s << "ratio_error," << num(r.ratio_error) << "\n";
  s << "alpha_green," << num(r.prediction.alpha_green) << "\n";
  s << "alpha_u," << num(r.prediction.alpha_u) << "\n";
  s << "character_distance," << num(r.prediction.character_distance) << "\n";
  s << "expected_equality," << (r.prediction.expected ? "true" : "false") << "\n";
  s << "tol_eq," << num(r.tol_eq) << "\n";
  if (r.has_route) {
    s << "K_reduced," << num(r.K_reduced.value) << "\n";
    s << "B_reduced," << num(r.B_reduced.value) << "\n";
    s << "route_gap," << num(r.route_gap) << "\n";
  }
  if (o.monodromy_defect) s << "monodromy_defect," << num(*o.monodromy_defect) << "\n";
  s << "verdict," << to_string(r.verdict) << "\n";
  return s.str();
}

inline std::string report_md(const Scenario& sc, const VerifyOutcome& o) {
  const VerificationReport& r = o.report;
  const WeightConfig& c = sc.config;
  const auto yes = [](bool b) { return b ? "yes" : "no"; };
  std::ostringstream s;
  s << "# kernelgauge verify: " << sc.source << "\n\n";
  s << "Domain " << to_string(c.domain.kind());
  if (!c.domain.is_disc()) s << " (q = " << num(c.domain.inner_radius()) << ")";
  s << ", z0 = " << num(c.z0.real()) << (c.z0.imag() < 0 ? " - " : " + ") << num(std::abs(c.z0.imag())) << "i, k = "
    << c.k << ", c-profile " << to_string(c.profile.kind()) << ".\n\n";
  s << "| quantity | value | error estimate |\n|---|---|---|\n";
  s << "| K | " << num(r.K.value) << " | " << num(r.K.error_estimate()) << " |\n";
  s << "| B | " << num(r.B.value) << " | " << num(r.B.error_estimate()) << " |\n";
  s << "| I(c) | " << num(r.I_c) << " | |\n";
  s << "| K / (I(c) pi B) | " << num(r.ratio) << " | " << num(r.ratio_error) << " |\n";
  if (r.has_route) {
    s << "| K, reduced route | " << num(r.K_reduced.value) << " | " << num(r.K_reduced.error_estimate()) << " |\n";
    s << "| B, reduced route | " << num(r.B_reduced.value) << " | " << num(r.B_reduced.error_estimate()) << " |\n";
    s << "| route gap (relative) | " << num(r.route_gap) << " | |\n";
  }
  if (o.monodromy_defect) s << "| F0 monodromy defect | " << num(*o.monodromy_defect) << " | |\n";
  s << "\nEquality conditions: phi + 2 psi shape " << yes(r.prediction.flags.phi_shape) << ", psi = p0 G "
    << yes(r.prediction.flags.psi_shape) << ", character " << yes(r.prediction.flags.character)
    << " (alpha_G = " << num(r.prediction.alpha_green) << ", alpha_u = " << num(r.prediction.alpha_u)
    << ", distance " << num(r.prediction.character_distance) << ").\n\n";
  s << "Equality expected: " << yes(r.prediction.expected) << ". tol_eq = " << num(r.tol_eq) << ".\n\n";
  s << "**Verdict: " << to_string(r.verdict) << "** (" << r.note << ")\n";
  return s.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidConfig("cannot write " + path.string());
  f << text;
}

struct SweepRange {
  double a = 0.0;
  double b = 0.0;
  int n = 1;

  double value(int i) const { return n == 1 ? a : a + (b - a) * i / (n - 1); }
};

inline SweepRange parse_range(const std::string& text) {
  SweepRange r;
  std::string parts[3];
  std::size_t start = 0;
  for (int i = 0; i < 3; ++i) {
    const auto colon = text.find(':', start);
    if ((i < 2) == (colon == std::string::npos)) throw InvalidConfig("--range must be a:b:n, got '" + text + "'");
    parts[i] = text.substr(start, i < 2 ? colon - start : std::string::npos);
    start = colon + 1;
  }
  try {
    std::size_t used = 0;
    r.a = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument("a");
    r.b = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("b");
    r.n = std::stoi(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("n");
  } catch (const std::logic_error&) {
    throw InvalidConfig("--range must be a:b:n, got '" + text + "'");
  }
  if (r.n < 1 || r.n > 10000) throw InvalidConfig("--range: n must lie in [1, 10000]");
  return r;
}

inline const std::vector<std::string>& sweep_params() {
  static const std::vector<std::string> names{"alpha_u", "delta", "m", "q", "z0", "p0", "aG", "epsilon"};
  return names;
}

/// Config with one parameter replaced; validation errors surface as
/// InvalidConfig / InvalidProfile.
inline WeightConfig with_param(WeightConfig c, const std::string& name, double v) {
  if (name == "alpha_u") {
    if (c.domain.is_disc()) throw InvalidConfig("alpha_u needs an annulus");
    c.phi.u = HarmonicFunctionRep(v, [&] {
      std::vector<cplx> coeffs;
      const int m = c.phi.u.truncation();
      for (int n = -m; n <= m; ++n) coeffs.push_back(c.phi.u.coefficient(n));
      return coeffs;
    }());
  } else if (name == "delta") {
    c.profile = CProfile::exp_delta(v);
  } else if (name == "m") {
    c.profile = CProfile::poly(v);
  } else if (name == "q") {
    if (c.domain.is_disc()) throw InvalidConfig("q needs an annulus");
    if (!(v > 0.0 && v < 1.0)) throw InvalidConfig("q must lie in (0, 1)");
    c.domain = DomainSpec::annulus(v);
  } else if (name == "z0") {
    c.z0 = cplx(v, c.z0.imag());
  } else if (name == "p0") {
    if (!(v > 0.0)) throw InvalidConfig("p0 must be positive");
    c.psi.p0 = v;
  } else if (name == "aG") {
    c.phi.a_green = v;
  } else if (name == "epsilon") {
    if (v < 0.0) throw InvalidConfig("epsilon must be nonnegative");
    c.psi.epsilon = v;
  } else {
    throw InvalidConfig("unknown sweep parameter '" + name + "'");
  }
  if (!c.domain.contains(c.z0)) throw InvalidConfig("z0 outside the domain");
  return c;
}

struct SweepRow {
  double param = 0.0;
  VerificationReport report;
  std::string status;  // empty when the row ran
  int code = exit_pass;
};

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream s;
  s << "param,K,B,I_c,ratio,character_distance,expected_equality,verdict\n";
  for (const auto& row : rows) {
    s << num(row.param) << ",";
    if (!row.status.empty()) {
      s << "nan,nan,nan,nan,nan,," << row.status << "\n";
      continue;
    }
    const auto& r = row.report;
    s << num(r.K.value) << "," << num(r.B.value) << "," << num(r.I_c) << "," << num(r.ratio) << ","
      << num(r.prediction.character_distance) << "," << (r.prediction.expected ? "true" : "false") << ","
      << to_string(r.verdict) << "\n";
  }
  return s.str();
}

inline std::vector<SweepRow> run_sweep(const Scenario& sc, const std::string& param, const SweepRange& range,
                                       unsigned threads) {
  std::vector<SweepRow> rows(range.n);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < range.n; i = next++) {
      SweepRow& row = rows[i];
      row.param = range.value(i);
      try {
        Scenario local = sc;
        local.config = with_param(sc.config, param, row.param);
        row.report = verify(WeightModel(local.config), local.run.verify);
        row.code = exit_code(row.report.verdict);
      } catch (const InvalidConfig& e) {
        row.status = "config_error";
        row.code = exit_config;
      } catch (const InvalidProfile& e) {
        row.status = "config_error";
        row.code = exit_config;
      } catch (const Error& e) {
        row.status = "error:" + std::string(e.name());
        row.code = exit_inconclusive;
      }
    }
  };
  const unsigned n = std::min<unsigned>(threads, static_cast<unsigned>(range.n));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

/// Overall code of a sweep: config error, then fail, then inconclusive.
inline int sweep_exit(const std::vector<SweepRow>& rows) {
  int code = exit_pass;
  auto rank = [](int c) { return c == exit_config ? 3 : c == exit_fail ? 2 : c == exit_inconclusive ? 1 : 0; };
  for (const auto& r : rows) {
    if (rank(r.code) > rank(code)) code = r.code;
  }
  return code;
}

/// Points of the requested curve: "boundary" walks the outer circle (then
/// the inner one on the annulus); "radial" crosses the domain along the ray
/// through z0 (the real axis when z0 = 0).
inline std::vector<cplx> curve_points(const WeightConfig& c, const std::string& curve, int n) {
  std::vector<cplx> pts;
  if (curve == "boundary") {
    for (int comp = 0; comp < c.domain.component_count(); ++comp) {
      for (int j = 0; j < n; ++j) pts.push_back(std::polar(c.domain.component_radius(comp), kTwoPi * j / n));
    }
  } else if (curve == "radial") {
    const double theta = std::abs(c.z0) > 0.0 ? std::arg(c.z0) : 0.0;
    const double lo = c.domain.is_disc() ? -1.0 : c.domain.inner_radius();
    for (int j = 0; j < n; ++j) pts.push_back(std::polar(1.0, theta) * (lo + (1.0 - lo) * (j + 0.5) / n));
  } else {
    throw InvalidConfig("--curve must be boundary or radial");
  }
  return pts;
}

inline std::string kernel_eval_csv(const Scenario& sc, const std::string& curve) {
  WeightConfig c = sc.config;
  c.k = 0;
  const auto pts = curve_points(c, curve, sc.run.curve_points);
  const auto problem = make_problem(WeightModel(c));
  const auto K = kernel_section(problem, KernelSide::szego, sc.run.verify.kernel);
  const auto B = kernel_section(problem, KernelSide::bergman, sc.run.verify.kernel);
  std::ostringstream s;
  s << "re_z,im_z,re_K,im_K,re_B,im_B\n";
  for (const cplx z : pts) {
    const cplx k = K.kernel_at(z);
    const cplx b = B.kernel_at(z);
    s << num(z.real()) << "," << num(z.imag()) << "," << num(k.real()) << "," << num(k.imag()) << "," << num(b.real())
      << "," << num(b.imag()) << "\n";
  }
  return s.str();
}

namespace detail {

/// Runs body and maps library errors onto exit codes.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const InvalidConfig& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const InvalidProfile& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const Error& e) {
    err << "numerical failure: " << e.name() << ": " << e.what() << "\n";
    return exit_inconclusive;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  }
}

inline std::filesystem::path out_dir(const Scenario& sc, const std::string& flag) {
  return flag.empty() ? std::filesystem::path(sc.run.output_dir) : std::filesystem::path(flag);
}

}  // namespace detail

inline int run_command(int argc, const char* const* argv, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  CLI::App app{"Weighted Bergman/Szego kernel gauge"};
  app.require_subcommand(1);
  std::string scenario_path;
  std::string out_flag;

  auto* verify_cmd = app.add_subcommand("verify", "check K >= I(c) pi B and the equality prediction");
  verify_cmd->add_option("scenario", scenario_path, "scenario JSON")->required();
  verify_cmd->add_option("--out", out_flag, "directory for report.csv and report.md");

  std::string param;
  std::string range_text;
  auto* sweep_cmd = app.add_subcommand("sweep", "verify over a parameter range");
  sweep_cmd->add_option("scenario", scenario_path, "scenario JSON")->required();
  sweep_cmd->add_option("--param", param, "alpha_u, delta, m, q, z0, p0, aG or epsilon")->required();
  sweep_cmd->add_option("--range", range_text, "a:b:n")->required();
  sweep_cmd->add_option("--out", out_flag, "directory for sweep.csv");

  std::string curve;
  auto* eval_cmd = app.add_subcommand("kernel-eval", "sample K(z, conj z0) and B(z, conj z0) along a curve");
  eval_cmd->add_option("scenario", scenario_path, "scenario JSON")->required();
  eval_cmd->add_option("--curve", curve, "boundary or radial")->required()->check(CLI::IsMember({"boundary", "radial"}));
  eval_cmd->add_option("--out", out_flag, "directory for kernel_<curve>.csv");

  auto* self_cmd = app.add_subcommand("selftest", "run the oracle suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_pass : exit_config;
  }

  if (*self_cmd) {
    const auto checks = run_selftest();
    int failed = 0;
    for (const auto& c : checks) {
      out << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : "  [" + c.detail + "]") << "\n";
      failed += c.passed ? 0 : 1;
    }
    out << "selftest: " << checks.size() - failed << "/" << checks.size() << " passed\n";
    return failed == 0 ? exit_pass : exit_fail;
  }

  return detail::guarded(err, [&]() -> int {
    const Scenario sc = load_scenario(scenario_path);
    const auto dir = detail::out_dir(sc, out_flag);
    if (*verify_cmd) {
      const auto outcome = run_verify(sc);
      const std::string md = report_md(sc, outcome);
      write_file(dir / "report.csv", report_csv(sc, outcome));
      write_file(dir / "report.md", md);
      out << md;
      return exit_code(outcome.report.verdict);
    }
    if (*sweep_cmd) {
      if (std::find(sweep_params().begin(), sweep_params().end(), param) == sweep_params().end()) {
        throw InvalidConfig("unknown sweep parameter '" + param + "'");
      }
      const auto rows = run_sweep(sc, param, parse_range(range_text), thread_cap());
      const std::string csv = sweep_csv(rows);
      write_file(dir / "sweep.csv", csv);
      out << csv;
      return sweep_exit(rows);
    }
    const std::string csv = kernel_eval_csv(sc, curve);
    write_file(dir / ("kernel_" + curve + ".csv"), csv);
    out << csv;
    return exit_pass;
  });
}

}  // namespace kernelgauge
