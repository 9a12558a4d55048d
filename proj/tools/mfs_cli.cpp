// mfs: pressures of mean-field spin systems by exact enumeration, EVP and GdFP.
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mfs/duality.hpp"
#include "mfs/evp.hpp"
#include "mfs/exact.hpp"
#include "mfs/gdfp.hpp"
#include "mfs/models.hpp"
#include "mfs/report.hpp"
#include "mfs/verify.hpp"

namespace {

using nlohmann::json;

enum Exit : int {
  kOk = 0,
  kCheckFailed = 1,
  kCapExceeded = 2,
  kInvalidModel = 3,
  kInvalidInput = 4,
  kOptimizerFailure = 5,
};

struct Failure {
  int code;
  std::string message;
};

struct RunConfig {
  std::string model;
  std::string range = "1..12";
  std::string principle = "both";
  std::string suite = "all";
  std::optional<double> cap;
  double tol = 1e-6;
  std::size_t restarts = 8;
  double damping = 0.5;
  std::uint64_t seed = 0;
  std::string out;
  std::string format;
  std::string plot;
  bool verbose = false;
};

struct Range {
  std::size_t lo, hi;
};

Range parse_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw Failure{kInvalidInput, "--n expects A..B, got '" + text + "'"};
  auto number = [&](const std::string& s) -> std::size_t {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw Failure{kInvalidInput, "--n: '" + s + "' is not a non-negative integer"};
    }
    return std::stoull(s);
  };
  Range r{number(text.substr(0, dots)), number(text.substr(dots + 2))};
  if (r.lo < 1 || r.lo > r.hi) throw Failure{kInvalidInput, "--n: empty range '" + text + "'"};
  return r;
}

std::uint64_t occupancy_cap() {
  const char* env = std::getenv("MFS_OCCUPANCY_CAP");
  if (!env) return mfs::kDefaultOccupancyCap;
  const std::string s(env);
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw Failure{kInvalidInput, "MFS_OCCUPANCY_CAP must be a positive integer"};
  }
  const auto v = std::stoull(s);
  if (v == 0) throw Failure{kInvalidInput, "MFS_OCCUPANCY_CAP must be a positive integer"};
  return v;
}

mfs::Model load_model(const std::string& source) {
  try {
    return mfs::build(mfs::load_spec(source));
  } catch (const std::exception& e) {
    throw Failure{kInvalidModel, std::string("invalid model: ") + e.what()};
  }
}

std::string resolve_format(const RunConfig& cfg, bool csv_allowed) {
  std::string f = cfg.format;
  if (f.empty()) f = csv_allowed && cfg.out.size() >= 4 && cfg.out.ends_with(".csv") ? "csv" : "json";
  if (f == "csv" && !csv_allowed) throw Failure{kInvalidInput, "--format csv is only available for pressure"};
  return f;
}

std::string with_metadata(json doc, const std::string& command) {
  doc["metadata"] = {{"generated_at", mfs::utc_timestamp()}, {"command", command}};
  return doc.dump(2) + "\n";
}

void emit(const RunConfig& cfg, const std::string& contents) {
  if (cfg.out.empty()) std::cout << contents;
  else mfs::write_atomic(cfg.out, contents);
}

void log(const RunConfig& cfg, const std::string& msg) {
  if (cfg.verbose) std::clog << "mfs: " << msg << '\n';
}

std::string trace_path(const RunConfig& cfg) { return (cfg.out.empty() ? std::string("mfs") : cfg.out) + ".trace.csv"; }

int cmd_pressure(const RunConfig& cfg) {
  const auto range = parse_range(cfg.range);
  const auto format = resolve_format(cfg, true);
  const auto cap = occupancy_cap();
  const auto model = load_model(cfg.model);
  log(cfg, "pressure table N = " + std::to_string(range.lo) + ".." + std::to_string(range.hi));
  const auto table = mfs::pressure_table(model.phi, range.lo, range.hi, model.name, cap);

  emit(cfg, format == "csv" ? mfs::to_csv(table) : with_metadata(mfs::to_json(table), "pressure"));
  if (!cfg.plot.empty()) {
    std::vector<std::pair<double, double>> p, pt;
    for (const auto& r : table.rows) {
      if (r.p) p.emplace_back(static_cast<double>(r.n), *r.p);
      pt.emplace_back(static_cast<double>(r.n), r.p_tilde);
    }
    mfs::write_atomic(cfg.plot + ".p.csv", mfs::xy_csv("N", "p", p));
    mfs::write_atomic(cfg.plot + ".p_tilde.csv", mfs::xy_csv("N", "p_tilde", pt));
  }
  bool ok = true;
  for (const auto& r : table.rows) ok = ok && r.bound_ok;
  return ok ? kOk : kCheckFailed;
}

// Richardson-style fit over N = 8, 16, ... while enumeration stays cheap.
std::optional<double> extrapolated_pressure(const mfs::Interaction& phi, std::uint64_t cap) {
  constexpr std::uint64_t kBudget = 200'000;
  std::vector<std::size_t> ns;
  std::vector<double> ps;
  for (std::size_t n = 8; n <= 4096; n *= 2) {
    if (n < phi.bodies()) continue;
    if (mfs::occupancy_count(phi.sites(), n) > std::min(kBudget, cap)) break;
    ns.push_back(n);
    ps.push_back(mfs::pressure(n, phi, mfs::HamiltonianKind::Standard, cap));
  }
  if (ns.size() < 4) return std::nullopt;
  return mfs::extrapolate_pressure(ns, ps).limit;
}

json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

int cmd_solve(const RunConfig& cfg) {
  if (cfg.principle != "evp" && cfg.principle != "gdfp" && cfg.principle != "both") {
    throw Failure{kInvalidInput, "--principle must be evp, gdfp or both"};
  }
  if (!(cfg.tol > 0.0)) throw Failure{kInvalidInput, "--tol must be positive"};
  if (!(cfg.damping > 0.0 && cfg.damping <= 1.0)) throw Failure{kInvalidInput, "--damping must lie in (0, 1]"};
  if (cfg.cap && !(*cfg.cap >= 0.0)) throw Failure{kInvalidInput, "--cap must be >= 0"};
  resolve_format(cfg, false);
  const auto cap = occupancy_cap();
  const auto model = load_model(cfg.model);
  const bool want_evp = cfg.principle != "gdfp";
  const bool want_gdfp = cfg.principle != "evp";

  json doc = {{"schema_version", mfs::kSchemaVersion}, {"model", model.name}, {"principle", cfg.principle}};
  std::optional<double> evp_value, gdfp_value;

  if (want_evp) {
    if (!model.phi.finite() && !cfg.cap) {
      throw Failure{kInvalidInput, "evp needs a finite table; pass --cap for the constrained problem"};
    }
    mfs::EvpOptions opts;
    opts.restarts = cfg.restarts;
    opts.seed = cfg.seed;
    std::optional<mfs::EvpSolution> sol;
    try {
      sol = cfg.cap ? mfs::constrained_inf_g_tilde(model.phi, *cfg.cap, opts) : mfs::minimize_g_tilde(model.phi, opts);
    } catch (const std::domain_error& e) {
      throw Failure{kInvalidInput, e.what()};
    } catch (const std::invalid_argument& e) {
      throw Failure{kInvalidModel, e.what()};
    }
    log(cfg, "evp value " + std::to_string(sol->value));
    if (!cfg.plot.empty()) {
      std::vector<std::pair<double, double>> rows;
      for (std::size_t i = 0; i < sol->trace.size(); ++i) rows.emplace_back(static_cast<double>(i), sol->trace[i]);
      mfs::write_atomic(cfg.plot + ".evp_trace.csv", mfs::xy_csv("iteration", "stationarity", rows));
    }
    if (!sol->converged) {
      std::vector<std::pair<double, double>> rows;
      for (std::size_t i = 0; i < sol->trace.size(); ++i) rows.emplace_back(static_cast<double>(i), sol->trace[i]);
      const auto path = trace_path(cfg);
      mfs::write_atomic(path, mfs::xy_csv("iteration", "stationarity", rows));
      throw Failure{kOptimizerFailure, "evp optimizer did not converge; trace written to " + path};
    }
    evp_value = sol->value;
    doc["evp"] = mfs::to_json(*sol);
  }

  if (want_gdfp) {
    mfs::GdfpOptions opts;
    opts.damping = cfg.damping;
    opts.restarts = cfg.restarts;
    opts.seed = cfg.seed;
    opts.cap = cfg.cap;
    try {
      const auto sol = mfs::solve_self_consistent(model.phi, opts);
      log(cfg, "gdfp value " + std::to_string(sol.value));
      gdfp_value = sol.value;
      doc["gdfp"] = mfs::to_json(sol);
    } catch (const std::invalid_argument& e) {
      throw Failure{kInvalidInput, e.what()};
    } catch (const std::exception& e) {
      const auto path = trace_path(cfg);
      mfs::write_atomic(path, std::string("failure\n") + e.what() + "\n");
      throw Failure{kOptimizerFailure, std::string("gdfp solver failed; trace written to ") + path};
    }
  }

  int code = kOk;
  if (want_evp && want_gdfp) {
    const double disagreement = std::abs(*evp_value - *gdfp_value);
    std::optional<double> extrapolated;
    try {
      extrapolated = extrapolated_pressure(model.phi, cap);
    } catch (const std::exception& e) {
      log(cfg, std::string("extrapolation skipped: ") + e.what());
    }
    json cross = {{"evp_value", number(*evp_value)},
                  {"gdfp_value", number(*gdfp_value)},
                  {"extrapolated_p", extrapolated ? number(*extrapolated) : json(nullptr)},
                  {"max_abs_disagreement", number(disagreement)},
                  {"tolerance", cfg.tol}};
    cross["extrapolation_gap"] = extrapolated ? number(std::abs(*extrapolated - *gdfp_value)) : json(nullptr);
    cross["ok"] = disagreement <= cfg.tol;
    doc["cross_check"] = std::move(cross);
    if (!(disagreement <= cfg.tol)) code = kCheckFailed;
  }
  emit(cfg, with_metadata(std::move(doc), "solve"));
  return code;
}

int cmd_verify(const RunConfig& cfg, bool range_given) {
  if (cfg.suite != "all" && std::find(mfs::kSuites.begin(), mfs::kSuites.end(), cfg.suite) == mfs::kSuites.end()) {
    throw Failure{kInvalidInput, "unknown suite '" + cfg.suite + "'"};
  }
  resolve_format(cfg, false);
  mfs::VerifyOptions opts;
  if (range_given) opts.n_max = parse_range(cfg.range).hi;
  if (cfg.cap) {
    if (!(*cfg.cap >= 0.0)) throw Failure{kInvalidInput, "--cap must be >= 0"};
    opts.cap = *cfg.cap;
  }
  opts.seed = cfg.seed;
  opts.occupancy_cap = occupancy_cap();
  const auto model = load_model(cfg.model);
  const auto report = mfs::run_verify(model, cfg.suite, opts);
  for (const auto& c : report.checks) {
    log(cfg, c.suite + "/" + c.name + (c.ok ? " ok" : " FAILED"));
  }
  json doc = mfs::to_json(report);
  doc["model"] = model.name;
  doc["suite"] = cfg.suite;
  emit(cfg, with_metadata(std::move(doc), "verify"));
  return report.ok() ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pressure of mean-field spin systems: exact, EVP and GdFP"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--model", cfg.model, "builtin:<id>, file:<path> or a path")->required();
    sub->add_option("--seed", cfg.seed, "Seed for randomized starts and probes");
    sub->add_option("--out", cfg.out, "Output file (stdout when omitted)");
    sub->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_flag("-v,--verbose", cfg.verbose, "Progress on stderr");
  };

  auto* pressure = app.add_subcommand("pressure", "Exact p(N) and p~(N) over a range of N");
  common(pressure);
  pressure->add_option("--n", cfg.range, "N range A..B");
  pressure->add_option("--plot", cfg.plot, "Prefix for (N, value) curve files");

  auto* solve = app.add_subcommand("solve", "Infinite-volume pressure by EVP and/or GdFP");
  common(solve);
  solve->add_option("--principle", cfg.principle, "evp, gdfp or both");
  solve->add_option("--cap", cfg.cap, "Density cap exponent C (constrained problem)");
  solve->add_option("--tol", cfg.tol, "Allowed |evp - gdfp| for --principle both");
  solve->add_option("--restarts", cfg.restarts, "Random restarts");
  solve->add_option("--damping", cfg.damping, "Initial fixed-point damping");
  solve->add_option("--plot", cfg.plot, "Prefix for the EVP convergence curve");

  auto* verify = app.add_subcommand("verify", "Run invariant suites");
  common(verify);
  verify->add_option("--suite", cfg.suite, "additivity, bounds, entropy, cavity, duality or all");
  verify->add_option("--cap", cfg.cap, "Density cap exponent for the duality audit");
  auto* verify_range = verify->add_option("--n", cfg.range, "Largest N from A..B");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalidInput;
  }

  try {
    if (*pressure) return cmd_pressure(cfg);
    if (*solve) return cmd_solve(cfg);
    return cmd_verify(cfg, verify_range->count() > 0);
  } catch (const Failure& f) {
    std::cerr << "mfs: " << f.message << '\n';
    return f.code;
  } catch (const mfs::CapExceeded& e) {
    std::cerr << "mfs: " << e.what() << '\n';
    return kCapExceeded;
  } catch (const mfs::ModelError& e) {
    std::cerr << "mfs: invalid model: " << e.what() << '\n';
    return kInvalidModel;
  } catch (const std::exception& e) {
    std::cerr << "mfs: " << e.what() << '\n';
    return kInvalidInput;
  }
}
