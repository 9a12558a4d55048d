#include "mfs/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mfs {

namespace {

using nlohmann::json;

json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json weights(const DiscreteMeasure& mu) { return std::vector<double>(mu.weights().begin(), mu.weights().end()); }

json means(const DiscreteMeasure& mu) {
  if (!mu.space()->has_coordinates()) return nullptr;
  std::vector<double> out(mu.space()->dim(), 0.0);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += mu[i] * mu.space()->points()[i][k];
  }
  if (out.size() == 1) return out[0];
  return out;
}

std::string format(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

json to_json(const PressureTable& table) {
  json rows = json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"N", r.n},
                    {"p", r.p ? number(*r.p) : json(nullptr)},
                    {"p_tilde", number(r.p_tilde)},
                    {"bound", number(r.bound)},
                    {"bound_ok", r.bound_ok}});
  }
  return {{"schema_version", kSchemaVersion}, {"model", table.model}, {"rows", std::move(rows)}};
}

std::string to_csv(const PressureTable& table) {
  std::ostringstream out;
  out << "N,p,p_tilde,bound,bound_ok\n";
  for (const auto& r : table.rows) {
    out << r.n << ',' << (r.p ? format(*r.p) : "") << ',' << format(r.p_tilde) << ',' << format(r.bound) << ','
        << (r.bound_ok ? "true" : "false") << '\n';
  }
  return out.str();
}

json to_json(const EvpSolution& sol) {
  json optima = json::array();
  for (const auto& o : sol.optima) {
    optima.push_back({{"value", number(o.value)}, {"weights", weights(o.point)}, {"mean", means(o.point)},
                      {"stationarity_norm", number(o.stationarity)}});
  }
  json out = {{"schema_version", kSchemaVersion},
              {"value", number(sol.value)},
              {"minimizer", weights(sol.minimizer)},
              {"mean", means(sol.minimizer)},
              {"sense", sol.maximize ? "max" : "min"},
              {"iterations", sol.iterations},
              {"restarts", sol.restarts},
              {"shape", to_string(sol.shape)},
              {"stationarity_norm", number(sol.stationarity)},
              {"converged", sol.converged},
              {"optima", std::move(optima)}};
  out["cap"] = sol.cap ? number(*sol.cap) : json(nullptr);
  return out;
}

json to_json(const GdfpSolution& sol) {
  json points = json::array();
  for (const auto& p : sol.fixed_points) {
    points.push_back({{"value", number(p.value)}, {"weights", weights(p.mu)}, {"mean", means(p.mu)},
                      {"residual", number(p.residual)}});
  }
  json out = {{"schema_version", kSchemaVersion},
              {"value", number(sol.value)},
              {"weights", weights(sol.maximizer)},
              {"mean", means(sol.maximizer)},
              {"c_star", number(sol.c_star)},
              {"residual", number(sol.residual)},
              {"damping", sol.damping},
              {"restarts", sol.restarts},
              {"iterations", sol.iterations},
              {"fixed_point_count", sol.fixed_points.size()},
              {"fixed_points", std::move(points)},
              {"failures", sol.failures}};
  out["cap"] = sol.cap ? number(*sol.cap) : json(nullptr);
  return out;
}

json to_json(const SaddleAudit& a) {
  return {{"schema_version", kSchemaVersion},
          {"cap", number(a.cap)},
          {"maxmin", number(a.maxmin)},
          {"minmax", number(a.minmax)},
          {"gap", number(a.gap)},
          {"evp_capped_value", number(a.evp_capped_value)},
          {"saddle_candidate", weights(a.mu)},
          {"mu_partial_gap", number(a.mu_partial_gap)},
          {"nu_partial_gap", number(a.nu_partial_gap)},
          {"maxmin_iterations", a.maxmin_iterations},
          {"minmax_iterations", a.minmax_iterations},
          {"minmax_stationarity", number(a.minmax_stationarity)},
          {"converged", a.converged},
          {"ok", a.ok}};
}

json to_json(const VerifyReport& report) {
  json checks = json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"suite", c.suite}, {"name", c.name}, {"ok", c.ok}, {"worst", number(c.worst)},
                      {"tolerance", number(c.tolerance)}, {"probes", c.probes}, {"detail", c.detail}});
  }
  return {{"schema_version", kSchemaVersion}, {"ok", report.ok()}, {"checks", std::move(checks)},
          {"skipped", report.skipped}};
}

std::string xy_csv(const std::string& x_name, const std::string& y_name,
                   const std::vector<std::pair<double, double>>& rows) {
  std::ostringstream out;
  out << x_name << ',' << y_name << '\n';
  for (const auto& [x, y] : rows) out << format(x) << ',' << format(y) << '\n';
  return out.str();
}

void write_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << contents;
    if (!out.flush()) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace mfs
