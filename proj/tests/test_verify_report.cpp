#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mfs/report.hpp"
#include "mfs/verify.hpp"

using namespace mfs;
using nlohmann::json;

TEST_CASE("all suites pass on the builtin models") {
  for (const char* id : {"ising-af", "ising-f", "hardcore", "free"}) {
    const auto model = build(builtin_spec(id));
    const auto report = run_verify(model, "all");
    CHECK_MESSAGE(report.ok(), id);
    for (const auto& c : report.checks) {
      CHECK_MESSAGE(c.ok, id << " " << c.suite << "/" << c.name << " worst " << c.worst << " " << c.detail);
      CHECK(c.probes > 0);
    }
  }
}

TEST_CASE("suites are selectable and validated") {
  const auto model = build(builtin_spec("ising-af"));
  for (const auto& s : kSuites) {
    const auto report = run_verify(model, s);
    REQUIRE_FALSE(report.checks.empty());
    for (const auto& c : report.checks) CHECK(c.suite == s);
  }
  CHECK_THROWS_AS(run_verify(model, "astrology"), std::invalid_argument);
  // the concave model skips the saddle audit and says so
  const auto f = run_verify(build(builtin_spec("ising-f")), "duality");
  CHECK_FALSE(f.skipped.empty());
}

TEST_CASE("symmetrize produces an exchangeable measure") {
  const auto rho = symmetrize(random_dense_measure(StateSpace::uniform(3), 3, 5));
  for (std::size_t c = 0; c < rho.configurations(); ++c) {
    auto t = rho.decode(c);
    std::swap(t[0], t[2]);
    CHECK(rho[(t[0] * 3 + t[1]) * 3 + t[2]] == doctest::Approx(rho[c]).epsilon(1e-14));
  }
}

TEST_CASE("json and csv encodings") {
  const auto model = build(builtin_spec("ising-af"));
  const auto table = pressure_table(model.phi, 1, 3, "ising-af");
  const auto j = to_json(table);
  CHECK(j["schema_version"] == 1);
  CHECK(j["rows"][0]["p"].is_null());
  CHECK(j["rows"][1]["p"].get<double>() == table.rows[1].p.value());
  const auto csv = to_csv(table);
  std::istringstream in(csv);
  std::string header, first, second;
  std::getline(in, header);
  std::getline(in, first);
  std::getline(in, second);
  CHECK(header == "N,p,p_tilde,bound,bound_ok");
  CHECK(first == "1,,0,8,true");
  // %.17g round-trips doubles exactly
  CHECK(std::stod(second.substr(2, second.find(',', 2) - 2)) == table.rows[1].p.value());

  const Interaction hard(model.space, 2, {kInf, 0, 0, 0});
  CHECK(to_json(pressure_table(hard, 2, 2))["rows"][0]["bound"] == "inf");
  CHECK(to_json(run_verify(model, "bounds"))["ok"] == true);
  CHECK(xy_csv("x", "y", {{1, 2.5}}) == "x,y\n1,2.5\n");
}

TEST_CASE("atomic writes replace the target") {
  const std::string path = "test_verify_report_out.txt";
  write_atomic(path, "first");
  write_atomic(path, "second");
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text == "second");
  std::remove(path.c_str());
  CHECK_THROWS(write_atomic("no-such-dir/x.txt", "x"));
  CHECK(utc_timestamp().size() == 20);
}
