#include <cmath>

#include "doctest.h"
#include "mfs/evp.hpp"
#include "mfs/exact.hpp"
#include "mfs/gdfp.hpp"
#include "mfs/random.hpp"
#include "oracles.hpp"

using namespace mfs;

namespace {

const SpacePtr kIsing = StateSpace::make({{1.0}, {-1.0}}, {0.5, 0.5});

Interaction ising(double s) { return Interaction(kIsing, 2, oracle::ising_table(s)); }

DiscreteMeasure with_mean(double m) { return DiscreteMeasure(kIsing, {(1 + m) / 2, (1 - m) / 2}); }

double mean(const DiscreteMeasure& mu) { return mu[0] - mu[1]; }

}  // namespace

TEST_CASE("g examples") {
  const auto af = ising(-4);
  CHECK(g(DiscreteMeasure::reference(kIsing), af) == 2.0);
  CHECK(g(DiscreteMeasure::dirac(kIsing, 0), af) == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
  const auto s3 = StateSpace::make({0.2, 0.3, 0.5});
  const Interaction phi(s3, 3, oracle::random_symmetric_table(3, 3, 1));
  CHECK(g(DiscreteMeasure::reference(s3), phi) == doctest::Approx(-phi.compat()).epsilon(1e-15));
  CHECK(g(DiscreteMeasure::reference(kIsing), Interaction(kIsing, 2, {kInf, 0, 0, 0})) == -kInf);
}

TEST_CASE("sc_map examples") {
  const auto a = DiscreteMeasure::reference(kIsing);
  CHECK(sup_distance(sc_map(a, ising(-4)).weights(), a.weights()) == 0.0);
  for (double m : {-0.8, -0.1, 0.3, 0.99}) {
    CHECK(mean(sc_map(with_mean(m), ising(4))) == doctest::Approx(std::tanh(4 * m)).epsilon(1e-14));
  }
  const Interaction zero(kIsing, 2, std::vector<double>(4, 0.0));
  CHECK(sc_map(with_mean(0.7), zero)[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sc_residual(a, ising(-4)) == 0.0);
}

TEST_CASE("property: grad_g matches centered differences") {
  Rng rng(31);
  const auto s = StateSpace::make({0.1, 0.2, 0.3, 0.4});
  const Interaction phi(s, 2, oracle::random_symmetric_table(4, 2, 3));
  for (int i = 0; i < 20; ++i) {
    const auto mu = random_interior_measure(s, rng);
    const auto d = random_zero_sum(4, rng);
    const auto grad = grad_g(mu, phi);
    double analytic = 0;
    for (std::size_t k = 0; k < 4; ++k) analytic += grad[k] * d[k];
    const double h = 1e-6;
    std::vector<double> p(4), q(4);
    for (std::size_t k = 0; k < 4; ++k) {
      p[k] = mu[k] + h * d[k];
      q[k] = mu[k] - h * d[k];
    }
    const double fd = (g(DiscreteMeasure(s, p), phi) - g(DiscreteMeasure(s, q), phi)) / (2 * h);
    CHECK(std::abs(fd - analytic) <= 1e-6 * (1 + std::abs(analytic)));
  }
}

TEST_CASE("solve: antiferro has the unique maximizer alpha") {
  const auto sol = solve_self_consistent(ising(-4));
  CHECK(sol.fixed_points.size() == 1);
  CHECK(sol.value == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(std::abs(mean(sol.maximizer)) <= 1e-10);
  CHECK(sol.failures.empty());
  CHECK(sol.c_star == doctest::Approx(-4.0).epsilon(1e-13));
}

TEST_CASE("solve: ferro reports three fixed points") {
  const auto sol = solve_self_consistent(ising(4));
  REQUIRE(sol.fixed_points.size() == 3);
  const double ms = oracle::ising_m_star();
  const double best = oracle::entropy({(1 + ms) / 2, (1 - ms) / 2}, {0.5, 0.5}) - (2 - 2 * ms * ms);
  CHECK(sol.value == doctest::Approx(best).epsilon(1e-12));
  CHECK(sol.value == doctest::Approx(-0.69281).epsilon(1e-5));
  CHECK(std::abs(std::abs(mean(sol.fixed_points[0].mu)) - ms) <= 1e-8);
  CHECK(std::abs(std::abs(mean(sol.fixed_points[1].mu)) - ms) <= 1e-8);
  CHECK(mean(sol.fixed_points[0].mu) * mean(sol.fixed_points[1].mu) < 0);
  CHECK(std::abs(mean(sol.fixed_points[2].mu)) <= 1e-10);
  CHECK(sol.fixed_points[2].value == doctest::Approx(-2.0).epsilon(1e-12));
  // agrees with the EVP concave-case value
  CHECK(std::abs(sol.value - minimize_g_tilde(ising(4)).value) <= 1e-6);
}

TEST_CASE("property: label negation maps ferro fixed points to fixed points") {
  const auto sol = solve_self_consistent(ising(4));
  for (const auto& fp : sol.fixed_points) {
    const DiscreteMeasure flipped(kIsing, {fp.mu[1], fp.mu[0]});
    CHECK(sc_residual(flipped, ising(4)) <= 1e-12);
    CHECK(g(flipped, ising(4)) == doctest::Approx(fp.value).epsilon(1e-13));
  }
}

TEST_CASE("property: stationarity at the fixed point") {
  const auto s = StateSpace::make({0.1, 0.2, 0.3, 0.4});
  const Interaction phi(s, 2, oracle::random_symmetric_table(4, 2, 3));
  const auto sol = solve_self_consistent(phi);
  const auto grad = project_zero_sum(grad_g(sol.maximizer, phi));
  for (double v : grad) CHECK(std::abs(v) <= 1e-10);
}

TEST_CASE("property: variational lower bound g(mu) <= p(N)") {
  Rng rng(32);
  const auto af = ising(-4);
  for (std::size_t N = 2; N <= 8; ++N) {
    const double p = pressure(N, af, HamiltonianKind::Standard);
    for (int i = 0; i < 20; ++i) CHECK(g(random_interior_measure(kIsing, rng), af) <= p + 1e-12);
  }
}

TEST_CASE("strong couplings need damping") {
  const Interaction hardcore(kIsing, 2, {100, -4, -4, 100});
  const auto sol = solve_self_consistent(hardcore);
  CHECK(sol.value == doctest::Approx(-48.0).epsilon(1e-13));
  CHECK(sol.damping < 0.5);
  CHECK(sol.failures.empty());
}

TEST_CASE("tilted Ising has a positive-mean maximizer") {
  const double h = 0.3;
  const auto s = StateSpace::make({{1.0}, {-1.0}}, {std::exp(h) / (2 * std::cosh(h)), std::exp(-h) / (2 * std::cosh(h))});
  const auto sol = solve_self_consistent(Interaction(s, 2, oracle::ising_table(4)));
  CHECK(mean(sol.maximizer) > 0);
}

TEST_CASE("option validation and determinism") {
  GdfpOptions bad;
  bad.damping = 0;
  CHECK_THROWS(solve_self_consistent(ising(4), bad));
  bad.damping = 1.5;
  CHECK_THROWS(solve_self_consistent(ising(4), bad));
  GdfpOptions neg;
  neg.cap = -1.0;
  CHECK_THROWS(solve_self_consistent(ising(4), neg));
  const auto a = solve_self_consistent(ising(4)), b = solve_self_consistent(ising(4));
  CHECK(a.value == b.value);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("regularity report") {
  const auto af = ising(-4);
  const auto r = regularity_report(solve_self_consistent(af), af);
  CHECK(r.ok);
  CHECK(r.c_star == doctest::Approx(-4.0).epsilon(1e-13));
  CHECK(r.lower == -6.0);
  CHECK(r.upper == -4.0);
  CHECK(std::abs(r.c_star - r.upper) <= 1e-10);
  CHECK(r.density_ratio == doctest::Approx(1.0));
  CHECK(r.density_bound == doctest::Approx(std::exp(4.0)));
  CHECK(r.el1_residual <= 1e-10);

  const Interaction zero(kIsing, 2, std::vector<double>(4, 0.0));
  const auto z = regularity_report(solve_self_consistent(zero), zero);
  CHECK(z.ok);
  CHECK(z.c_star == 0.0);
  CHECK(z.lower == 0.0);
  CHECK(z.upper == 0.0);
  CHECK_THROWS(regularity_report(solve_self_consistent(ising(4)), ising(4)));
}
