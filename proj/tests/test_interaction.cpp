#include <cmath>

#include "doctest.h"
#include "mfs/interaction.hpp"
#include "mfs/random.hpp"
#include "oracles.hpp"

using namespace mfs;

namespace {

const SpacePtr kIsing = StateSpace::make({{1.0}, {-1.0}}, {0.5, 0.5});

Interaction antiferro() { return Interaction(kIsing, 2, oracle::ising_table(-4.0)); }

DiscreteMeasure with_mean(double m) { return DiscreteMeasure(kIsing, {(1 + m) / 2, (1 - m) / 2}); }

}  // namespace

TEST_CASE("construction rejects asymmetric, NaN and -inf tables") {
  CHECK_THROWS(Interaction(kIsing, 2, {0, 1, 2, 0}));
  CHECK_THROWS(Interaction(kIsing, 2, {0, NAN, NAN, 0}));
  CHECK_THROWS(Interaction(kIsing, 2, {-kInf, 0, 0, 0}));
  CHECK_THROWS(Interaction(kIsing, 2, {0, 0, 0}));
  CHECK_THROWS(Interaction(kIsing, 5, std::vector<double>(32, 0.0)));
  const Interaction hard(kIsing, 2, {kInf, 0, 0, 0});
  CHECK_FALSE(hard.finite());
  CHECK(hard.compat() == kInf);
  CHECK(hard.sup_norm() == kInf);
  CHECK(hard.lower_bound() == 0.0);
}

TEST_CASE("constants of the antiferro table") {
  const auto phi = antiferro();
  CHECK(phi.compat() == -2.0);
  CHECK(phi.lower_bound() == -4.0);
  CHECK(phi.sup_norm() == 4.0);
  const std::size_t t[] = {0, 1};
  CHECK(phi.at(t) == -4.0);
}

TEST_CASE("Phi examples") {
  const auto phi = antiferro();
  CHECK(Phi(DiscreteMeasure::reference(kIsing), phi) == -2.0);
  CHECK(Phi(DiscreteMeasure::dirac(kIsing, 0), phi) == 0.0);
  CHECK(Phi(DiscreteMeasure(kIsing, {0.75, 0.25}), phi) == doctest::Approx(-1.5).epsilon(1e-15));
  for (double m : {-0.9, -0.3, 0.2, 0.7}) CHECK(Phi(with_mean(m), phi) == doctest::Approx(2 * m * m - 2).epsilon(1e-14));
}

TEST_CASE("Phi1 examples") {
  const auto phi = antiferro();
  const auto a = DiscreteMeasure::reference(kIsing);
  CHECK(Phi1(a, DiscreteMeasure::dirac(kIsing, 0), phi) == -4.0);
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto nu = random_interior_measure(kIsing, rng);
    CHECK(Phi1(nu, nu, phi) == doctest::Approx(2.0 * Phi(nu, phi)).epsilon(1e-14));
  }
  const auto field = one_body_field(a, phi);
  CHECK(field == std::vector<double>{-4.0, -4.0});
}

TEST_CASE("Phi2 examples") {
  const auto phi = antiferro();
  const double d[] = {1.0, -1.0};
  CHECK(Phi2(DiscreteMeasure::reference(kIsing), d, phi) == 16.0);
  CHECK(Phi2(DiscreteMeasure(kIsing, {0.9, 0.1}), d, phi) == 16.0);

  const auto s3 = StateSpace::uniform(3);
  const Interaction constant(s3, 3, std::vector<double>(27, 2.5));
  Rng rng(1);
  for (int i = 0; i < 10; ++i) {
    const auto mu = random_zero_sum(3, rng);
    CHECK(std::abs(Phi2(random_interior_measure(s3, rng), mu, constant)) < 1e-12);
  }
  const Interaction hard(kIsing, 2, {kInf, 0, 0, 0});
  CHECK_THROWS(Phi2(DiscreteMeasure::reference(kIsing), d, hard));
}

TEST_CASE("Phi matches the naive tuple sum for n = 2, 3, 4") {
  for (std::size_t n : {2u, 3u, 4u}) {
    const std::size_t m = 3;
    const auto table = oracle::random_symmetric_table(m, n, 100 + n);
    const auto s = StateSpace::make({0.2, 0.3, 0.5});
    const Interaction phi(s, n, table);
    Rng rng(n);
    for (int i = 0; i < 10; ++i) {
      const auto nu = random_interior_measure(s, rng);
      const std::vector<double> w(nu.weights().begin(), nu.weights().end());
      CHECK(Phi(nu, phi) == doctest::Approx(oracle::Phi(table, m, n, w)).epsilon(1e-13));
    }
    CHECK(phi.compat() == doctest::Approx(oracle::Phi(table, m, n, {0.2, 0.3, 0.5})).epsilon(1e-13));
  }
}

TEST_CASE("+inf semantics in contractions") {
  const Interaction hard(kIsing, 2, {kInf, 0, 0, 0});
  CHECK(Phi(DiscreteMeasure::dirac(kIsing, 1), hard) == 0.0);
  CHECK(Phi(DiscreteMeasure::reference(kIsing), hard) == kInf);
  const auto field = one_body_field(DiscreteMeasure::dirac(kIsing, 1), hard);
  CHECK(field[0] == 0.0);
  CHECK(field[1] == 0.0);
  const double signed_dir[] = {1.0, -1.0};
  CHECK_THROWS(Phi1(DiscreteMeasure::reference(kIsing), signed_dir, hard));
}

TEST_CASE("symmetrization") {
  const auto s = StateSpace::uniform(2);
  const auto sym = symmetrize_table(std::vector<double>{0, 1, 3, 0}, 2, 2);
  CHECK(sym == std::vector<double>{0, 2, 2, 0});
  // idempotent, bit for bit
  for (std::size_t n : {2u, 3u}) {
    const auto t = oracle::random_symmetric_table(3, n, 9);
    CHECK(symmetrize_table(t, 3, n) == t);
    CHECK(symmetrize_table(symmetrize_table(t, 3, n), 3, n) == symmetrize_table(t, 3, n));
  }
  const auto inf = symmetrize_table(std::vector<double>{0, kInf, 1, 0}, 2, 2);
  CHECK(inf[1] == kInf);
  CHECK(inf[2] == kInf);
  CHECK_NOTHROW(Interaction::symmetrized(s, 2, {0, 1, 3, 0}));
}

TEST_CASE("shape classification") {
  CHECK(classify_shape(antiferro()).shape == Shape::Convex);
  CHECK(classify_shape(Interaction(kIsing, 2, oracle::ising_table(4.0))).shape == Shape::Concave);
  CHECK(classify_shape(Interaction(kIsing, 2, std::vector<double>(4, 0.0))).shape == Shape::Affine);
  CHECK(classify_shape(Interaction(StateSpace::uniform(1), 2, {3.0})).shape == Shape::Affine);
  // indefinite on the zero-sum subspace
  const auto s3 = StateSpace::uniform(3);
  CHECK(classify_shape(Interaction(s3, 2, {0, 1, -1, 1, 0, 0, -1, 0, 0})).shape == Shape::Neither);
  // constant three-body table is affine
  CHECK(classify_shape(Interaction(s3, 3, std::vector<double>(27, 1.0))).shape == Shape::Affine);
  CHECK_THROWS(classify_shape(Interaction(kIsing, 2, {kInf, 0, 0, 0})));
  CHECK(shape_from_string(to_string(Shape::Concave)) == Shape::Concave);
  CHECK_THROWS(shape_from_string("wobbly"));
}

TEST_CASE("property: centered differences of Phi match Phi1 and Phi2") {
  Rng rng(21);
  for (std::size_t n : {2u, 3u}) {
    const auto s = StateSpace::make({0.1, 0.2, 0.3, 0.4});
    const auto table = oracle::random_symmetric_table(4, n, 50 + n);
    const Interaction phi(s, n, table);
    for (int i = 0; i < 20; ++i) {
      const auto nu = random_interior_measure(s, rng);
      const auto d = random_zero_sum(4, rng);
      const double h = 1e-4;
      auto shifted = [&](double t) {
        std::vector<double> w(4);
        for (std::size_t k = 0; k < 4; ++k) w[k] = nu[k] + t * d[k];
        return oracle::Phi(table, 4, n, w);
      };
      const double fd1 = (shifted(h) - shifted(-h)) / (2 * h);
      const double fd2 = (shifted(h) - 2 * shifted(0) + shifted(-h)) / (h * h);
      const double p1 = Phi1(nu, d, phi);
      const double p2 = Phi2(nu, d, phi);
      CHECK(std::abs(fd1 - p1) <= 1e-6 * (1 + std::abs(p1)));
      // The n(n-1) coefficient is what the second difference sees.
      CHECK(std::abs(fd2 - p2) <= 1e-4 * (1 + std::abs(p2)));
    }
  }
}

TEST_CASE("property: multilinear expansion for n = 2, 3") {
  Rng rng(8);
  const auto s = StateSpace::uniform(3);
  for (std::size_t n : {2u, 3u}) {
    const Interaction phi(s, n, oracle::random_symmetric_table(3, n, 70 + n));
    for (int i = 0; i < 10; ++i) {
      const auto a = random_interior_measure(s, rng), b = random_interior_measure(s, rng);
      const double th = rng.uniform();
      // sum_k binom(n,k) th^k (1-th)^(n-k) phi[a^k (x) b^(n-k)]
      double expect = 0.0;
      for (std::size_t k = 0; k <= n; ++k) {
        std::vector<std::span<const double>> v;
        for (std::size_t j = 0; j < n; ++j) v.push_back(j < k ? a.weights() : b.weights());
        const double binom = std::tgamma(n + 1.0) / std::tgamma(k + 1.0) / std::tgamma(n - k + 1.0);
        expect += binom * std::pow(th, k) * std::pow(1 - th, n - k) * contract(phi, v);
      }
      CHECK(Phi(mix(a, b, th), phi) == doctest::Approx(expect).epsilon(1e-13));
    }
  }
}

TEST_CASE("property: Jensen holds when the certificate says Convex") {
  const auto s = StateSpace::make({{1, 0}, {0, 1}, {-1, 0}, {0, -1}}, {0.25, 0.25, 0.25, 0.25});
  std::vector<double> table(16);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      const double dx = s->points()[i][0] - s->points()[j][0], dy = s->points()[i][1] - s->points()[j][1];
      table[i * 4 + j] = -(dx * dx + dy * dy);
    }
  const Interaction phi(s, 2, table);
  REQUIRE(classify_shape(phi).shape == Shape::Convex);
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const auto a = random_interior_measure(s, rng), b = random_interior_measure(s, rng);
    CHECK(Phi(mix(a, b, 0.5), phi) <= 0.5 * Phi(a, phi) + 0.5 * Phi(b, phi) + 1e-10);
  }
}
