#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lossylearn/info.hpp"
#include "../support/check.hpp"
#include "../support/oracles.hpp"
#include "../support/random_problems.hpp"

using namespace lossylearn;
namespace lt = lossylearn::testing;

TEST_CASE("entropy examples") {
  CHECK(entropy_bits(Distribution::uniform({"a", "b"})) == doctest::Approx(1.0));
  CHECK(entropy_bits(Distribution::point_mass({"a", "b", "c"}, 2)) == 0.0);
  CHECK(entropy_bits(Distribution({"a", "b"}, {0.8, 0.2})) == doctest::Approx(0.721928).epsilon(1e-6));
}

TEST_CASE("divergence examples") {
  Distribution p({"a", "b"}, {1.0, 0.0}), q({"a", "b"}, {0.5, 0.5});
  CHECK(kl_divergence(q, q).bits == 0.0);
  CHECK(kl_divergence(p, q).bits == doctest::Approx(1.0));
  Divergence bad = kl_divergence(q, p);
  CHECK(bad.support_violation);
  CHECK(std::isinf(bad.bits));
  CHECK_KIND(kl_divergence(p, Distribution::uniform({"a", "c"})), ErrorKind::dimension);
}

TEST_CASE("mutual information examples") {
  CHECK(mutual_information(Joint({{"a", "b"}, {"x", "y"}}, {0.06, 0.14, 0.24, 0.56})) ==
        doctest::Approx(0.0).epsilon(1e-15));
  CHECK(mutual_information(Joint({{"a", "b"}, {"x", "y"}}, {0.5, 0.0, 0.0, 0.5})) == doctest::Approx(1.0));
  CHECK(mutual_information(Joint({{"a", "b"}, {"x", "y"}}, {0.8, 0.0, 0.0, 0.2})) ==
        doctest::Approx(0.721928).epsilon(1e-6));
}

TEST_CASE("information density examples") {
  DensityTable t = information_density(Joint({{"a", "b"}, {"x", "y"}}, {0.8, 0.0, 0.0, 0.2}));
  CHECK(t.at(0, 0) == doctest::Approx(std::log(1.0 / 0.8)));
  CHECK(t.at(1, 1) == doctest::Approx(std::log(1.0 / 0.2)));
  CHECK(std::isinf(t.at(0, 1)));
  CHECK(t.at(0, 1) < 0.0);
  DensityTable ind = information_density(Joint({{"a", "b"}, {"x", "y"}}, {0.06, 0.14, 0.24, 0.56}));
  for (double v : ind.values) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("conditional mutual information examples") {
  // W = T = H uniform bits; conditioning on H leaves nothing.
  Joint same({{"0", "1"}, {"0", "1"}, {"0", "1"}}, {0.5, 0, 0, 0, 0, 0, 0, 0.5});
  CHECK(conditional_mutual_information(same, 2) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(conditional_mutual_information(same, 1) == doctest::Approx(0.0).epsilon(1e-15));
  std::vector<double> prod;
  for (double a : {0.3, 0.7})
    for (double b : {0.6, 0.4})
      for (double c : {0.1, 0.9}) prod.push_back(a * b * c);
  Joint ind({{"a0", "a1"}, {"b0", "b1"}, {"c0", "c1"}}, prod);
  for (std::size_t ax = 0; ax < 3; ++ax) CHECK(conditional_mutual_information(ind, ax) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK_KIND(conditional_mutual_information(Joint({{"a"}, {"b"}}, {1.0}), 0), ErrorKind::dimension);
}

// H(AC) + H(BC) - H(C) - H(ABC) on a row-major W x T x H tensor.
static double cmi_oracle(const std::vector<double>& m, std::size_t nw, std::size_t nt, std::size_t nh,
                         std::size_t cond) {
  const std::size_t ext[3] = {nw, nt, nh};
  std::size_t a = cond == 0 ? 1 : 0, b = cond == 2 ? 1 : 2;
  std::vector<double> ac(ext[a] * ext[cond], 0.0), bc(ext[b] * ext[cond], 0.0), c(ext[cond], 0.0);
  for (std::size_t x = 0; x < nw; ++x)
    for (std::size_t y = 0; y < nt; ++y)
      for (std::size_t z = 0; z < nh; ++z) {
        const std::size_t idx[3] = {x, y, z};
        const double v = m[(x * nt + y) * nh + z];
        ac[idx[a] * ext[cond] + idx[cond]] += v;
        bc[idx[b] * ext[cond] + idx[cond]] += v;
        c[idx[cond]] += v;
      }
  return lt::entropy(ac) + lt::entropy(bc) - lt::entropy(c) - lt::entropy(m);
}

TEST_CASE("library agrees with entropy-based oracles on random joints") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    lt::Gen g(seed);
    auto m = lt::random_markov_triple(g);
    Joint c = chain(m.w, m.t_given_w, m.h_given_t);
    const std::size_t nw = c.extent(0), nt = c.extent(1), nh = c.extent(2);
    std::vector<double> mass(c.mass().begin(), c.mass().end());
    for (std::size_t ax = 0; ax < 3; ++ax)
      CHECK(conditional_mutual_information(c, ax) == doctest::Approx(cmi_oracle(mass, nw, nt, nh, ax)).epsilon(1e-10));
    Joint wt = marginal_pair(c, 0, 1);
    std::vector<double> wtm(wt.mass().begin(), wt.mass().end());
    CHECK(std::abs(mutual_information(wt) - lt::mi_from_entropies(wtm, nw, nt)) < 1e-10);
    DensityTable d = information_density(wt);
    CHECK(std::abs(d.expectation_nats() / kLn2 - mutual_information(wt)) < 1e-10);
  }
}

TEST_CASE("chain identities and data processing on random Markov triples") {
  for (std::uint64_t seed = 100; seed < 200; ++seed) {
    lt::Gen g(seed);
    auto m = lt::random_markov_triple(g);
    Joint c = chain(m.w, m.t_given_w, m.h_given_t);
    const double iwh = mutual_information(marginal_pair(c, 0, 2));
    const double iwt = mutual_information(marginal_pair(c, 0, 1));
    const double ith = mutual_information(marginal_pair(c, 1, 2));
    CHECK(std::abs(iwh - (iwt - conditional_mutual_information(c, 2))) < 1e-10);
    CHECK(std::abs(iwh - (ith - conditional_mutual_information(c, 0))) < 1e-10);
    CHECK(conditional_mutual_information(c, 1) < 1e-10);
    CHECK(iwh <= std::min(iwt, ith) + 1e-10);
  }
}
