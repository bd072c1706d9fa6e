#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lossylearn/scenario.hpp"
#include "../support/check.hpp"
#include "../support/random_problems.hpp"

using namespace lossylearn;
namespace lt = lossylearn::testing;

static std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST_CASE("shipped data files are the canonical builtins") {
  CHECK(slurp(std::string(LL_DATA_DIR) + "/sym2.json") == save_scenario(builtin_sym2()));
  CHECK(slurp(std::string(LL_DATA_DIR) + "/skew2.json") == save_scenario(builtin_skew2()));
  CHECK(load_scenario(std::string(LL_DATA_DIR) + "/skew2.json") == builtin_skew2());
  CHECK_KIND(builtin_scenario("sym3"), ErrorKind::domain);
}

TEST_CASE("builtin shape") {
  Scenario s = builtin_sym2();
  CHECK(s.problem.num_w() == 2);
  CHECK(s.problem.b_bits == 1.0);
  CHECK(s.problem.d(0, 1) == 1.0);
  CHECK(s.algorithm.at(1)(0, 0) == 1.0);
  CHECK(s.algorithm.at(1)(1, 1) == 1.0);
  // majority vote with ties to h0
  CHECK(s.algorithm.at(2)(1, 0) == 1.0);
  CHECK(s.algorithm.at(2)(3, 1) == 1.0);
  CHECK(s.algorithm.at(0)(0, 0) == 1.0);
}

TEST_CASE("dataset universe counting and obtainability") {
  LearningProblem p = builtin_sym2().problem;
  DatasetUniverse u3(p, 3);
  CHECK(u3.size() == 8);
  CHECK(u3.bits() == 3.0);
  CHECK(u3.label(1) == "s0,s0,s1");
  CHECK(u3.sample_at(1, 2) == 1);
  CHECK(u3.drop(1, 2) == 0);
  CHECK(u3.drop(4, 0) == 0);
  p.observable[0] = {true, false};
  DatasetUniverse u2(p, 2);
  std::size_t count = 0;
  for (std::size_t t = 0; t < u2.size(); ++t) count += u2.obtainable(0, t);
  CHECK(count == 1);
  CHECK(u2.obtainable(0, 0));
  CHECK(u2.obtainable_union({0, 1}, 3));
  CHECK(!u2.obtainable_union({0, 0}, 3));
  CHECK_KIND(DatasetUniverse(p, 21, 1'000'000), ErrorKind::enumeration_cap);
}

TEST_CASE("obtainability is monotone in the observable set") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    lt::Gen g(seed);
    lt::Shape sh;
    sh.max_n = 0;
    Scenario s = lt::random_scenario(g, sh);
    LearningProblem wider = s.problem;
    for (auto& row : wider.observable)
      for (std::size_t i = 0; i < row.size(); ++i) row[i] = row[i] || g.coin(0.5);
    for (std::size_t n = 1; n <= 3; ++n) {
      DatasetUniverse a(s.problem, n), b(wider, n);
      for (std::size_t w = 0; w < s.problem.num_w(); ++w)
        for (std::size_t t = 0; t < a.size(); ++t)
          if (a.obtainable(w, t)) CHECK(b.obtainable(w, t));
    }
  }
}

TEST_CASE("world tuples") {
  WorldTuples wt(Distribution({"a", "b"}, {0.8, 0.2}), 3);
  CHECK(wt.size() == 8);
  CHECK(wt.prob(0) == doctest::Approx(0.512));
  CHECK(wt.prob(7) == doctest::Approx(0.008));
  CHECK(wt.tuple(6) == std::vector<std::size_t>{1, 1, 0});
}

TEST_CASE("grid partition examples") {
  GridPartition g = grid_partition(Distribution({"x0", "x1", "x2", "x3"}, {0.1, 0.2, 0.3, 0.4}), {"A", "A", "B", "B"});
  CHECK(g.p_w[0] == doctest::Approx(0.3));
  CHECK(g.p_w[1] == doctest::Approx(0.7));
  CHECK(g.p_x_given_w(0, 1) == doctest::Approx(2.0 / 3.0));
  CHECK(g.p_x_given_w(1, 2) == doctest::Approx(3.0 / 7.0));
  CHECK(g.p_x_given_w(0, 3) == 0.0);
  GridPartition one = grid_partition(Distribution({"x0", "x1"}, {0.25, 0.75}), {"R", "R"});
  CHECK(one.p_w.size() == 1);
  CHECK(one.p_x_given_w(0, 1) == doctest::Approx(0.75));
  CHECK_KIND(grid_partition(Distribution({"x0", "x1"}, {1.0, 0.0}), {"R", "S"}), ErrorKind::degenerate);
}

TEST_CASE("grid partition mixture reconstruction on random bases") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    lt::Gen g(seed);
    const std::size_t nx = g.index(1, 8);
    Distribution base(lt::names("x", nx), g.simplex(nx));
    std::vector<std::string> region(nx);
    for (auto& r : region) r = "r" + std::to_string(g.index(0, 2));
    GridPartition gp = grid_partition(base, region);
    for (std::size_t x = 0; x < nx; ++x) {
      double mix = 0.0;
      for (std::size_t w = 0; w < gp.p_w.size(); ++w) mix += gp.p_w[w] * gp.p_x_given_w(w, x);
      CHECK(std::abs(mix - base[x]) < 1e-12);
    }
  }
}

TEST_CASE("generative distortions") {
  Distribution pw({"w0", "w1"}, {0.5, 0.5});
  GenerativeSpec spec;
  spec.p_x_given_w = Kernel({"w0", "w1"}, {"x0", "x1"}, {1.0, 0.0, 0.0, 1.0});
  spec.p_y_given_x = Kernel({"x0", "x1"}, {"y0", "y1"}, {0.1, 0.9, 0.1, 0.9});
  spec.hypotheses = {Kernel({"x0", "x1"}, {"y0", "y1"}, {0.1, 0.9, 0.1, 0.9}),
                     Kernel({"x0", "x1"}, {"y0", "y1"}, {0.5, 0.5, 0.5, 0.5})};
  LearningProblem p = build_from_generative(pw, spec, {"truth", "flat"});
  CHECK(p.d(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(p.d(1, 1) == doctest::Approx(0.531004).epsilon(1e-6));
  CHECK(p.num_samples() == 4);

  GenerativeSpec loss = spec;
  loss.mode = DistortionMode::loss;
  loss.p_x_given_w = Kernel({"w0", "w1"}, {"x0", "x1"}, {0.5, 0.5, 0.5, 0.5});
  loss.p_y_given_x = Kernel({"x0", "x1"}, {"y0", "y1"}, {1.0, 0.0, 0.0, 1.0});
  loss.hypotheses = {Kernel({"x0", "x1"}, {"y0", "y1"}, {1.0, 0.0, 1.0, 0.0})};
  loss.loss = {0.0, 1.0, 1.0, 0.0};
  LearningProblem lp = build_from_generative(pw, loss, {"h"});
  CHECK(lp.d(0, 0) == doctest::Approx(0.5));

  GenerativeSpec bad = spec;
  bad.hypotheses[1] = Kernel({"x0", "x1"}, {"y0", "y1"}, {1.0, 0.0, 1.0, 0.0});
  CHECK_KIND(build_from_generative(pw, bad, {"truth", "zero"}), ErrorKind::support);
}

TEST_CASE("i.i.d. strategy rows") {
  Scenario s = builtin_skew2();
  Kernel k1 = iid_strategy(s.problem, 1);
  CHECK(k1(0, 0) == 1.0);
  LearningProblem p = s.problem;
  p.iid = Kernel({"w0", "w1"}, p.samples, {0.5, 0.5, 0.9, 0.1});
  Kernel k2 = iid_strategy(p, 2);
  for (std::size_t t = 0; t < 4; ++t) CHECK(k2(0, t) == doctest::Approx(0.25));
  CHECK(iid_strategy(p, 1)(1, 0) == doctest::Approx(0.9));
  // (w0, w1) queried: first sample from w0, second from w1
  CHECK(k2(1, 1) == doctest::Approx(0.5 * 0.1));
  p.iid.reset();
  CHECK_KIND(iid_strategy(p, 1), ErrorKind::capability);
}

TEST_CASE("scenario file round trips and errors") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    lt::Gen g(seed);
    Scenario s = lt::random_scenario(g, lt::Shape{});
    const std::string text = save_scenario(s);
    Scenario back = parse_scenario(text);
    CHECK(back == s);
    CHECK(save_scenario(back) == text);
  }
  std::string text = save_scenario(builtin_sym2());
  const auto at = text.find("\"0.5\"");
  REQUIRE(at != std::string::npos);
  std::string broken = text;
  broken.replace(at, 5, "\"0.49\"");
  CHECK_KIND(parse_scenario(broken), ErrorKind::stochasticity);
  CHECK_KIND(parse_scenario("{ not json"), ErrorKind::schema);
  CHECK_KIND(parse_scenario("{}"), ErrorKind::schema);
  CHECK_KIND(load_scenario("/nonexistent/scenario.json"), ErrorKind::io);

  const auto tmp = std::filesystem::temp_directory_path() / "lossylearn_roundtrip.json";
  write_scenario(builtin_skew2(), tmp.string());
  CHECK(load_scenario(tmp.string()) == builtin_skew2());
  std::filesystem::remove(tmp);
}

TEST_CASE("decimal strings parse back exactly") {
  lt::Gen g(5);
  for (int i = 0; i < 1000; ++i) {
    const double v = g.uniform() * std::pow(10.0, g.uniform(-12.0, 6.0));
    CHECK(std::stod(decimal(v)) == v);
  }
}

TEST_CASE("deterministic map marginalizes the seed") {
  LearningProblem p = builtin_sym2().problem;
  DeterministicMap det;
  det.seed = Distribution({"r0", "r1"}, {0.25, 0.75});
  det.seed_len = 1;
  det.map[1] = {0, 1, 1, 0};  // t * 2 + r
  Algorithm a(p, det);
  CHECK(a.at(1)(0, 0) == doctest::Approx(0.25));
  CHECK(a.at(1)(1, 0) == doctest::Approx(0.75));
  CHECK(a.deterministic().has_value());
  CHECK_KIND(a.at(2), ErrorKind::capability);
}
