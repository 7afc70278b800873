#include <doctest.h>

#include <cmath>
#include <random>

#include "fedgnn/defenses.hpp"
#include "fedgnn/errors.hpp"
#include "fedgnn/federation.hpp"
#include "oracles.hpp"

using namespace fedgnn;

namespace {

LayoutPtr flat(std::size_t n) {
  return std::make_shared<const ParamLayout>(std::vector<Segment>{{"w", 1, n}});
}

ParamVector vec(const LayoutPtr& l, std::vector<double> v) {
  return ParamVector(l, std::move(v));
}

ParamVector basis(const LayoutPtr& l, std::size_t i, double scale = 1.0) {
  std::vector<double> v(l->total_size(), 0.0);
  v[i] = scale;
  return ParamVector(l, v);
}

UpdateHistory history_of(const std::vector<ParamVector>& vs) {
  UpdateHistory h(vs.size());
  for (std::size_t i = 0; i < vs.size(); ++i) h.accumulate(i, vs[i]);
  return h;
}

ParamVector random_vec(const LayoutPtr& l, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(l->total_size());
  for (double& x : v) x = n(rng);
  return ParamVector(l, v);
}

}  // namespace

TEST_CASE("UpdateHistory sums per client") {
  auto l = flat(2);
  UpdateHistory h(2);
  CHECK_FALSE(h.sum(0).has_value());
  h.accumulate(0, vec(l, {1, 2}));
  h.accumulate(0, vec(l, {3, -1}));
  CHECK(*h.sum(0) == vec(l, {4, 1}));
  CHECK_FALSE(h.sum(1).has_value());
  CHECK_THROWS(h.accumulate(2, vec(l, {0, 0})));
}

TEST_CASE("FoolsGold hand-traced cases") {
  auto l = flat(3);
  SUBCASE("identical pair") {
    const auto w = foolsgold_weights(history_of({basis(l, 0), basis(l, 0, 3.0)})).weights;
    CHECK(w[0] == 0.0);
    CHECK(w[1] == 0.0);
  }
  SUBCASE("mutually orthogonal") {
    const auto w = foolsgold_weights(history_of({basis(l, 0), basis(l, 1), basis(l, 2)})).weights;
    for (double x : w) CHECK(x == 1.0);
  }
  SUBCASE("two identical plus one orthogonal") {
    const auto w = foolsgold_weights(history_of({basis(l, 0), basis(l, 0), basis(l, 1)})).weights;
    CHECK(w[0] == doctest::Approx(0.0));
    CHECK(w[1] == doctest::Approx(0.0));
    CHECK(w[2] == doctest::Approx(1.0));
  }
  SUBCASE("partial similarity through pardoning, rescale and logit") {
    // cs01 = 0.6, cs02 = cs12 = 0: v = (0.6, 0.6, 0), no pardoning between
    // 0 and 1, w = (0.4, 0.4, 1) -> rescale (0.4, 0.4, 1) -> logit
    // ln(0.4/0.6) + 0.5 = 0.0945.
    const auto w = foolsgold_weights(
        history_of({vec(l, {1, 0, 0}), vec(l, {0.6, 0.8, 0}), vec(l, {0, 0, 1})})).weights;
    const double expect = std::log(0.4 / 0.6) + 0.5;
    CHECK(w[0] == doctest::Approx(expect));
    CHECK(w[1] == doctest::Approx(expect));
    CHECK(w[2] == 1.0);
  }
  SUBCASE("single client and empty histories") {
    CHECK(foolsgold_weights(history_of({basis(l, 0)})).weights == std::vector<double>{1.0});
    UpdateHistory h(3);
    h.accumulate(0, basis(l, 0));
    h.accumulate(1, basis(l, 0));
    const auto w = foolsgold_weights(h).weights;
    CHECK(w[0] == 0.0);
    CHECK(w[1] == 0.0);
    CHECK(w[2] == 1.0);
  }
}

TEST_CASE("FoolsGold weights lie in [0,1] and ignore positive scaling") {
  std::mt19937_64 rng(5);
  auto l = flat(6);
  std::uniform_real_distribution<double> pos(0.1, 10.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<ParamVector> vs;
    for (int i = 0; i < 5; ++i) vs.push_back(random_vec(l, rng));
    const auto w = foolsgold_weights(history_of(vs)).weights;
    for (double x : w) {
      CHECK(x >= 0.0);
      CHECK(x <= 1.0);
    }
    auto scaled = vs;
    for (auto& v : scaled) v = scale(v, pos(rng));
    const auto ws = foolsgold_weights(history_of(scaled)).weights;
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(ws[i] == doctest::Approx(w[i]).epsilon(1e-9));
  }
}

TEST_CASE("FoolsGold sybil property") {
  std::mt19937_64 rng(6);
  auto l = flat(8);
  for (int t = 0; t < 20; ++t) {
    std::vector<ParamVector> vs{basis(l, 0), basis(l, 1), basis(l, 2)};
    const std::size_t i = rng() % 3;
    vs.push_back(vs[i]);
    const auto w = foolsgold_weights(history_of(vs)).weights;
    CHECK(w[i] == doctest::Approx(0.0));
    CHECK(w[3] == doctest::Approx(0.0));
    for (std::size_t j = 0; j < 3; ++j)
      if (j != i) CHECK(w[j] == doctest::Approx(1.0));
  }
}

TEST_CASE("pairwise cosine and summary") {
  auto l = flat(2);
  const std::vector<ParamVector> vs{vec(l, {1, 0}), vec(l, {0, 1}), vec(l, {1, 1})};
  const auto m = pairwise_cosine(vs);
  CHECK(m[0][0] == doctest::Approx(1.0));
  CHECK(m[0][1] == 0.0);
  CHECK(m[0][2] == doctest::Approx(std::sqrt(0.5)));
  const auto s = summarize_off_diagonal(m);
  CHECK(s.min == 0.0);
  CHECK(s.max == doctest::Approx(std::sqrt(0.5)));
  CHECK(s.mean == doctest::Approx(2 * std::sqrt(0.5) / 3));
}

TEST_CASE("DMF hand cases") {
  auto l = flat(4);
  SUBCASE("identical params are all accepted") {
    const std::vector<ParamVector> vs(4, vec(l, {1, 2, 3, 4}));
    const auto o = dmf_filter(vs);
    CHECK(o.accepted == std::vector<std::size_t>{0, 1, 2, 3});
    CHECK_FALSE(o.fail_open);
  }
  SUBCASE("four near-identical plus a negated outlier") {
    std::vector<ParamVector> vs{vec(l, {1, 1, 1, 1}), vec(l, {1.01, 1, 1, 1}),
                                vec(l, {1, 0.99, 1, 1}), vec(l, {1, 1, 1.02, 1})};
    vs.insert(vs.begin() + 2, vec(l, {-3, -3, -3, -3}));
    const auto o = dmf_filter(vs);
    CHECK(o.accepted == std::vector<std::size_t>{0, 1, 3, 4});
    CHECK(o.weights == std::vector<double>{1, 1, 0, 1, 1});
    CHECK_FALSE(o.fail_open);
  }
  SUBCASE("two orthogonal clients fail open") {
    const std::vector<ParamVector> vs{basis(l, 0), basis(l, 1)};
    const auto o = dmf_filter(vs);
    CHECK(o.fail_open);
    CHECK(o.accepted == std::vector<std::size_t>{0, 1});
  }
  SUBCASE("a single client is a contract error") {
    const std::vector<ParamVector> vs{basis(l, 0)};
    CHECK_THROWS_AS(dmf_filter(vs), ContractError);
  }
}

TEST_CASE("DMF idempotence on random clustered inputs") {
  std::mt19937_64 rng(8);
  auto l = flat(10);
  std::normal_distribution<double> noise(0.0, 0.3);
  for (int t = 0; t < 40; ++t) {
    const ParamVector centre = random_vec(l, rng);
    std::vector<ParamVector> vs;
    const std::size_t k = 3 + rng() % 6;
    for (std::size_t i = 0; i < k; ++i) {
      if (rng() % 4 == 0) {
        vs.push_back(random_vec(l, rng));
        continue;
      }
      std::vector<double> v(centre.values().begin(), centre.values().end());
      for (double& x : v) x += noise(rng);
      vs.push_back(ParamVector(l, v));
    }
    const auto o = dmf_filter(vs);
    REQUIRE_FALSE(o.accepted.empty());
    if (o.fail_open || o.accepted.size() < 2) continue;
    std::vector<ParamVector> kept;
    for (auto i : o.accepted) kept.push_back(vs[i]);
    const auto again = dmf_filter(kept);
    CHECK(again.accepted.size() == kept.size());
  }
}

TEST_CASE("weighted_aggregate examples and oracle") {
  auto l = flat(5);
  std::mt19937_64 rng(9);
  std::vector<ParamVector> vs;
  for (int i = 0; i < 4; ++i) vs.push_back(random_vec(l, rng));
  const std::vector<double> uniform(4, 0.25);
  const auto u = weighted_aggregate(vs, uniform);
  const auto f = fedavg(vs);
  for (std::size_t j = 0; j < 5; ++j) CHECK(u[j] == doctest::Approx(f[j]).epsilon(1e-14));
  const std::vector<double> onehot{0, 0, 1, 0};
  CHECK(weighted_aggregate(vs, onehot) == vs[2]);

  std::uniform_real_distribution<double> w01(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> w(4);
    for (double& x : w) x = w01(rng);
    const auto got = weighted_aggregate(vs, w);
    const auto ref = oracle::naive_weighted_mean(vs, w);
    for (std::size_t j = 0; j < 5; ++j) CHECK(std::abs(got[j] - ref[j]) < 1e-12);
  }

  // Indicator weights equal fedavg over the subset.
  const std::vector<double> indicator{1, 0, 1, 1};
  const std::vector<ParamVector> subset{vs[0], vs[2], vs[3]};
  const auto a = weighted_aggregate(vs, indicator);
  const auto b = fedavg(subset);
  for (std::size_t j = 0; j < 5; ++j) CHECK(a[j] == doctest::Approx(b[j]).epsilon(1e-14));

  CHECK_THROWS_AS(weighted_aggregate(vs, std::vector<double>(4, 0.0)), DefenseError);
  CHECK_THROWS_AS(weighted_aggregate(vs, std::vector<double>{1, -1, 1, 1}), DefenseError);
  CHECK_THROWS_AS(weighted_aggregate(vs, std::vector<double>{1, 1}), ContractError);
}

TEST_CASE("defense names") {
  CHECK(parse_defense("foolsgold") == DefenseKind::kFoolsGold);
  CHECK(to_string(DefenseKind::kDmf) == "dmf");
  CHECK_THROWS_AS(parse_defense("krum"), ConfigError);
}

TEST_CASE("FoolsGold zeroes random vectors paired with scaled copies") {
  std::mt19937_64 rng(13);
  auto l = flat(50);
  for (int t = 0; t < 50; ++t) {
    const ParamVector a = random_vec(l, rng);
    const auto w = foolsgold_weights(history_of({a, scale(a, 0.3 + t)})).weights;
    CHECK(w[0] == 0.0);
    CHECK(w[1] == 0.0);
  }
}

TEST_CASE("fedavg of identical inputs is exact") {
  std::mt19937_64 rng(14);
  auto l = flat(200);
  for (std::size_t k = 1; k < 12; ++k) {
    const std::vector<ParamVector> same(k, random_vec(l, rng));
    CHECK(fedavg(same) == same.front());
  }
}
