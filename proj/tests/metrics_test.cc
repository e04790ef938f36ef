// Copyright 2026 The omniqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "omniqa/error.h"
#include "omniqa/metrics.h"
#include "oracles.h"

namespace omniqa {
namespace {

std::vector<double> random_values(std::mt19937_64& g, std::size_t n, bool ties) {
  std::vector<double> v(n);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (double& x : v) x = ties ? static_cast<double>(g() % 4) : u(g);
  return v;
}

bool constant(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; });
}

// A random strictly increasing map: piecewise linear through sorted knots,
// followed by exp so the transform is also nonlinear.
std::function<double(double)> random_monotone(std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(0.05, 3.0);
  std::vector<double> slope(8);
  for (double& s : slope) s = u(g);
  const double shift = u(g) * 10.0 - 15.0;
  return [slope, shift](double x) {
    double y = 0.0, at = -4.0;
    for (double s : slope) {
      const double step = std::clamp(x - at, 0.0, 1.0);
      y += s * step;
      at += 1.0;
    }
    y += 0.01 * (x + 4.0);  // strictly increasing outside the knots too
    return std::exp(0.3 * y) + shift;
  };
}

std::vector<oracle::Rated> random_rated(std::mt19937_64& g, std::size_t n) {
  std::uniform_real_distribution<double> mos(0.0, 100.0), sd(1.0, 25.0), pred(0.0, 1.0);
  std::vector<oracle::Rated> r(n);
  for (auto& x : r) x = {std::floor(pred(g) * 6.0), mos(g), sd(g), 2 + static_cast<int>(g() % 20)};
  return r;
}

std::vector<ScorePair> to_pairs(const std::vector<oracle::Rated>& r) {
  std::vector<ScorePair> p;
  for (const auto& x : r) p.push_back({x.pred, x.mos, x.sd, x.n});
  return p;
}

SaliencyMap map_of(int w, int h, const std::vector<double>& v) {
  SaliencyMap m(w, h);
  m.values = v;
  return m;
}

TEST_CASE("hand cases for the correlations") {
  const std::vector<double> a = {1, 2, 3, 4}, b = {1, 3, 2, 4}, neg = {-1, -2, -3, -4};
  CHECK(srcc(a, b) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(krcc(a, b) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(srcc(a, a) == doctest::Approx(1.0));
  CHECK(krcc(a, a) == doctest::Approx(1.0));
  CHECK(plcc(a, a) == doctest::Approx(1.0));
  CHECK(srcc(a, neg) == doctest::Approx(-1.0));
  CHECK(krcc(a, neg) == doctest::Approx(-1.0));
  CHECK(plcc(a, neg) == doctest::Approx(-1.0));
  const std::vector<double> flat = {2, 2, 2, 2};
  CHECK_THROWS_AS(srcc(a, flat), DegenerateError);
  CHECK_THROWS_AS(krcc(flat, a), DegenerateError);
  CHECK_THROWS_AS(plcc(a, flat), DegenerateError);
  CHECK_THROWS_AS(plcc(std::vector<double>{1, 2}, std::vector<double>{1, 2}), InsufficientDataError);
  CHECK_THROWS_AS(srcc(a, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST_CASE("correlations match brute-force enumeration on small instances") {
  std::mt19937_64 g(1);
  int checked = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 3 + g() % 8;
    const bool ties = trial % 2 == 0;
    const auto p = random_values(g, n, ties), q = random_values(g, n, ties);
    if (constant(p) || constant(q)) continue;
    CHECK(std::abs(srcc(p, q) - oracle::spearman(p, q)) < 1e-9);
    CHECK(std::abs(krcc(p, q) - oracle::kendall_b(p, q)) < 1e-9);
    CHECK(std::abs(plcc(p, q) - oracle::pearson(p, q)) < 1e-9);
    ++checked;
  }
  CHECK(checked > 1500);
}

TEST_CASE("average ranks split ties") {
  CHECK(average_ranks(std::vector<double>{3, 1, 3, 2}) == std::vector<double>{3.5, 1, 3.5, 2});
}

TEST_CASE("logistic PLCC recovers a logistic relation") {
  const std::array<double, 4> b = {80.0, 10.0, 0.5, 5.0};
  std::vector<double> x, y;
  for (int k = 0; k < 30; ++k) {
    x.push_back(-10.0 + 20.0 * k / 29.0 + 0.5);
    y.push_back(eval_logistic(b, x.back()));
  }
  CHECK(plcc(x, y, {.logistic_fit = true}) > 0.9999);
  CHECK(plcc(x, y) < plcc(x, y, {.logistic_fit = true}));
}

TEST_CASE("ROC analyses match pair enumeration") {
  std::mt19937_64 g(2);
  int ds = 0, bw = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto r = random_rated(g, 2 + g() % 9);
    const auto pairs = to_pairs(r);
    std::size_t sig = 0, total = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      for (std::size_t j = i + 1; j < r.size(); ++j) {
        sig += oracle::significant(r[i], r[j]) ? 1 : 0;
        ++total;
      }
    }
    if (sig > 0 && sig < total) {
      CHECK(std::abs(roc_different_similar(pairs) - oracle::auc_different_similar(r)) < 1e-9);
      ++ds;
    } else {
      CHECK_THROWS_AS(roc_different_similar(pairs), InsufficientDataError);
    }
    if (sig > 0) {
      CHECK(std::abs(roc_better_worse(pairs) - oracle::auc_better_worse(r)) < 1e-9);
      ++bw;
    } else {
      CHECK_THROWS_AS(roc_better_worse(pairs), InsufficientDataError);
    }
  }
  CHECK(ds > 300);
  CHECK(bw > 300);
}

TEST_CASE("ROC extremes") {
  std::vector<ScorePair> p;
  for (int k = 0; k < 8; ++k) p.push_back({k * 10.0, k * 10.0, 1.0, 20});
  p.push_back({35.0, 35.0, 1.0, 20});
  p.push_back({35.05, 35.05, 1.0, 20});
  CHECK(roc_different_similar(p) == 1.0);
  CHECK(roc_better_worse(p) == 1.0);
  for (auto& x : p) x.pred = -x.pred;
  CHECK(roc_better_worse(p) == 0.0);
}

TEST_CASE("random predictions sit at chance for different-vs-similar") {
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ScorePair> p;
  for (int k = 0; k < 142; ++k) p.push_back({u(g), 100.0 * u(g), 60.0, 10});
  CHECK(std::abs(roc_different_similar(p) - 0.5) < 0.02);
}

TEST_CASE("saliency metrics match direct summation on small maps") {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int w = 1 + static_cast<int>(g() % 5), h = 1 + static_cast<int>(g() % 2);
    const std::size_t n = static_cast<std::size_t>(w) * h;
    if (n < 2) continue;
    std::vector<double> p(n), q(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = trial % 3 == 0 ? static_cast<double>(g() % 3) : u(g);
      q[i] = u(g) + 1e-3;
    }
    if (constant(p) || constant(q)) continue;
    const SaliencyMap pred = map_of(w, h, p), gt = map_of(w, h, q);
    std::vector<std::size_t> fix_idx;
    std::vector<PixelIndex> fix;
    for (std::size_t k = 0, m = 1 + g() % n; k < m; ++k) {
      const std::size_t i = g() % n;
      fix_idx.push_back(i);
      fix.push_back({static_cast<int>(i % w), static_cast<int>(i / w)});
    }
    CHECK(std::abs(cc(pred, gt) - oracle::pearson(p, q)) < 1e-9);
    CHECK(std::abs(kld(pred, gt) - oracle::kl_divergence(p, q)) < 1e-9);
    CHECK(std::abs(sim(pred, gt) - oracle::similarity(p, q)) < 1e-9);
    CHECK(std::abs(nss(pred, fix) - oracle::nss(p, fix_idx)) < 1e-9);
    CHECK(std::abs(auc_judd(pred, fix) - oracle::auc_judd(p, fix_idx)) < 1e-9);
  }
}

TEST_CASE("hand cases for the saliency metrics") {
  CHECK(cc(map_of(2, 2, {1, 2, 3, 4}), map_of(2, 2, {1, 2, 4, 3})) == doctest::Approx(0.8).epsilon(1e-12));
  const SaliencyMap gt = map_of(2, 1, {0.5, 0.5}), pred = map_of(2, 1, {0.9, 0.1});
  CHECK(std::abs(kld(pred, gt) - 0.5108) < 1e-3);
  CHECK(sim(pred, gt) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(kld(gt, gt) <= 1e-6);
  CHECK(sim(gt, gt) == doctest::Approx(1.0));
  CHECK(sim(map_of(2, 1, {1, 0}), map_of(2, 1, {0, 1})) == 0.0);
  const SaliencyMap a = map_of(3, 1, {1, 2, 6});
  CHECK(cc(a, map_of(3, 1, {9, 8, 4})) == doctest::Approx(-1.0));

  // 3x3 map, one fixation on the value 9: mean 3, population sd sqrt(54/9).
  const SaliencyMap s = map_of(3, 3, {1, 2, 3, 1, 9, 1, 2, 3, 5});
  const std::vector<PixelIndex> centre = {{1, 1}};
  CHECK(nss(s, centre) == doctest::Approx(6.0 / std::sqrt(6.0)).epsilon(1e-12));
  std::vector<PixelIndex> every;
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 3; ++x) every.push_back({x, y});
  }
  CHECK(std::abs(nss(s, every)) < 1e-9);
  CHECK(auc_judd(map_of(3, 3, std::vector<double>(9, 0.2)), centre) == 0.5);
}

TEST_CASE("AUC-Judd approaches 1 for fixations on the top pixels") {
  SaliencyMap m(256, 128);
  for (std::size_t i = 0; i < m.size(); ++i) m.values[i] = static_cast<double>(i);
  const std::vector<PixelIndex> fix = {{255, 127}, {254, 127}, {253, 127}};
  CHECK(auc_judd(m, fix) >= 0.99);
}

TEST_CASE("rank metrics survive 100 random increasing transforms") {
  std::mt19937_64 g(6);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const auto r = random_rated(g, 10);
  auto pairs = to_pairs(r);
  for (auto& p : pairs) p.pred = u(g);
  std::vector<double> pred, mos;
  for (const auto& p : pairs) {
    pred.push_back(p.pred);
    mos.push_back(p.mos);
  }
  SaliencyMap map(5, 2);
  for (double& v : map.values) v = u(g);
  const std::vector<PixelIndex> fix = {{0, 0}, {3, 1}, {4, 0}};
  const double s0 = srcc(pred, mos), k0 = krcc(pred, mos), a0 = auc_judd(map, fix);
  for (int t = 0; t < 100; ++t) {
    const auto f = random_monotone(g);
    std::vector<double> tp;
    for (double x : pred) tp.push_back(f(x));
    SaliencyMap tm = map;
    for (double& v : tm.values) v = f(v);
    CHECK(std::abs(srcc(tp, mos) - s0) < 1e-12);
    CHECK(std::abs(krcc(tp, mos) - k0) < 1e-12);
    CHECK(std::abs(auc_judd(tm, fix) - a0) < 1e-12);
  }
}

// The ROC statistics are score differences, so their AUCs are invariant under
// increasing affine maps of the predictions but not under arbitrary monotone
// ones.
TEST_CASE("ROC AUCs survive 100 random increasing affine transforms") {
  std::mt19937_64 g(8);
  std::uniform_real_distribution<double> u(-2.0, 2.0), scale(0.01, 50.0);
  auto pairs = to_pairs(random_rated(g, 10));
  for (auto& p : pairs) p.pred = u(g);
  const double d0 = roc_different_similar(pairs), b0 = roc_better_worse(pairs);
  for (int t = 0; t < 100; ++t) {
    const double a = scale(g), b = 100.0 * u(g);
    auto tp = pairs;
    for (auto& p : tp) p.pred = a * p.pred + b;
    CHECK(std::abs(roc_different_similar(tp) - d0) < 1e-12);
    CHECK(std::abs(roc_better_worse(tp) - b0) < 1e-12);
  }
}

TEST_CASE("a nonlinear increasing map can change the ROC AUCs") {
  // Three significantly different images: differences {1, 1, 2} become
  // {1, 9, 10} under cubing, which reorders the pair statistics.
  std::vector<ScorePair> p = {{0.0, 10.0, 1.0, 20}, {1.0, 50.0, 1.0, 20},
                              {2.0, 30.0, 1.0, 20}, {2.0, 31.0, 30.0, 2}};
  auto cubed = p;
  for (auto& x : cubed) x.pred = x.pred * x.pred * x.pred;
  const bool changed = roc_different_similar(p) != roc_different_similar(cubed) ||
                       roc_better_worse(p) != roc_better_worse(cubed);
  CHECK(changed);
}

TEST_CASE("CC ignores positive affine changes; KLD stays nonnegative") {
  std::mt19937_64 g(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> p(12), q(12);
    for (std::size_t i = 0; i < 12; ++i) {
      p[i] = u(g);
      q[i] = u(g);
    }
    std::vector<double> pa;
    const double a = 0.1 + 5 * u(g), b = u(g);
    for (double x : p) pa.push_back(a * x + b);
    CHECK(std::abs(cc(map_of(4, 3, p), map_of(4, 3, q)) - cc(map_of(4, 3, pa), map_of(4, 3, q))) < 1e-12);
    CHECK(kld(map_of(4, 3, p), map_of(4, 3, q)) >= 0.0);
  }
}

TEST_CASE("saliency metric errors") {
  const SaliencyMap a(4, 2, 1.0), b(6, 3, 1.0);
  try {
    cc(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2x4") != std::string::npos);
    CHECK(msg.find("3x6") != std::string::npos);
  }
  CHECK_THROWS_AS(cc(a, map_of(4, 2, {1, 2, 3, 4, 5, 6, 7, 8})), DegenerateError);
  CHECK_THROWS_AS(kld(SaliencyMap(4, 2), a), DegenerateError);
  CHECK_THROWS_AS(nss(a, std::vector<PixelIndex>{{0, 0}}), DegenerateError);
  CHECK_THROWS_AS(nss(map_of(2, 1, {0, 1}), std::vector<PixelIndex>{}), InsufficientDataError);
  CHECK_THROWS_AS(auc_judd(map_of(2, 1, {0, 1}), std::vector<PixelIndex>{{5, 0}}), RangeError);
}

}  // namespace
}  // namespace omniqa
