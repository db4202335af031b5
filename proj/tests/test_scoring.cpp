// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "corelite/error.hpp"
#include "corelite/scoring.hpp"

using namespace corelite;

namespace {

// Textbook two-pass formula, kept apart from the library's running sums.
double two_pass_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g(0, 1);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

}  // namespace

TEST_CASE("normalize_score") {
  CHECK(normalize_score(50, {0, 100}) == 50.0);
  CHECK(normalize_score(100, {0, 100}) == 100.0);
  CHECK(normalize_score(0, {0, 100}) == 0.0);
  CHECK(std::abs(normalize_score(1841.8, {0, 2800}) - 65.78) <= 0.01);
  CHECK(std::abs(normalize_score(1841.8, {0, 2800}) - 65.7785714285714) < 1e-9);
  CHECK(normalize_score(130, {0, 100}) == 100.0);
  CHECK(normalize_score(-5, {0, 100}) == 0.0);
  CHECK_THROWS_AS(normalize_score(1, {5, 5}), Error);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-500, 500);
  for (int t = 0; t < 500; ++t) {
    const double a = u(rng), b = u(rng);
    const Scale s{-100, 250};
    const double na = normalize_score(a, s), nb = normalize_score(b, s);
    CHECK(na >= 0.0);
    CHECK(na <= 100.0);
    if (a <= b) CHECK(na <= nb);
  }
}

TEST_CASE("aggregate") {
  ScaleSpec scales;
  scales.set("a", {0, 100});
  scales.set("b", {0, 100});
  scales.set("mme", {0, 2800});

  SUBCASE("one dataset") {
    ScoreTable t;
    t.insert("m", "mme", 1841.8);
    CHECK(aggregate(t, scales).per_model.at("m") == normalize_score(1841.8, {0, 2800}));
  }
  SUBCASE("40 and 60 average to 50") {
    ScoreTable t;
    t.insert("m", "a", 40);
    t.insert("m", "b", 60);
    CHECK(aggregate(t, scales).per_model.at("m") == 50.0);
  }
  SUBCASE("instance weighting") {
    ScoreTable t;
    t.insert("m", "a", 40, 3);
    t.insert("m", "b", 60, 1);
    CHECK(aggregate(t, scales, Weighting::InstanceWeighted).per_model.at("m") == 45.0);
    CHECK(aggregate(t, scales, Weighting::Unweighted).per_model.at("m") == 50.0);
    ScoreTable missing;
    missing.insert("m", "a", 40);
    CHECK_THROWS_AS(aggregate(missing, scales, Weighting::InstanceWeighted), Error);
  }
  SUBCASE("missing scale") {
    ScoreTable t;
    t.insert("m", "unknown", 40);
    CHECK_THROWS_AS(aggregate(t, scales), Error);
  }
}

TEST_CASE("aggregate properties") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> raw(-50, 3000);
  std::uniform_int_distribution<std::uint64_t> cnt(1, 5000);
  for (int trial = 0; trial < 100; ++trial) {
    ScaleSpec scales;
    std::vector<std::string> datasets;
    for (int d = 0; d < 6; ++d) {
      datasets.push_back("d" + std::to_string(d));
      scales.set(datasets.back(), {0, 1000.0 + 300 * d});
    }
    std::vector<std::tuple<std::string, double, std::uint64_t>> rows;
    for (const auto& d : datasets) rows.emplace_back(d, raw(rng), cnt(rng));
    ScoreTable t, permuted, recounted;
    for (const auto& [d, s, c] : rows) t.insert("m", d, s, c);
    auto shuffled = rows;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (const auto& [d, s, c] : shuffled) permuted.insert("m", d, s, c);
    for (const auto& [d, s, c] : rows) recounted.insert("m", d, s, c + 7);

    for (auto w : {Weighting::Unweighted, Weighting::InstanceWeighted}) {
      const double v = aggregate(t, scales, w).per_model.at("m");
      CHECK(v >= 0.0);
      CHECK(v <= 100.0);
      CHECK(aggregate(permuted, scales, w).per_model.at("m") == doctest::Approx(v).epsilon(1e-12));
    }
    CHECK(aggregate(recounted, scales).per_model.at("m") ==
          aggregate(t, scales).per_model.at("m"));
  }
}

TEST_CASE("resolve_scales defaults only percentage-like datasets") {
  ScoreTable t;
  t.insert("m1", "ai2d", 66.6);
  t.insert("m1", "mme", 1841.8);
  CHECK_THROWS_WITH_AS(resolve_scales(t, {}), doctest::Contains("mme"), Error);
  ScaleSpec configured;
  configured.set("mme", {0, 2800});
  const auto resolved = resolve_scales(t, configured);
  CHECK(resolved.find("ai2d")->max == 100.0);
  CHECK(resolved.find("mme")->max == 2800.0);
}

TEST_CASE("pearson worked examples") {
  const std::vector<double> x{1, 2, 3};
  CHECK(pearson(x, x) == doctest::Approx(1.0).epsilon(1e-15));
  std::vector<double> neg;
  for (double v : x) neg.push_back(-2 * v + 3);
  CHECK(pearson(x, neg) == doctest::Approx(-1.0).epsilon(1e-15));
  const std::vector<double> y{1, 2, 4};
  CHECK(std::abs(pearson(x, y) - 0.9819805060619656) < 1e-15);

  CHECK_THROWS_AS(pearson(x, std::vector<double>{1, 2}), Error);
  CHECK_THROWS_WITH(pearson(x, std::vector<double>{5, 5, 5}), doctest::Contains("undefined correlation"));
  CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{2}), Error);
}

TEST_CASE("pearson agrees with the two-pass formula") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::size_t> len(2, 100);
  std::uniform_real_distribution<double> coef(0.1, 10), shift(-100, 100);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = len(rng);
    const auto x = random_vector(rng, n);
    const auto y = random_vector(rng, n);
    const double r = pearson(x, y);
    CHECK(std::abs(r - two_pass_pearson(x, y)) <= 1e-12);
    CHECK(std::abs(r) <= 1.0 + 1e-12);
    const double a = coef(rng), b = shift(rng), c = coef(rng), d = shift(rng);
    std::vector<double> ax(n), cy(n);
    for (std::size_t i = 0; i < n; ++i) {
      ax[i] = a * x[i] + b;
      cy[i] = c * y[i] + d;
    }
    CHECK(std::abs(pearson(ax, cy) - r) <= 1e-9);
  }
}

TEST_CASE("average_ranks and spearman") {
  CHECK(average_ranks(std::vector<double>{10, 30, 20}) == std::vector<double>{1, 3, 2});
  CHECK(average_ranks(std::vector<double>{5, 1, 5, 3}) == std::vector<double>{3.5, 1, 3.5, 2});

  const std::vector<double> x{1, 2, 3, 4, 5};
  CHECK(spearman(x, std::vector<double>{2, 4, 8, 16, 32}) == doctest::Approx(1.0));
  CHECK(spearman(x, std::vector<double>{9, 7, 5, 3, 1}) == doctest::Approx(-1.0));
  CHECK(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{10, 30, 20}) ==
        doctest::Approx(0.5).epsilon(1e-15));

  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const auto a = random_vector(rng, 20);
    const auto b = random_vector(rng, 20);
    std::vector<double> ta, tb;
    for (double v : a) ta.push_back(std::exp(v));
    for (double v : b) tb.push_back(-1.0 / (3.0 + std::atan(v)));
    CHECK(spearman(ta, tb) == doctest::Approx(spearman(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("correlate_lite") {
  ScoreTable full, lite, affine;
  const std::vector<std::pair<std::string, double>> rows{{"m1", 54.8}, {"m2", 66.6}, {"m3", 60.8}, {"m4", 45.9}};
  for (const auto& [m, s] : rows) {
    full.insert(m, "ai2d", s);
    lite.insert(m, "ai2d", s);
    affine.insert(m, "ai2d", 0.5 * s + 3);
  }
  full.insert("m1", "solo", 1);
  lite.insert("m1", "solo", 1);
  full.insert("m1", "pair", 10);
  full.insert("m2", "pair", 20);
  lite.insert("m1", "pair", 3);
  lite.insert("m2", "pair", 1);

  const auto same = correlate_lite(full, lite);
  CHECK(*same.per_dataset.at("ai2d").r == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(same.per_dataset.at("ai2d").sample_count == 4);
  CHECK_FALSE(same.per_dataset.at("solo").r.has_value());
  CHECK(same.per_dataset.at("solo").reason.find("fewer than 2") != std::string::npos);
  CHECK(std::abs(*same.per_dataset.at("pair").r) == doctest::Approx(1.0));

  CHECK(*correlate_lite(full, affine).per_dataset.at("ai2d").r == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(*correlate_lite(full, affine, CorrelationMethod::Spearman).per_dataset.at("ai2d").r ==
        doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("JSON output rounds to six significant digits") {
  CHECK(round_significant(65.77857142857) == 65.7786);
  CHECK(round_significant(0.000123456789) == 0.000123457);
  AggregateResult r;
  r.per_model["m"] = 65.77857142857;
  CHECK(r.to_json() == "{\n  \"per_model\": {\n    \"m\": 65.7786\n  },\n  \"weighting\": \"unweighted\"\n}\n");
  CorrelationResult c;
  c.per_dataset["x"] = {std::nullopt, 1, "fewer than 2 shared models"};
  CHECK(c.to_json().find("\"r\": null") != std::string::npos);
}
