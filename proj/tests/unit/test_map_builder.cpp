#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "metfa/errors.hpp"
#include "metfa/map_builder.hpp"
#include "oracles/oracles.hpp"

using namespace metfa;

namespace {

// One column per entry of `columns`, N rows each.
SampleMatrix from_columns(const std::vector<std::vector<double>>& columns) {
  const std::size_t n = columns.front().size();
  std::vector<double> values(n * columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    for (std::size_t i = 0; i < n; ++i) values[i * columns.size() + j] = columns[j][i];
  }
  return SampleMatrix(n, columns.size(), std::move(values));
}

std::vector<double> staircase() {
  std::vector<double> v;
  for (int i = 0; i < 10; ++i) v.push_back(i / 10.0);
  return v;
}

}  // namespace

TEST_CASE("natural breaks on small inputs") {
  CHECK(jenks_break(std::vector<double>{1, 1, 2, 8, 9, 9}) == 5.0);
  CHECK(jenks_break(std::vector<double>{0, 1}) == 0.5);
  CHECK(jenks_break(std::vector<double>{9, 1, 8, 1, 2, 9}) == 5.0);
  CHECK_THROWS_AS(jenks_break(std::vector<double>{0, 0, 0, 0}), DegenerateInput);
  CHECK_THROWS_AS(jenks_break(std::vector<double>{3}), DomainError);
}

TEST_CASE("natural breaks agree with exhaustive exact search") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> length(2, 12);
  std::uniform_int_distribution<int> small(0, 6);
  std::uniform_real_distribution<double> real(-3.0, 3.0);
  int checked = 0;
  for (int t = 0; t < 2000; ++t) {
    std::vector<double> v(length(rng));
    for (double& x : v) x = t % 2 ? small(rng) : real(rng);
    if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); })) continue;
    CAPTURE(t);
    CHECK(jenks_break(v) == oracle::jenks(v));
    ++checked;
  }
  CHECK(checked > 1500);
}

TEST_CASE("natural break separates the two groups") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> low(0.0, 0.1), high(0.9, 1.0);
  std::vector<double> v;
  for (int i = 0; i < 50; ++i) v.push_back(low(rng));
  for (int i = 0; i < 30; ++i) v.push_back(high(rng));
  const double h = jenks_break(v);
  CHECK(h > 0.1);
  CHECK(h < 0.9);
}

TEST_CASE("significance labels") {
  std::vector<double> above(10, 0.9), below(10, 0.1), half(10, 0.1);
  std::fill(half.begin(), half.begin() + 5, 0.9);
  const auto m = from_columns({above, below, half});
  const auto map = significance_map(m, 0.5, 0.05);
  REQUIRE(map.labels.size() == 3);
  CHECK(map.labels[0] == Significance::kImportant);
  CHECK(map.labels[1] == Significance::kUnimportant);
  CHECK(map.labels[2] == Significance::kUndecided);
  CHECK(map.counts == std::vector<std::uint32_t>{10, 0, 5});
  CHECK(map.threshold_h == 0.5);
}

TEST_CASE("a sample equal to h counts as at or above") {
  const auto m = from_columns({std::vector<double>(6, 0.5)});
  const auto map = significance_map(m, 0.5, 0.05);
  CHECK(map.counts[0] == 6);
  CHECK(map.labels[0] == Significance::kImportant);
}

TEST_CASE("significance needs enough samples") {
  const auto m = from_columns({std::vector<double>(4, 0.9)});
  CHECK_THROWS_AS(significance_map(m, 0.5, 0.05), InsufficientSamples);
  const auto five = from_columns({std::vector<double>(5, 0.9)});
  CHECK(significance_map(five, 0.5, 0.05).labels[0] == Significance::kImportant);
}

TEST_CASE("labels follow the p-values for every count") {
  for (std::size_t n : {5u, 10u, 17u}) {
    for (std::size_t k = 0; k <= n; ++k) {
      std::vector<double> col(n, 0.0);
      std::fill(col.begin(), col.begin() + k, 1.0);
      const auto map = significance_map(from_columns({col}), 0.5, 0.05);
      Significance expected = Significance::kUndecided;
      if (pvalue_median_leq(n, k).value() < 0.05) {
        expected = Significance::kImportant;
      } else if (pvalue_median_geq(n, k).value() < 0.05) {
        expected = Significance::kUnimportant;
      }
      CAPTURE(n);
      CAPTURE(k);
      CHECK(map.labels[0] == expected);
    }
  }
}

TEST_CASE("confidence bundle on the staircase") {
  const auto bundle = confidence_bundle(from_columns({staircase()}), 0.05);
  CHECK(bundle.indices.k1 == 1);
  CHECK(bundle.indices.k2 == 9);
  CHECK(bundle.lower[0] == 0.0);
  CHECK(bundle.upper[0] == 0.8);
  CHECK(bundle.smoothed[0] == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("confidence bundle of a constant column") {
  const auto bundle = confidence_bundle(from_columns({std::vector<double>(12, 0.37)}), 0.05);
  CHECK(bundle.lower[0] == 0.37);
  CHECK(bundle.upper[0] == 0.37);
  CHECK(bundle.smoothed[0] == doctest::Approx(0.37).epsilon(1e-15));
}

TEST_CASE("trimmed mean excludes an outlier") {
  std::vector<double> col{0.5, 0.48, 0.52, 0.49, 0.51, 0.47, 0.53, 0.5, 0.46, 10.0};
  const auto bundle = confidence_bundle(from_columns({col}), 0.05);
  auto sorted = col;
  std::sort(sorted.begin(), sorted.end());
  CHECK(bundle.smoothed[0] >= sorted.front());
  CHECK(bundle.smoothed[0] <= sorted[8]);
  CHECK(bundle.upper[0] < 10.0);

  std::vector<double> short_col{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 10.0};
  CHECK(smoothgrad_map(from_columns({short_col}))[0] == doctest::Approx(1.6));
}

TEST_CASE("lower bound when k1 is zero") {
  std::vector<double> col{0.3, 0.1, 0.5, 0.2, 0.6, 0.4};
  const auto by_min = confidence_bundle(from_columns({col}), 0.05);
  CHECK(by_min.indices.k1 == 0);
  CHECK(by_min.lower[0] == 0.1);
  CHECK(by_min.upper[0] == 0.6);
  CHECK(by_min.smoothed[0] == doctest::Approx(0.3));  // ranks 1..5
  const auto by_zero = confidence_bundle(from_columns({col}), 0.05, LowerFloor::kZero);
  CHECK(by_zero.lower[0] == 0.0);
  CHECK_THROWS_AS(confidence_bundle(from_columns({std::vector<double>(5, 1.0)}), 0.05),
                  InsufficientSamples);
}

TEST_CASE("bundle properties on random matrices") {
  std::mt19937_64 rng(9);
  std::exponential_distribution<double> dist(2.0);
  for (std::size_t n : {6u, 10u, 23u, 64u, 101u}) {
    std::vector<std::vector<double>> cols(7, std::vector<double>(n));
    for (auto& c : cols) {
      for (double& v : c) v = dist(rng);
    }
    const auto bundle = confidence_bundle(from_columns(cols), 0.05);
    const auto [k1, k2, nn, alpha] = bundle.indices;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      CAPTURE(n);
      CAPTURE(j);
      CHECK(bundle.lower[j] <= bundle.smoothed[j]);
      CHECK(bundle.smoothed[j] <= bundle.upper[j]);
      if (k1 > 0) CHECK(bundle.lower[j] == oracle::order_stat(cols[j], k1));
      CHECK(bundle.upper[j] == oracle::order_stat(cols[j], k2));
      double mid = 0.0;
      for (std::size_t r = k1 + 1; r <= k2 - 1; ++r) mid += oracle::order_stat(cols[j], r);
      CHECK(bundle.smoothed[j] == doctest::Approx(mid / (k2 - k1 - 1)).epsilon(1e-12));
    }
  }
}

TEST_CASE("plain mean map") {
  const auto m = SampleMatrix::from_rows({{0.0, 2.0}, {1.0, 4.0}});
  CHECK(smoothgrad_map(m) == std::vector<double>{0.5, 3.0});
  const auto single = SampleMatrix::from_rows({{0.25, 0.75}});
  CHECK(smoothgrad_map(single) == std::vector<double>{0.25, 0.75});
}

TEST_CASE("tie break") {
  std::mt19937_64 rng(1);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> values(20 * 8);
  for (double& v : values) v = coin(rng) ? 1.0 : 0.0;
  const SampleMatrix binary(20, 8, values);

  CHECK(tie_break(binary, 0.0, 42) == binary);

  const auto broken = tie_break(binary, 1e-6, 42);
  CHECK(broken.tie_broken());
  for (std::size_t j = 0; j < binary.n_features(); ++j) {
    const auto col = broken.column(j);
    CHECK(std::set<double>(col.begin(), col.end()).size() == col.size());
  }
  for (std::size_t k = 0; k < values.size(); ++k) {
    CHECK(std::abs(broken.values()[k] - values[k]) < 0.01);
  }
  CHECK(tie_break(binary, 1e-6, 42) == broken);
  CHECK_FALSE(tie_break(binary, 1e-6, 43) == broken);
  CHECK_THROWS_AS(tie_break(binary, -1.0, 42), DomainError);
}
