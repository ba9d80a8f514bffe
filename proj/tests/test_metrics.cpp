#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <doctest.h>

#include "facloc/metrics.hpp"

using namespace facloc;

namespace {

// Exhaustive maximum over all K! one-to-one matchings (test oracle for the
// assignment-based accuracy).
double acc_factorial_oracle(std::span<const Index> pred, std::span<const Index> truth) {
  const auto table = contingency_table(pred, truth);
  const std::size_t r = table.size();
  const std::size_t c = table[0].size();
  const std::size_t k = std::max(r, c);
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Index best = 0;
  do {
    Index agree = 0;
    for (std::size_t i = 0; i < r; ++i)
      if (perm[i] < c) agree += table[i][perm[i]];
    best = std::max(best, agree);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(pred.size());
}

// Direct pair-counting ARI over all N(N-1)/2 point pairs (test oracle).
double ari_pair_oracle(std::span<const Index> pred, std::span<const Index> truth) {
  const std::size_t n = pred.size();
  double a = 0, b = 0, c = 0, d = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool same_pred = pred[i] == pred[j];
      const bool same_truth = truth[i] == truth[j];
      if (same_pred && same_truth)
        ++a;
      else if (same_pred)
        ++c;
      else if (same_truth)
        ++b;
      else
        ++d;
    }
  const double total = a + b + c + d;
  const double expected = (a + c) * (a + b) / total;
  const double maximum = 0.5 * ((a + c) + (a + b));
  if (maximum == expected) return 1.0;
  return (a - expected) / (maximum - expected);
}

std::vector<Index> random_labels(std::size_t n, Index k, std::mt19937_64& rng) {
  std::vector<Index> out(n);
  std::uniform_int_distribution<Index> pick(0, k - 1);
  for (auto& v : out) v = pick(rng);
  return out;
}

std::vector<Index> relabel(std::span<const Index> labels, std::span<const Index> perm) {
  std::vector<Index> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    out[i] = perm[static_cast<std::size_t>(labels[i])];
  return out;
}

const std::vector<Index> kCrossPred{0, 1, 0, 1};
const std::vector<Index> kCrossTruth{0, 0, 1, 1};

}  // namespace

TEST_CASE("contingency_table counts co-occurrences with sorted label order") {
  const std::vector<Index> pred{0, 0, 1, 1, 1};
  const std::vector<Index> truth{5, 5, 5, 7, 7};
  const auto table = contingency_table(pred, truth);
  REQUIRE(table.size() == 2);
  REQUIRE(table[0].size() == 2);
  CHECK(table[0][0] == 2);
  CHECK(table[0][1] == 0);
  CHECK(table[1][0] == 1);
  CHECK(table[1][1] == 2);
}

TEST_CASE("clustering_accuracy equals 1 for identical and relabeled partitions") {
  const std::vector<Index> truth{0, 1, 2, 0, 1, 2, 2};
  CHECK(clustering_accuracy(truth, truth) == 1.0);
  const std::vector<Index> perm{2, 0, 1};
  CHECK(clustering_accuracy(relabel(truth, perm), truth) == 1.0);
}

TEST_CASE("clustering_accuracy on the crossing example is one half") {
  CHECK(clustering_accuracy(kCrossPred, kCrossTruth) == 0.5);
}

TEST_CASE("clustering_accuracy handles unequal cluster counts") {
  const std::vector<Index> pred{0, 0, 0, 0};
  const std::vector<Index> truth{0, 0, 1, 1};
  CHECK(clustering_accuracy(pred, truth) == 0.5);
  const std::vector<Index> pred_fine{0, 1, 2, 3};
  CHECK(clustering_accuracy(pred_fine, truth) == 0.5);
}

TEST_CASE("clustering_accuracy matches the factorial-matching oracle") {
  std::mt19937_64 rng(99);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + rng() % 30;
    const Index kp = 1 + static_cast<Index>(rng() % 6);
    const Index kt = 1 + static_cast<Index>(rng() % 6);
    const auto pred = random_labels(n, kp, rng);
    const auto truth = random_labels(n, kt, rng);
    CHECK(clustering_accuracy(pred, truth) == acc_factorial_oracle(pred, truth));
  }
}

TEST_CASE("nmi conventions on degenerate and hand inputs") {
  const std::vector<Index> two_classes{0, 1, 0, 1};
  CHECK(nmi(two_classes, two_classes) == 1.0);
  const std::vector<Index> constant{3, 3, 3, 3};
  CHECK(nmi(constant, kCrossTruth) == 0.0);
  CHECK(nmi(kCrossPred, kCrossTruth) == 0.0);
  CHECK(nmi(constant, constant) == 1.0);
}

TEST_CASE("ari on hand examples, including the exact -0.5 crossing value") {
  const std::vector<Index> truth{0, 1, 2, 0, 1, 2};
  CHECK(ari(truth, truth) == 1.0);
  CHECK(ari(kCrossPred, kCrossTruth) == -0.5);
  const std::vector<Index> ones(5, 1);
  CHECK(ari(ones, ones) == 1.0);
}

TEST_CASE("ari matches exhaustive pair counting") {
  std::mt19937_64 rng(123);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + rng() % 11;  // N <= 12
    const Index kp = 1 + static_cast<Index>(rng() % 4);
    const Index kt = 1 + static_cast<Index>(rng() % 4);
    const auto pred = random_labels(n, kp, rng);
    const auto truth = random_labels(n, kt, rng);
    CHECK(std::abs(ari(pred, truth) - ari_pair_oracle(pred, truth)) <= 1e-12);
  }
}

TEST_CASE("metrics are invariant under relabeling") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t n = 6 + rng() % 20;
    const Index k = 2 + static_cast<Index>(rng() % 4);
    const auto pred = random_labels(n, k, rng);
    const auto truth = random_labels(n, k, rng);
    std::vector<Index> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto shuffled = relabel(pred, perm);
    CHECK(clustering_accuracy(shuffled, truth) ==
          doctest::Approx(clustering_accuracy(pred, truth)).epsilon(1e-12));
    CHECK(nmi(shuffled, truth) == doctest::Approx(nmi(pred, truth)).epsilon(1e-12));
    CHECK(ari(shuffled, truth) == doctest::Approx(ari(pred, truth)).epsilon(1e-12));
  }
}

TEST_CASE("metric ranges hold on random inputs") {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t n = 4 + rng() % 20;
    const auto pred = random_labels(n, 3, rng);
    const auto truth = random_labels(n, 3, rng);
    const double a = clustering_accuracy(pred, truth);
    const double m = nmi(pred, truth);
    const double r = ari(pred, truth);
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
    CHECK(m >= 0.0);
    CHECK(m <= 1.0);
    CHECK(r >= -0.5);
    CHECK(r <= 1.0);
  }
}

TEST_CASE("assignment_entropy on hand size profiles") {
  std::vector<Index> two_even;
  for (int i = 0; i < 5; ++i) two_even.push_back(0);
  for (int i = 0; i < 5; ++i) two_even.push_back(1);
  CHECK(assignment_entropy(two_even, 2) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  const std::vector<Index> degenerate(10, 0);
  CHECK(assignment_entropy(degenerate, 2) == 0.0);

  const std::vector<Index> mixed{0, 1, 2, 2};
  CHECK(assignment_entropy(mixed, 3) == doctest::Approx(1.0397207708399179).epsilon(1e-12));
}

TEST_CASE("assignment_entropy is bounded by ln k and validates labels") {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 30; ++rep) {
    const Index k = 2 + static_cast<Index>(rng() % 5);
    const auto labels = random_labels(12, k, rng);
    const double h = assignment_entropy(labels, k);
    CHECK(h >= 0.0);
    CHECK(h <= std::log(static_cast<double>(k)) + 1e-12);
  }
  const std::vector<Index> bad{0, 5};
  CHECK_THROWS_AS(assignment_entropy(bad, 2), validation_error);
}

TEST_CASE("length mismatches are rejected") {
  const std::vector<Index> a{0, 1, 2};
  const std::vector<Index> b{0, 1};
  CHECK_THROWS_AS(clustering_accuracy(a, b), validation_error);
  CHECK_THROWS_AS(nmi(a, b), validation_error);
  CHECK_THROWS_AS(ari(a, b), validation_error);
}

TEST_CASE("evaluate_clustering bundles the full report") {
  const auto report = evaluate_clustering(kCrossPred, kCrossTruth, 2, 3.25);
  CHECK(report.acc == 0.5);
  CHECK(report.nmi == 0.0);
  CHECK(report.ari == -0.5);
  CHECK(report.entropy == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(report.loss == 3.25);
  REQUIRE(report.contingency.size() == 2);
  CHECK(report.contingency[0][0] + report.contingency[0][1] == 2);
}
