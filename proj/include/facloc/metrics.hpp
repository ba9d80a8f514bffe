#pragma once

#include <span>
#include <vector>

#include "facloc/types.hpp"

namespace facloc {

// Cross-tab of two labelings over the same points. Rows follow the sorted
// distinct pred labels, columns the sorted distinct truth labels.
std::vector<std::vector<Index>> contingency_table(std::span<const Index> pred,
                                                  std::span<const Index> truth);

// Fraction of points correctly labeled under the best one-to-one matching of
// predicted clusters to truth classes (exact rectangular assignment).
double clustering_accuracy(std::span<const Index> pred, std::span<const Index> truth);

// Normalized mutual information, geometric-mean normalization, natural log.
// Both labelings constant -> 1; exactly one constant -> 0.
double nmi(std::span<const Index> pred, std::span<const Index> truth);

// Adjusted Rand index via pair counting (exact integer arithmetic).
double ari(std::span<const Index> pred, std::span<const Index> truth);

// Shannon entropy (nats) of the cluster-size distribution; empty clusters
// contribute nothing. k is the number of cluster ids, labels in [0, k).
double assignment_entropy(std::span<const Index> labels, Index k);

struct MetricsReport {
  double acc = 0.0;
  double nmi = 0.0;
  double ari = 0.0;
  double entropy = 0.0;  // of the predicted assignment
  double loss = 0.0;     // caller-supplied (0 when not applicable)
  std::vector<std::vector<Index>> contingency;
};

MetricsReport evaluate_clustering(std::span<const Index> pred, std::span<const Index> truth,
                                  Index k_pred, double loss = 0.0);

}  // namespace facloc
