#pragma once

#include <cstdint>
#include <vector>

#include "facloc/types.hpp"

namespace facloc {

enum class InitMethod { ward, kmeans, greedy };

const char* to_string(InitMethod m);

// A k-way partition of the points used to bootstrap a solver.
struct InitAssignment {
  std::vector<Index> labels;  // one cluster id in [0, k) per point
  Index k = 0;
  InitMethod method = InitMethod::ward;
};

struct WardOptions {
  // Above this row count the full O(N^2) distance matrix is not built;
  // a seeded uniform subsample is clustered instead and the remaining points
  // join the nearest subsample centroid.
  Index max_exact_points = 20000;
  std::uint64_t seed = 0;
};

// Bottom-up Ward agglomeration (Lance-Williams recurrence on squared
// Euclidean merge costs), merging the globally cheapest pair each step until
// k clusters remain. Cluster ids are ordered by smallest member index.
InitAssignment ward_init(const EmbeddingSet& emb, Index k, const WardOptions& opts = {});

// Seeded k-means++ seeding followed by Lloyd iterations (at most 300, stops at
// an assignment fixed point). Empty clusters are refilled with the point
// farthest from its center. Cluster ids are ordered by smallest member index.
InitAssignment kmeans_init(const EmbeddingSet& emb, Index k, std::uint64_t seed);

// Forward-greedy site opening: k rounds, each opening the site whose addition
// minimizes the total squared distance of every point to its nearest open
// site (ties to the lowest site index). Returns the opened site indices in
// the order chosen.
std::vector<Index> greedy_open(const EmbeddingSet& emb, const SiteDictionary& dict, Index k);

}  // namespace facloc
