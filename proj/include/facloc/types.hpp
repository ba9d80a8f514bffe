#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "facloc/errors.hpp"

namespace facloc {

using Index = std::int64_t;

// Sentinel used wherever an operation needs to mark "no site chosen"
// (e.g. the projected candidate of an empty cluster).
inline constexpr Index kNoSite = -1;

// Dense row-major matrix of doubles. Vectors are loaded from 32-bit floats on
// disk but all arithmetic runs in double precision.
struct Matrix {
  Index rows = 0;
  Index cols = 0;
  std::vector<double> data;  // rows*cols, row-major

  Matrix() = default;
  Matrix(Index r, Index c)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0) {}

  std::span<double> row(Index i) {
    return {data.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(cols),
            static_cast<std::size_t>(cols)};
  }
  std::span<const double> row(Index i) const {
    return {data.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(cols),
            static_cast<std::size_t>(cols)};
  }
  double& at(Index i, Index j) { return data[static_cast<std::size_t>(i * cols + j)]; }
  double at(Index i, Index j) const { return data[static_cast<std::size_t>(i * cols + j)]; }
};

// The vectors to be clustered (one row per point).
struct EmbeddingSet {
  Matrix vectors;
  std::vector<std::string> ids;  // optional; empty or one id per row
  bool normalized = false;       // rows are unit L2 norm

  Index size() const { return vectors.rows; }
  Index dim() const { return vectors.cols; }
};

// The finite labeled set of candidate centers ("sites").
struct SiteDictionary {
  Matrix vectors;
  std::vector<std::string> labels;  // one unique label per row
  bool normalized = false;

  Index size() const { return vectors.rows; }
  Index dim() const { return vectors.cols; }
};

// A feasible solution: exactly k distinct open sites plus a point->cluster map.
struct ClusterState {
  std::vector<Index> centers;     // k distinct site indices into the dictionary
  std::vector<Index> assignment;  // one cluster id in [0, k) per point
  double loss = std::numeric_limits<double>::infinity();  // WCSS against the open sites
};

struct SolveConfig {
  Index k = 1;
  Index swaps_p = 1;               // number of centers replaced per proposal
  Index max_iters = 30;
  double oversize_factor = 3.0;    // repair trigger: largest cluster > factor * N/k
  std::uint64_t seed = 0;
  bool normalize = false;          // L2-normalize data and recomputed means
};

// Default proposal width: half the cluster count, at least one.
inline Index default_swaps_p(Index k) { return k / 2 > 1 ? k / 2 : 1; }

// Throws validation errors for parameter combinations no solver accepts.
void validate_config(const SolveConfig& cfg, Index n_points, Index n_sites);

// Throws if the two collections do not share a vector dimension.
void require_same_dim(const EmbeddingSet& emb, const SiteDictionary& dict);

}  // namespace facloc
