#include <cmath>
#include <limits>

#include "facloc/core.hpp"
#include "facloc/kernels.hpp"

namespace facloc {

void validate_config(const SolveConfig& cfg, Index n_points, Index n_sites) {
  if (cfg.k < 1) throw validation_error("k must be at least 1");
  if (cfg.k > n_sites)
    throw k_too_large("k=" + std::to_string(cfg.k) + " exceeds dictionary size " +
                      std::to_string(n_sites));
  if (cfg.k > n_points)
    throw k_too_large("k=" + std::to_string(cfg.k) + " exceeds point count " +
                      std::to_string(n_points));
  if (cfg.swaps_p < 1 || cfg.swaps_p > cfg.k)
    throw validation_error("p must lie in [1, k]; got p=" + std::to_string(cfg.swaps_p) +
                           ", k=" + std::to_string(cfg.k));
  if (cfg.max_iters < 1) throw validation_error("max-iters must be at least 1");
  if (!(cfg.oversize_factor > 1.0))
    throw validation_error("oversize factor must exceed 1");
}

void require_same_dim(const EmbeddingSet& emb, const SiteDictionary& dict) {
  if (emb.dim() != dict.dim())
    throw dimension_mismatch("embedding dimension " + std::to_string(emb.dim()) +
                             " does not match dictionary dimension " + std::to_string(dict.dim()));
}

Matrix l2_normalize_rows(const Matrix& m) {
  Matrix out = m;
  kernels::normalize_rows(out);
  return out;
}

void l2_normalize_rows_inplace(Matrix& m) { kernels::normalize_rows(m); }

double sq_dist(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw dimension_mismatch("sq_dist: vector lengths " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
  double s = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    const double d = a[t] - b[t];
    s += d * d;
  }
  return s;
}

Index nearest_site(std::span<const double> v, const SiteDictionary& dict,
                   std::span<const Index> exclude) {
  if (static_cast<Index>(v.size()) != dict.dim())
    throw dimension_mismatch("nearest_site: vector length " + std::to_string(v.size()) +
                             " vs dictionary dimension " + std::to_string(dict.dim()));
  const auto excluded = [&](Index j) {
    for (Index e : exclude)
      if (e == j) return true;
    return false;
  };
  Index best = kNoSite;
  double bestd = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < dict.size(); ++j) {
    if (excluded(j)) continue;
    const double d = sq_dist(v, dict.vectors.row(j));
    if (d < bestd) {
      bestd = d;
      best = j;
    }
  }
  if (best == kNoSite) throw empty_candidate_set("nearest_site: every site excluded");
  return best;
}

}  // namespace facloc
