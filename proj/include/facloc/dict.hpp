#pragma once

#include <span>
#include <string>
#include <vector>

#include "facloc/solve.hpp"
#include "facloc/types.hpp"

namespace facloc {

// Generality scoring of a dictionary: how aligned each site is with the
// average site embedding. High scores mark "generic" sites that tend to
// absorb everything when opened.
struct GeneralityReport {
  std::vector<double> avg_embedding;  // mean of all dictionary rows
  std::vector<double> scores;         // scores[i] = dot(site_i, avg_embedding)
  std::vector<Index> order;           // site indices sorted by ascending score, ties by index
};

GeneralityReport generality_scores(const SiteDictionary& dict);

// Site indices kept at quantile q: the floor(q*|scores|) lowest-scoring sites
// (never fewer than one), ties at the boundary resolved toward lower indices,
// returned in ascending index order. Throws invalid_quantile outside (0, 1].
std::vector<Index> quantile_keep_indices(std::span<const double> scores, double q);

// The sub-dictionary of the kept sites, preserving relative order and labels.
SiteDictionary filter_by_quantile(const SiteDictionary& dict, std::span<const double> scores,
                                  double q);

struct SweepRecord {
  double q = 0.0;
  Index dict_size = 0;              // |W_q|
  std::vector<Index> kept_sites;    // original site indices retained at this q
  bool ok = false;
  std::string error;                // set when ok == false
  ClusterState state;               // centers index into the filtered dictionary
  double entropy = 0.0;             // assignment entropy of state
};

struct QuantileSweepResult {
  std::vector<SweepRecord> records;  // one per grid value, in grid order
  Index chosen_index = -1;           // record with maximal entropy (ties -> larger q)
  double chosen_q = 0.0;
};

// Filter the dictionary at every q in q_grid and run the full solve on each
// filtered dictionary with the identical config/seed; select the q whose
// final assignment has maximal entropy. Per-q failures (e.g. |W_q| < k) are
// recorded without aborting; throws solver_error when every q fails.
// Records are assembled in grid order and each solve is independently seeded,
// so parallel and serial execution produce identical results.
QuantileSweepResult sweep_quantiles(const EmbeddingSet& emb, const SiteDictionary& dict,
                                    const SolveConfig& cfg, std::span<const double> q_grid,
                                    InitMethod init = InitMethod::ward,
                                    SolverKind solver = SolverKind::relaxed);

// Parse "start:stop:step" into an inclusive grid (1e-9 endpoint tolerance).
// Each value must lie in (0, 1]; throws validation_error on malformed input.
std::vector<double> parse_q_grid(const std::string& text);

}  // namespace facloc
