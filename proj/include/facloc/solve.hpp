#pragma once

#include <span>
#include <utility>
#include <vector>

#include "facloc/init.hpp"
#include "facloc/types.hpp"

namespace facloc {

enum class SolverKind { relaxed, pam };

const char* to_string(SolverKind s);

// Record of one solver run. Accepted-iteration losses strictly decrease and
// best.loss never exceeds any recorded loss.
struct SolveTrace {
  enum class RepairKind { empty_cluster, oversized_cluster };

  struct RepairEvent {
    Index iteration = 0;
    RepairKind kind = RepairKind::empty_cluster;
    double loss_after = 0.0;
  };

  struct Record {
    Index iteration = 0;
    std::vector<Index> centers;
    double loss = 0.0;
    bool accepted = false;
  };

  std::vector<Record> records;
  std::vector<RepairEvent> repairs;
  ClusterState best;  // lowest-loss feasible state encountered
};

// Total within-cluster sum of squared distances of every point to the site
// serving its cluster. Recomputed from scratch; fixed summation order.
double wcss_loss(const EmbeddingSet& emb, const SiteDictionary& dict, const ClusterState& state);

// Each point joins the nearest open site (ties to the lowest cluster index).
std::vector<Index> assign_voronoi(const EmbeddingSet& emb, const SiteDictionary& dict,
                                  std::span<const Index> centers);

// For every cluster: unconstrained mean of its members (L2-normalized first
// when normalize_means is set), then the nearest dictionary site. Empty
// clusters yield kNoSite. When two clusters project onto the same site, the
// one with lower member loss against that site keeps it (ties to the lower
// cluster id); the losers yield kNoSite.
std::vector<Index> project_centers(const EmbeddingSet& emb, const SiteDictionary& dict,
                                   std::span<const Index> assignment, Index k,
                                   bool normalize_means);

// Replace the center of every empty cluster with the unused site that is the
// 1-nearest site of the most points (votes over the full dictionary, most
// popular first; ties to the lower site index), then reassign by Voronoi.
// Identity when no cluster is empty. Never increases the loss.
// Throws no_unused_sites when there are fewer unused sites than empty
// clusters.
ClusterState repair_empty(const EmbeddingSet& emb, const SiteDictionary& dict,
                          const ClusterState& state);

// When the largest cluster exceeds oversize_factor * N/k members, its center
// is replaced by the most-voted unused site (same vote as repair_empty) and
// points are reassigned by Voronoi; otherwise identity. May increase the
// loss; callers rely on best-state tracking.
ClusterState repair_oversized(const EmbeddingSet& emb, const SiteDictionary& dict,
                              const ClusterState& state, double oversize_factor);

// Relaxed discrete local search: alternate Voronoi assignment, mean
// projection onto the dictionary, and seeded random p-subset center
// replacement accepted only on strict loss improvement, with empty- and
// oversized-cluster repairs as triggered. Returns the best state plus the
// full trace.
std::pair<ClusterState, SolveTrace> relaxed_local_search(const EmbeddingSet& emb,
                                                         const SiteDictionary& dict,
                                                         const SolveConfig& cfg,
                                                         const InitAssignment& init);

// Swap-based local search over the entire dictionary: scan swaps of
// cfg.swaps_p open sites for closed ones in (open-site, candidate-site)
// lexicographic order and apply the first strict improvement; stop when a
// full scan finds none or cfg.max_iters swaps were applied.
std::pair<ClusterState, SolveTrace> pam_local_search(const EmbeddingSet& emb,
                                                     const SiteDictionary& dict,
                                                     const SolveConfig& cfg,
                                                     std::span<const Index> init_centers);

// Exhaustive minimum over all k-subsets of sites (ties resolved toward the
// lexicographically smallest subset). Throws instance_too_large when the
// subset count exceeds 1e7.
ClusterState brute_force_oracle(const EmbeddingSet& emb, const SiteDictionary& dict, Index k);

// Turn a point partition into k distinct initial centers: project, then fill
// collisions/empties with the most-voted unused sites.
std::vector<Index> initial_centers_from_assignment(const EmbeddingSet& emb,
                                                   const SiteDictionary& dict,
                                                   std::span<const Index> assignment, Index k,
                                                   bool normalize_means);

// Convenience driver: run `init` then the chosen solver. When `precomputed`
// is non-null it is used instead of recomputing the init partition (the init
// methods that do not look at the dictionary can be shared across quantiles).
std::pair<ClusterState, SolveTrace> run_solver(const EmbeddingSet& emb, const SiteDictionary& dict,
                                               const SolveConfig& cfg, InitMethod init,
                                               SolverKind solver,
                                               const InitAssignment* precomputed = nullptr);

}  // namespace facloc
