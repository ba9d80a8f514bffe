#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "facloc/core.hpp"
#include "facloc/kernels.hpp"
#include "facloc/solve.hpp"

namespace facloc {

const char* to_string(SolverKind s) {
  switch (s) {
    case SolverKind::relaxed: return "relaxed";
    case SolverKind::pam: return "pam";
  }
  return "?";
}

namespace {

std::vector<Index> iota_indices(Index n) {
  std::vector<Index> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), Index{0});
  return v;
}

std::vector<Index> cluster_sizes(std::span<const Index> assignment, Index k) {
  std::vector<Index> sizes(static_cast<std::size_t>(k), 0);
  for (Index a : assignment) ++sizes[static_cast<std::size_t>(a)];
  return sizes;
}

// Voronoi assignment plus loss in one pass; the canonical way every state is
// materialized, so equal center sets always produce bitwise-equal losses.
ClusterState make_state(const EmbeddingSet& emb, const SiteDictionary& dict,
                        std::vector<Index> centers) {
  ClusterState st;
  st.centers = std::move(centers);
  st.assignment.resize(static_cast<std::size_t>(emb.size()));
  std::vector<double> dist(static_cast<std::size_t>(emb.size()));
  kernels::nearest_among(emb.vectors, dict.vectors, st.centers, st.assignment, dist);
  st.loss = kernels::sum_ordered(dist);
  return st;
}

// One vote per point for its nearest site over the whole dictionary.
std::vector<Index> full_dict_votes(const EmbeddingSet& emb, const SiteDictionary& dict) {
  const auto all = iota_indices(dict.size());
  std::vector<Index> nearest(static_cast<std::size_t>(emb.size()));
  kernels::nearest_among(emb.vectors, dict.vectors, all, nearest, {});
  std::vector<Index> votes(static_cast<std::size_t>(dict.size()), 0);
  for (Index s : nearest) ++votes[static_cast<std::size_t>(s)];
  return votes;
}

// Unused sites ordered by descending vote count, ties toward lower index.
std::vector<Index> popular_unused(std::span<const Index> votes, std::span<const char> used) {
  std::vector<Index> unused;
  for (Index j = 0; j < static_cast<Index>(votes.size()); ++j)
    if (!used[static_cast<std::size_t>(j)]) unused.push_back(j);
  std::stable_sort(unused.begin(), unused.end(), [&](Index a, Index b) {
    return votes[static_cast<std::size_t>(a)] > votes[static_cast<std::size_t>(b)];
  });
  return unused;
}

std::vector<char> used_mask(std::span<const Index> centers, Index n_sites) {
  std::vector<char> used(static_cast<std::size_t>(n_sites), 0);
  for (Index c : centers)
    if (c != kNoSite) used[static_cast<std::size_t>(c)] = 1;
  return used;
}

void validate_state(const EmbeddingSet& emb, const SiteDictionary& dict,
                    const ClusterState& state) {
  const Index k = static_cast<Index>(state.centers.size());
  if (k < 1) throw validation_error("state has no centers");
  if (static_cast<Index>(state.assignment.size()) != emb.size())
    throw dimension_mismatch("assignment length " + std::to_string(state.assignment.size()) +
                             " does not match point count " + std::to_string(emb.size()));
  std::set<Index> distinct;
  for (Index c : state.centers) {
    if (c < 0 || c >= dict.size())
      throw validation_error("center site " + std::to_string(c) + " outside dictionary");
    if (!distinct.insert(c).second)
      throw validation_error("center site " + std::to_string(c) + " opened twice");
  }
  for (Index a : state.assignment)
    if (a < 0 || a >= k)
      throw validation_error("assignment value " + std::to_string(a) + " outside [0, " +
                             std::to_string(k) + ")");
}

// C(n, r) saturated at cap (avoids overflow; callers only care up to cap).
std::uint64_t choose_capped(Index n, Index r, std::uint64_t cap) {
  if (r < 0 || r > n) return 0;
  if (r > n - r) r = n - r;
  std::uint64_t result = 1;
  for (Index t = 1; t <= r; ++t) {
    // result *= (n - r + t) / t, kept exact by multiplying before dividing
    const std::uint64_t num = static_cast<std::uint64_t>(n - r + t);
    if (result > cap * static_cast<std::uint64_t>(t) / num + 1) return cap + 1;
    result = result * num / static_cast<std::uint64_t>(t);
    if (result > cap) return cap + 1;
  }
  return result;
}

}  // namespace

double wcss_loss(const EmbeddingSet& emb, const SiteDictionary& dict, const ClusterState& state) {
  require_same_dim(emb, dict);
  validate_state(emb, dict, state);
  std::vector<double> dist(static_cast<std::size_t>(emb.size()));
  for (Index i = 0; i < emb.size(); ++i) {
    const Index site = state.centers[static_cast<std::size_t>(state.assignment[static_cast<std::size_t>(i)])];
    dist[static_cast<std::size_t>(i)] = sq_dist(emb.vectors.row(i), dict.vectors.row(site));
  }
  return kernels::sum_ordered(dist);
}

std::vector<Index> assign_voronoi(const EmbeddingSet& emb, const SiteDictionary& dict,
                                  std::span<const Index> centers) {
  require_same_dim(emb, dict);
  if (centers.empty()) throw validation_error("assign_voronoi: no centers");
  for (Index c : centers)
    if (c < 0 || c >= dict.size())
      throw validation_error("assign_voronoi: center site " + std::to_string(c) +
                             " outside dictionary");
  std::vector<Index> out(static_cast<std::size_t>(emb.size()));
  kernels::nearest_among(emb.vectors, dict.vectors, centers, out, {});
  return out;
}

std::vector<Index> project_centers(const EmbeddingSet& emb, const SiteDictionary& dict,
                                   std::span<const Index> assignment, Index k,
                                   bool normalize_means) {
  require_same_dim(emb, dict);
  if (k < 1) throw validation_error("project_centers: k must be at least 1");
  for (Index a : assignment)
    if (a < 0 || a >= k)
      throw validation_error("project_centers: assignment value " + std::to_string(a) +
                             " outside [0, " + std::to_string(k) + ")");
  Matrix sums(k, emb.dim());
  std::vector<Index> counts;
  kernels::cluster_sums(emb.vectors, assignment, k, sums, counts);

  std::vector<Index> cand(static_cast<std::size_t>(k), kNoSite);
  std::vector<double> mean(static_cast<std::size_t>(emb.dim()));
  for (Index j = 0; j < k; ++j) {
    if (counts[static_cast<std::size_t>(j)] == 0) continue;
    const auto s = sums.row(j);
    double ss = 0.0;
    for (Index t = 0; t < emb.dim(); ++t) {
      mean[static_cast<std::size_t>(t)] = s[t] / static_cast<double>(counts[static_cast<std::size_t>(j)]);
      ss += mean[static_cast<std::size_t>(t)] * mean[static_cast<std::size_t>(t)];
    }
    if (normalize_means && ss > 0.0) {
      const double inv = 1.0 / std::sqrt(ss);
      for (double& v : mean) v *= inv;
    }
    cand[static_cast<std::size_t>(j)] = nearest_site(mean, dict);
  }

  // Collisions: the cluster whose members sit closest to the contested site
  // keeps it (ties to the lower cluster id); the rest lose their candidate.
  for (Index j = 0; j < k; ++j) {
    const Index site = cand[static_cast<std::size_t>(j)];
    if (site == kNoSite) continue;
    bool contested = false;
    for (Index j2 = j + 1; j2 < k; ++j2)
      if (cand[static_cast<std::size_t>(j2)] == site) contested = true;
    if (!contested) continue;
    const auto member_loss = [&](Index cluster) {
      double total = 0.0;
      for (Index i = 0; i < emb.size(); ++i)
        if (assignment[static_cast<std::size_t>(i)] == cluster)
          total += sq_dist(emb.vectors.row(i), dict.vectors.row(site));
      return total;
    };
    Index winner = j;
    double winner_loss = member_loss(j);
    for (Index j2 = j + 1; j2 < k; ++j2) {
      if (cand[static_cast<std::size_t>(j2)] != site) continue;
      const double l2 = member_loss(j2);
      if (l2 < winner_loss) {
        winner = j2;
        winner_loss = l2;
      }
    }
    for (Index j2 = j; j2 < k; ++j2)
      if (cand[static_cast<std::size_t>(j2)] == site && j2 != winner)
        cand[static_cast<std::size_t>(j2)] = kNoSite;
  }
  return cand;
}

ClusterState repair_empty(const EmbeddingSet& emb, const SiteDictionary& dict,
                          const ClusterState& state) {
  require_same_dim(emb, dict);
  validate_state(emb, dict, state);
  const Index k = static_cast<Index>(state.centers.size());
  const auto sizes = cluster_sizes(state.assignment, k);
  std::vector<Index> empties;
  for (Index j = 0; j < k; ++j)
    if (sizes[static_cast<std::size_t>(j)] == 0) empties.push_back(j);
  if (empties.empty()) return state;

  const auto votes = full_dict_votes(emb, dict);
  auto used = used_mask(state.centers, dict.size());
  const auto ranked = popular_unused(votes, used);
  if (ranked.size() < empties.size())
    throw no_unused_sites("repair_empty: " + std::to_string(empties.size()) +
                          " empty clusters but only " + std::to_string(ranked.size()) +
                          " unused sites");
  std::vector<Index> centers = state.centers;
  for (std::size_t e = 0; e < empties.size(); ++e)
    centers[static_cast<std::size_t>(empties[e])] = ranked[e];
  return make_state(emb, dict, std::move(centers));
}

ClusterState repair_oversized(const EmbeddingSet& emb, const SiteDictionary& dict,
                              const ClusterState& state, double oversize_factor) {
  require_same_dim(emb, dict);
  validate_state(emb, dict, state);
  if (!(oversize_factor > 1.0))
    throw validation_error("repair_oversized: oversize factor must exceed 1");
  const Index k = static_cast<Index>(state.centers.size());
  const auto sizes = cluster_sizes(state.assignment, k);
  Index largest = 0;
  for (Index j = 1; j < k; ++j)
    if (sizes[static_cast<std::size_t>(j)] > sizes[static_cast<std::size_t>(largest)]) largest = j;
  const double threshold =
      oversize_factor * static_cast<double>(emb.size()) / static_cast<double>(k);
  if (static_cast<double>(sizes[static_cast<std::size_t>(largest)]) <= threshold) return state;

  const auto votes = full_dict_votes(emb, dict);
  auto used = used_mask(state.centers, dict.size());
  const auto ranked = popular_unused(votes, used);
  if (ranked.empty())
    throw no_unused_sites("repair_oversized: every site already in use");
  std::vector<Index> centers = state.centers;
  centers[static_cast<std::size_t>(largest)] = ranked.front();
  return make_state(emb, dict, std::move(centers));
}

std::vector<Index> initial_centers_from_assignment(const EmbeddingSet& emb,
                                                   const SiteDictionary& dict,
                                                   std::span<const Index> assignment, Index k,
                                                   bool normalize_means) {
  auto centers = project_centers(emb, dict, assignment, k, normalize_means);
  bool missing = false;
  for (Index c : centers)
    if (c == kNoSite) missing = true;
  if (!missing) return centers;
  const auto votes = full_dict_votes(emb, dict);
  const auto used = used_mask(centers, dict.size());
  const auto ranked = popular_unused(votes, used);
  std::size_t next = 0;
  for (auto& c : centers) {
    if (c != kNoSite) continue;
    if (next >= ranked.size())
      throw no_unused_sites("cannot seed " + std::to_string(k) + " distinct centers from " +
                            std::to_string(dict.size()) + " sites");
    c = ranked[next++];
  }
  return centers;
}

namespace {

struct BestTracker {
  ClusterState best;
  void offer(const ClusterState& st) {
    if (st.loss < best.loss) best = st;
  }
};

// Empty/oversized repairs as triggered on the current state. When every site
// is already open no repair exists; the state is left as is.
void run_repairs(const EmbeddingSet& emb, const SiteDictionary& dict, const SolveConfig& cfg,
                 ClusterState& state, Index iteration, SolveTrace& trace, BestTracker& best) {
  const Index k = cfg.k;
  const bool can_repair = dict.size() > k;
  if (!can_repair) return;
  // With k distinct centers there are exactly dict.size() - k unused sites, so
  // a fill is only attempted when it can cover every empty cluster; otherwise
  // the state is left as-is (it is still feasible, just with idle centers).
  const auto has_empty = [&](const ClusterState& st) {
    const auto sizes = cluster_sizes(st.assignment, k);
    const auto empties = std::count(sizes.begin(), sizes.end(), Index{0});
    return empties > 0 && empties <= dict.size() - k;
  };
  Index rounds = 0;
  while (rounds < k && has_empty(state)) {
    state = repair_empty(emb, dict, state);
    trace.repairs.push_back({iteration, SolveTrace::RepairKind::empty_cluster, state.loss});
    best.offer(state);
    ++rounds;
  }
  const auto sizes = cluster_sizes(state.assignment, k);
  const Index largest = *std::max_element(sizes.begin(), sizes.end());
  const double threshold = cfg.oversize_factor * static_cast<double>(emb.size()) /
                           static_cast<double>(k);
  if (static_cast<double>(largest) > threshold) {
    state = repair_oversized(emb, dict, state, cfg.oversize_factor);
    trace.repairs.push_back({iteration, SolveTrace::RepairKind::oversized_cluster, state.loss});
    best.offer(state);
    rounds = 0;
    while (rounds < k && has_empty(state)) {
      state = repair_empty(emb, dict, state);
      trace.repairs.push_back({iteration, SolveTrace::RepairKind::empty_cluster, state.loss});
      best.offer(state);
      ++rounds;
    }
  }
}

// Advance a p-subset of [0, n) to its lexicographic successor in place.
bool next_subset(std::vector<Index>& cur, Index n) {
  const Index p = static_cast<Index>(cur.size());
  Index t = p - 1;
  while (t >= 0 && cur[static_cast<std::size_t>(t)] == n - p + t) --t;
  if (t < 0) return false;
  ++cur[static_cast<std::size_t>(t)];
  for (Index u = t + 1; u < p; ++u)
    cur[static_cast<std::size_t>(u)] = cur[static_cast<std::size_t>(u - 1)] + 1;
  return true;
}

std::vector<Index> first_subset(Index p) {
  std::vector<Index> cur(static_cast<std::size_t>(p));
  std::iota(cur.begin(), cur.end(), Index{0});
  return cur;
}

// All p-subsets of [0, k) in lexicographic order (only used when the count is
// small; large spaces are walked lazily with next_subset).
std::vector<std::vector<Index>> all_subsets(Index k, Index p) {
  std::vector<std::vector<Index>> out;
  auto cur = first_subset(p);
  do {
    out.push_back(cur);
  } while (next_subset(cur, k));
  return out;
}

constexpr std::uint64_t kProposalBudget = 50;

// The per-iteration proposal order: every p-subset (seeded-shuffled) when
// there are at most 50, otherwise 50 distinct random draws.
std::vector<std::vector<Index>> draw_subsets(Index k, Index p, std::mt19937_64& rng) {
  const std::uint64_t count = choose_capped(k, p, kProposalBudget);
  if (count <= kProposalBudget) {
    auto subs = all_subsets(k, p);
    std::shuffle(subs.begin(), subs.end(), rng);
    return subs;
  }
  std::set<std::vector<Index>> seen;
  std::vector<std::vector<Index>> out;
  auto pool = iota_indices(k);
  while (out.size() < kProposalBudget) {
    std::vector<Index> pick;
    std::sample(pool.begin(), pool.end(), std::back_inserter(pick),
                static_cast<std::size_t>(p), rng);
    if (seen.insert(pick).second) out.push_back(std::move(pick));
  }
  return out;
}

void record(SolveTrace& trace, Index iteration, const ClusterState& st, bool accepted) {
  trace.records.push_back({iteration, st.centers, st.loss, accepted});
}

// Unit-normalized view of the inputs; copies are materialized only when the
// data is not already flagged normalized.
const EmbeddingSet& maybe_normalize(const EmbeddingSet& emb, bool normalize,
                                    EmbeddingSet& store) {
  if (!normalize || emb.normalized) return emb;
  store = emb;
  kernels::normalize_rows(store.vectors);
  store.normalized = true;
  return store;
}

const SiteDictionary& maybe_normalize(const SiteDictionary& dict, bool normalize,
                                      SiteDictionary& store) {
  if (!normalize || dict.normalized) return dict;
  store = dict;
  kernels::normalize_rows(store.vectors);
  store.normalized = true;
  return store;
}

}  // namespace

std::pair<ClusterState, SolveTrace> relaxed_local_search(const EmbeddingSet& emb_in,
                                                         const SiteDictionary& dict_in,
                                                         const SolveConfig& cfg,
                                                         const InitAssignment& init) {
  require_same_dim(emb_in, dict_in);
  validate_config(cfg, emb_in.size(), dict_in.size());
  if (init.k != cfg.k)
    throw validation_error("init has k=" + std::to_string(init.k) + ", config k=" +
                           std::to_string(cfg.k));
  if (static_cast<Index>(init.labels.size()) != emb_in.size())
    throw dimension_mismatch("init labels cover " + std::to_string(init.labels.size()) +
                             " points, embeddings have " + std::to_string(emb_in.size()));

  EmbeddingSet emb_store;
  SiteDictionary dict_store;
  const EmbeddingSet& emb = maybe_normalize(emb_in, cfg.normalize, emb_store);
  const SiteDictionary& dict = maybe_normalize(dict_in, cfg.normalize, dict_store);

  const Index k = cfg.k;
  SolveTrace trace;
  ClusterState state = make_state(
      emb, dict, initial_centers_from_assignment(emb, dict, init.labels, k, cfg.normalize));
  BestTracker best{state};
  run_repairs(emb, dict, cfg, state, 0, trace, best);
  record(trace, 0, state, true);

  std::mt19937_64 rng(cfg.seed);
  for (Index it = 1; it <= cfg.max_iters; ++it) {
    const auto candidates = project_centers(emb, dict, state.assignment, k, cfg.normalize);
    bool accepted = false;
    for (const auto& subset : draw_subsets(k, cfg.swaps_p, rng)) {
      std::vector<Index> proposed = state.centers;
      bool valid = true;
      bool changed = false;
      for (Index pos : subset) {
        const Index cand = candidates[static_cast<std::size_t>(pos)];
        if (cand == kNoSite) {
          valid = false;
          break;
        }
        if (cand != proposed[static_cast<std::size_t>(pos)]) changed = true;
        proposed[static_cast<std::size_t>(pos)] = cand;
      }
      if (!valid || !changed) continue;
      std::set<Index> distinct(proposed.begin(), proposed.end());
      if (static_cast<Index>(distinct.size()) != k) continue;
      ClusterState next = make_state(emb, dict, std::move(proposed));
      // Comparing against the best feasible loss (never above the current
      // one) keeps accepted losses strictly decreasing even when an
      // oversized-cluster repair raised the working loss in between.
      if (next.loss < best.best.loss) {
        state = std::move(next);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      record(trace, it, state, false);
      break;
    }
    best.offer(state);
    record(trace, it, state, true);
    run_repairs(emb, dict, cfg, state, it, trace, best);
  }
  trace.best = best.best;
  return {best.best, std::move(trace)};
}

std::pair<ClusterState, SolveTrace> pam_local_search(const EmbeddingSet& emb_in,
                                                     const SiteDictionary& dict_in,
                                                     const SolveConfig& cfg,
                                                     std::span<const Index> init_centers) {
  require_same_dim(emb_in, dict_in);
  validate_config(cfg, emb_in.size(), dict_in.size());
  if (static_cast<Index>(init_centers.size()) != cfg.k)
    throw validation_error("pam: init provides " + std::to_string(init_centers.size()) +
                           " centers for k=" + std::to_string(cfg.k));

  EmbeddingSet emb_store;
  SiteDictionary dict_store;
  const EmbeddingSet& emb = maybe_normalize(emb_in, cfg.normalize, emb_store);
  const SiteDictionary& dict = maybe_normalize(dict_in, cfg.normalize, dict_store);

  const Index p = cfg.swaps_p;
  const Index n = emb.size();
  ClusterState state = make_state(emb, dict, {init_centers.begin(), init_centers.end()});
  validate_state(emb, dict, state);
  SolveTrace trace;
  BestTracker best{state};
  record(trace, 0, state, true);

  std::vector<Index> choice(static_cast<std::size_t>(n)), second(static_cast<std::size_t>(n));
  std::vector<double> d1(static_cast<std::size_t>(n)), d2(static_cast<std::size_t>(n));
  std::vector<double> scores(static_cast<std::size_t>(dict.size()));

  for (Index it = 1; it <= cfg.max_iters; ++it) {
    bool applied = false;
    // Open sites scanned in ascending site order, candidates likewise:
    // first-improvement in (open-site, candidate-site) lexicographic order.
    std::vector<Index> open_sorted = state.centers;
    std::sort(open_sorted.begin(), open_sorted.end());
    const auto open = used_mask(state.centers, dict.size());

    if (p == 1) {
      kernels::nearest_two(emb.vectors, dict.vectors, state.centers, choice, d1, second, d2);
      for (Index site : open_sorted) {
        Index pos = 0;
        while (state.centers[static_cast<std::size_t>(pos)] != site) ++pos;
        kernels::swap_scores(emb.vectors, dict.vectors, choice, d1, d2, pos, open, scores);
        for (Index cand = 0; cand < dict.size() && !applied; ++cand) {
          if (open[static_cast<std::size_t>(cand)]) continue;
          if (!(scores[static_cast<std::size_t>(cand)] < state.loss)) continue;
          std::vector<Index> proposed = state.centers;
          proposed[static_cast<std::size_t>(pos)] = cand;
          ClusterState next = make_state(emb, dict, std::move(proposed));
          // Re-verify through the canonical loss so near-ties cannot slip in.
          if (next.loss < state.loss) {
            state = std::move(next);
            applied = true;
          }
        }
        if (applied) break;
      }
    } else {
      std::vector<Index> closed;
      for (Index j = 0; j < dict.size(); ++j)
        if (!open[static_cast<std::size_t>(j)]) closed.push_back(j);
      if (static_cast<Index>(closed.size()) >= p) {
        auto rem = first_subset(p);
        do {
          auto add = first_subset(p);
          do {
            std::vector<Index> proposed = state.centers;
            for (Index t = 0; t < p; ++t) {
              const Index site =
                  open_sorted[static_cast<std::size_t>(rem[static_cast<std::size_t>(t)])];
              Index pos = 0;
              while (proposed[static_cast<std::size_t>(pos)] != site) ++pos;
              proposed[static_cast<std::size_t>(pos)] =
                  closed[static_cast<std::size_t>(add[static_cast<std::size_t>(t)])];
            }
            ClusterState next = make_state(emb, dict, std::move(proposed));
            if (next.loss < state.loss) {
              state = std::move(next);
              applied = true;
            }
          } while (!applied && next_subset(add, static_cast<Index>(closed.size())));
        } while (!applied && next_subset(rem, static_cast<Index>(open_sorted.size())));
      }
    }

    if (!applied) {
      record(trace, it, state, false);
      break;
    }
    best.offer(state);
    record(trace, it, state, true);
  }
  trace.best = best.best;
  return {best.best, std::move(trace)};
}

ClusterState brute_force_oracle(const EmbeddingSet& emb, const SiteDictionary& dict, Index k) {
  require_same_dim(emb, dict);
  if (k < 1) throw validation_error("oracle: k must be at least 1");
  if (k > dict.size())
    throw k_too_large("oracle: k=" + std::to_string(k) + " exceeds dictionary size " +
                      std::to_string(dict.size()));
  constexpr std::uint64_t kMaxSubsets = 10'000'000;
  const std::uint64_t count = choose_capped(dict.size(), k, kMaxSubsets);
  if (count > kMaxSubsets)
    throw instance_too_large("oracle: C(" + std::to_string(dict.size()) + ", " +
                             std::to_string(k) + ") exceeds " + std::to_string(kMaxSubsets) +
                             " subsets");

  const Index n = emb.size();
  const bool cache = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(dict.size()) <=
                     50'000'000ull;
  Matrix dmat;
  if (cache) {
    dmat = Matrix(n, dict.size());
    kernels::pairwise_sqdist(emb.vectors, dict.vectors, dmat);
  }

  std::vector<Index> subset(static_cast<std::size_t>(k));
  std::iota(subset.begin(), subset.end(), Index{0});
  std::vector<Index> best_subset;
  double best_loss = std::numeric_limits<double>::infinity();
  while (true) {
    double loss = 0.0;
    for (Index i = 0; i < n; ++i) {
      double m = std::numeric_limits<double>::infinity();
      for (Index c : subset) {
        const double d = cache ? dmat.at(i, c) : sq_dist(emb.vectors.row(i), dict.vectors.row(c));
        if (d < m) m = d;
      }
      loss += m;
    }
    // Strict < keeps the first (lexicographically smallest) subset on ties.
    if (loss < best_loss) {
      best_loss = loss;
      best_subset = subset;
    }
    Index t = k - 1;
    while (t >= 0 && subset[static_cast<std::size_t>(t)] == dict.size() - k + t) --t;
    if (t < 0) break;
    ++subset[static_cast<std::size_t>(t)];
    for (Index u = t + 1; u < k; ++u)
      subset[static_cast<std::size_t>(u)] = subset[static_cast<std::size_t>(u - 1)] + 1;
  }
  return make_state(emb, dict, std::move(best_subset));
}

std::pair<ClusterState, SolveTrace> run_solver(const EmbeddingSet& emb_in,
                                               const SiteDictionary& dict_in,
                                               const SolveConfig& cfg, InitMethod init,
                                               SolverKind solver,
                                               const InitAssignment* precomputed) {
  require_same_dim(emb_in, dict_in);
  validate_config(cfg, emb_in.size(), dict_in.size());

  // Normalization happens once, up front, so initialization and search see
  // the same geometry.
  EmbeddingSet emb_store;
  SiteDictionary dict_store;
  const EmbeddingSet& emb = maybe_normalize(emb_in, cfg.normalize, emb_store);
  const SiteDictionary& dict = maybe_normalize(dict_in, cfg.normalize, dict_store);

  if (solver == SolverKind::relaxed) {
    InitAssignment ia;
    if (precomputed) {
      ia = *precomputed;
    } else if (init == InitMethod::ward) {
      ia = ward_init(emb, cfg.k, WardOptions{.seed = cfg.seed});
    } else if (init == InitMethod::kmeans) {
      ia = kmeans_init(emb, cfg.k, cfg.seed);
    } else {
      const auto centers = greedy_open(emb, dict, cfg.k);
      ia.labels = assign_voronoi(emb, dict, centers);
      ia.k = cfg.k;
      ia.method = InitMethod::greedy;
    }
    return relaxed_local_search(emb, dict, cfg, ia);
  }

  std::vector<Index> centers;
  if (init == InitMethod::greedy) {
    centers = greedy_open(emb, dict, cfg.k);
  } else {
    InitAssignment ia;
    if (precomputed) {
      ia = *precomputed;
    } else if (init == InitMethod::ward) {
      ia = ward_init(emb, cfg.k, WardOptions{.seed = cfg.seed});
    } else {
      ia = kmeans_init(emb, cfg.k, cfg.seed);
    }
    centers = initial_centers_from_assignment(emb, dict, ia.labels, cfg.k, cfg.normalize);
  }
  return pam_local_search(emb, dict, cfg, centers);
}

}  // namespace facloc
