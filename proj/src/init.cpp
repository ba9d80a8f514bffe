#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "facloc/core.hpp"
#include "facloc/init.hpp"
#include "facloc/kernels.hpp"

namespace facloc {

const char* to_string(InitMethod m) {
  switch (m) {
    case InitMethod::ward: return "ward";
    case InitMethod::kmeans: return "kmeans";
    case InitMethod::greedy: return "greedy";
  }
  return "?";
}

namespace {

// Relabel clusters so that ids follow the smallest member index of each
// cluster; makes init labels deterministic up to nothing at all.
std::vector<Index> canonical_labels(std::span<const Index> raw, Index k) {
  std::vector<Index> first(static_cast<std::size_t>(k), std::numeric_limits<Index>::max());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto& f = first[static_cast<std::size_t>(raw[i])];
    if (static_cast<Index>(i) < f) f = static_cast<Index>(i);
  }
  std::vector<Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return first[static_cast<std::size_t>(a)] < first[static_cast<std::size_t>(b)]; });
  std::vector<Index> remap(static_cast<std::size_t>(k), 0);
  for (Index pos = 0; pos < k; ++pos) remap[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] = pos;
  std::vector<Index> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = remap[static_cast<std::size_t>(raw[i])];
  return out;
}

// Exact Ward agglomeration over all rows of pts; returns one cluster id per
// row (ids arbitrary in [0, k) before canonicalization).
std::vector<Index> ward_exact(const Matrix& pts, Index k) {
  const Index n = pts.rows;
  const auto tri = [n](Index i, Index j) -> std::size_t {
    // condensed index for i < j
    return static_cast<std::size_t>(n * i - i * (i + 1) / 2 + (j - i - 1));
  };
  // Ward merge cost between singletons is half the squared distance; the
  // Lance-Williams recurrence below keeps every entry equal to the exact
  // merge cost delta(A,B) = |A||B|/(|A|+|B|) * ||mean A - mean B||^2.
  std::vector<double> D(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2);
#pragma omp parallel for schedule(dynamic, 16)
  for (Index i = 0; i < n; ++i) {
    const auto ri = pts.row(i);
    for (Index j = i + 1; j < n; ++j) {
      const auto rj = pts.row(j);
      double s = 0.0;
      for (std::size_t t = 0; t < ri.size(); ++t) {
        const double d = ri[t] - rj[t];
        s += d * d;
      }
      D[tri(i, j)] = 0.5 * s;
    }
  }

  std::vector<char> active(static_cast<std::size_t>(n), 1);
  std::vector<Index> size(static_cast<std::size_t>(n), 1);
  std::vector<Index> label(static_cast<std::size_t>(n));
  std::iota(label.begin(), label.end(), Index{0});

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> mindist(static_cast<std::size_t>(n), kInf);
  std::vector<Index> nnbr(static_cast<std::size_t>(n), kNoSite);
  const auto rescan = [&](Index i) {
    double best = kInf;
    Index arg = kNoSite;
    for (Index j = i + 1; j < n; ++j) {
      if (!active[static_cast<std::size_t>(j)]) continue;
      const double d = D[tri(i, j)];
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    mindist[static_cast<std::size_t>(i)] = best;
    nnbr[static_cast<std::size_t>(i)] = arg;
  };
  for (Index i = 0; i < n; ++i) rescan(i);

  for (Index merge = 0; merge < n - k; ++merge) {
    // Globally cheapest pair; ties resolve to the lexicographically
    // smallest (i, j) because rows are scanned ascending with strict <.
    Index a = kNoSite;
    double best = kInf;
    for (Index i = 0; i < n; ++i) {
      if (!active[static_cast<std::size_t>(i)] || nnbr[static_cast<std::size_t>(i)] == kNoSite)
        continue;
      if (mindist[static_cast<std::size_t>(i)] < best) {
        best = mindist[static_cast<std::size_t>(i)];
        a = i;
      }
    }
    const Index b = nnbr[static_cast<std::size_t>(a)];
    const double dab = D[tri(a, b)];
    const double s = static_cast<double>(size[static_cast<std::size_t>(a)]);
    const double t = static_cast<double>(size[static_cast<std::size_t>(b)]);

    for (Index j = 0; j < n; ++j) {
      if (!active[static_cast<std::size_t>(j)] || j == a || j == b) continue;
      const double v = static_cast<double>(size[static_cast<std::size_t>(j)]);
      const double daj = D[j < a ? tri(j, a) : tri(a, j)];
      const double dbj = D[j < b ? tri(j, b) : tri(b, j)];
      D[j < a ? tri(j, a) : tri(a, j)] =
          ((v + s) * daj - v * dab + (v + t) * dbj) / (s + t + v);
    }
    size[static_cast<std::size_t>(a)] += size[static_cast<std::size_t>(b)];
    active[static_cast<std::size_t>(b)] = 0;
    for (Index i = 0; i < n; ++i)
      if (label[static_cast<std::size_t>(i)] == b) label[static_cast<std::size_t>(i)] = a;

    rescan(a);
    for (Index i = 0; i < a; ++i) {
      if (!active[static_cast<std::size_t>(i)]) continue;
      const Index nb = nnbr[static_cast<std::size_t>(i)];
      if (nb == a || nb == b) {
        rescan(i);
      } else {
        const double dia = D[tri(i, a)];
        if (dia < mindist[static_cast<std::size_t>(i)]) {
          mindist[static_cast<std::size_t>(i)] = dia;
          nnbr[static_cast<std::size_t>(i)] = a;
        }
      }
    }
    for (Index i = a + 1; i < b; ++i) {
      if (active[static_cast<std::size_t>(i)] && nnbr[static_cast<std::size_t>(i)] == b) rescan(i);
    }
  }

  // Compact the surviving cluster ids.
  std::vector<Index> remap(static_cast<std::size_t>(n), kNoSite);
  Index next = 0;
  std::vector<Index> out(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const Index c = label[static_cast<std::size_t>(i)];
    if (remap[static_cast<std::size_t>(c)] == kNoSite) remap[static_cast<std::size_t>(c)] = next++;
    out[static_cast<std::size_t>(i)] = remap[static_cast<std::size_t>(c)];
  }
  return out;
}

}  // namespace

InitAssignment ward_init(const EmbeddingSet& emb, Index k, const WardOptions& opts) {
  const Index n = emb.size();
  if (k < 1) throw validation_error("ward_init: k must be at least 1");
  if (k > n)
    throw k_too_large("ward_init: k=" + std::to_string(k) + " exceeds point count " +
                      std::to_string(n));
  InitAssignment init;
  init.k = k;
  init.method = InitMethod::ward;
  if (n <= opts.max_exact_points) {
    init.labels = canonical_labels(ward_exact(emb.vectors, k), k);
    return init;
  }

  // Too many rows for the O(N^2) matrix: cluster a seeded uniform subsample
  // and give every other point the label of its nearest subsample centroid.
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(opts.seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Index> chosen(perm.begin(), perm.begin() + opts.max_exact_points);
  std::sort(chosen.begin(), chosen.end());

  Matrix sub(opts.max_exact_points, emb.dim());
  for (Index i = 0; i < opts.max_exact_points; ++i) {
    const auto src = emb.vectors.row(chosen[static_cast<std::size_t>(i)]);
    std::copy(src.begin(), src.end(), sub.row(i).begin());
  }
  const auto sub_labels = ward_exact(sub, k);

  Matrix sums(k, emb.dim());
  std::vector<Index> counts;
  kernels::cluster_sums(sub, sub_labels, k, sums, counts);
  Matrix centroids(k, emb.dim());
  for (Index j = 0; j < k; ++j) {
    const auto s = sums.row(j);
    auto c = centroids.row(j);
    for (std::size_t t = 0; t < c.size(); ++t)
      c[t] = s[t] / static_cast<double>(counts[static_cast<std::size_t>(j)]);
  }

  std::vector<Index> all_candidates(static_cast<std::size_t>(k));
  std::iota(all_candidates.begin(), all_candidates.end(), Index{0});
  std::vector<Index> nearest(static_cast<std::size_t>(n));
  kernels::nearest_among(emb.vectors, centroids, all_candidates, nearest, {});

  init.labels.assign(static_cast<std::size_t>(n), 0);
  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) init.labels[i] = nearest[i];
  for (Index i = 0; i < opts.max_exact_points; ++i)
    init.labels[static_cast<std::size_t>(chosen[static_cast<std::size_t>(i)])] =
        sub_labels[static_cast<std::size_t>(i)];
  init.labels = canonical_labels(init.labels, k);
  return init;
}

InitAssignment kmeans_init(const EmbeddingSet& emb, Index k, std::uint64_t seed) {
  const Index n = emb.size();
  if (k < 1) throw validation_error("kmeans_init: k must be at least 1");
  if (k > n)
    throw k_too_large("kmeans_init: k=" + std::to_string(k) + " exceeds point count " +
                      std::to_string(n));
  std::mt19937_64 rng(seed);

  // k-means++ seeding over the points themselves.
  std::vector<char> is_center(static_cast<std::size_t>(n), 0);
  Matrix centers(k, emb.dim());
  std::uniform_int_distribution<Index> first(0, n - 1);
  Index c0 = first(rng);
  is_center[static_cast<std::size_t>(c0)] = 1;
  std::copy(emb.vectors.row(c0).begin(), emb.vectors.row(c0).end(), centers.row(0).begin());
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = sq_dist(emb.vectors.row(i), centers.row(0));
  for (Index c = 1; c < k; ++c) {
    const double total = kernels::sum_ordered(d2);
    Index pick = kNoSite;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      const double cut = u(rng);
      double acc = 0.0;
      for (Index i = 0; i < n; ++i) {
        acc += d2[static_cast<std::size_t>(i)];
        if (acc > cut) {
          pick = i;
          break;
        }
      }
      if (pick == kNoSite) {  // numerical edge: cut landed at the very top
        for (Index i = n - 1; i >= 0; --i)
          if (d2[static_cast<std::size_t>(i)] > 0.0) {
            pick = i;
            break;
          }
      }
    }
    if (pick == kNoSite) {  // all residual distances zero: take lowest unused
      for (Index i = 0; i < n; ++i)
        if (!is_center[static_cast<std::size_t>(i)]) {
          pick = i;
          break;
        }
    }
    is_center[static_cast<std::size_t>(pick)] = 1;
    std::copy(emb.vectors.row(pick).begin(), emb.vectors.row(pick).end(), centers.row(c).begin());
    for (Index i = 0; i < n; ++i) {
      const double d = sq_dist(emb.vectors.row(i), centers.row(c));
      if (d < d2[static_cast<std::size_t>(i)]) d2[static_cast<std::size_t>(i)] = d;
    }
  }

  // Lloyd iterations until the assignment stops changing (at most 300).
  std::vector<Index> all(static_cast<std::size_t>(k));
  std::iota(all.begin(), all.end(), Index{0});
  std::vector<Index> labels(static_cast<std::size_t>(n), -1);
  std::vector<Index> prev;
  std::vector<double> dist(static_cast<std::size_t>(n));
  Matrix sums(k, emb.dim());
  std::vector<Index> counts;
  for (int iter = 0; iter < 300; ++iter) {
    prev = labels;
    kernels::nearest_among(emb.vectors, centers, all, labels, dist);

    // Refill empty clusters with the point farthest from its center.
    kernels::cluster_sums(emb.vectors, labels, k, sums, counts);
    for (Index j = 0; j < k; ++j) {
      if (counts[static_cast<std::size_t>(j)] != 0) continue;
      Index worst = kNoSite;
      double worstd = -1.0;
      for (Index i = 0; i < n; ++i) {
        if (counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] < 2) continue;
        if (dist[static_cast<std::size_t>(i)] > worstd) {
          worstd = dist[static_cast<std::size_t>(i)];
          worst = i;
        }
      }
      --counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(worst)])];
      labels[static_cast<std::size_t>(worst)] = j;
      counts[static_cast<std::size_t>(j)] = 1;
      dist[static_cast<std::size_t>(worst)] = 0.0;
    }

    if (labels == prev) break;
    kernels::cluster_sums(emb.vectors, labels, k, sums, counts);
    for (Index j = 0; j < k; ++j) {
      const auto s = sums.row(j);
      auto c = centers.row(j);
      for (std::size_t t = 0; t < c.size(); ++t)
        c[t] = s[t] / static_cast<double>(counts[static_cast<std::size_t>(j)]);
    }
  }

  InitAssignment init;
  init.k = k;
  init.method = InitMethod::kmeans;
  init.labels = canonical_labels(labels, k);
  return init;
}

std::vector<Index> greedy_open(const EmbeddingSet& emb, const SiteDictionary& dict, Index k) {
  require_same_dim(emb, dict);
  if (k < 1) throw validation_error("greedy_open: k must be at least 1");
  if (k > dict.size())
    throw k_too_large("greedy_open: k=" + std::to_string(k) + " exceeds dictionary size " +
                      std::to_string(dict.size()));
  const Index n = emb.size();
  std::vector<double> best_d2(static_cast<std::size_t>(n),
                              std::numeric_limits<double>::infinity());
  std::vector<char> open_mask(static_cast<std::size_t>(dict.size()), 0);
  std::vector<double> scores(static_cast<std::size_t>(dict.size()));
  std::vector<Index> opened;
  opened.reserve(static_cast<std::size_t>(k));
  for (Index round = 0; round < k; ++round) {
    kernels::greedy_scores(emb.vectors, dict.vectors, best_d2, open_mask, scores);
    Index best = kNoSite;
    double bestv = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < dict.size(); ++j) {
      if (scores[static_cast<std::size_t>(j)] < bestv) {
        bestv = scores[static_cast<std::size_t>(j)];
        best = j;
      }
    }
    opened.push_back(best);
    open_mask[static_cast<std::size_t>(best)] = 1;
    const auto site = dict.vectors.row(best);
    for (Index i = 0; i < n; ++i) {
      const double d = sq_dist(emb.vectors.row(i), site);
      if (d < best_d2[static_cast<std::size_t>(i)]) best_d2[static_cast<std::size_t>(i)] = d;
    }
  }
  return opened;
}

}  // namespace facloc
