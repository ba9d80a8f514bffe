#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "facloc/dict.hpp"
#include "facloc/init.hpp"
#include "facloc/kernels.hpp"
#include "facloc/metrics.hpp"

namespace facloc {

GeneralityReport generality_scores(const SiteDictionary& dict) {
  const Index n = dict.size();
  const Index d = dict.dim();
  if (n < 1) throw validation_error("generality_scores: empty dictionary");
  GeneralityReport rep;
  rep.avg_embedding.assign(static_cast<std::size_t>(d), 0.0);
  for (Index i = 0; i < n; ++i) {
    const auto row = dict.vectors.row(i);
    for (Index t = 0; t < d; ++t) rep.avg_embedding[static_cast<std::size_t>(t)] += row[t];
  }
  for (double& v : rep.avg_embedding) v /= static_cast<double>(n);

  rep.scores.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const auto row = dict.vectors.row(i);
    double dot = 0.0;
    for (Index t = 0; t < d; ++t) dot += row[t] * rep.avg_embedding[static_cast<std::size_t>(t)];
    rep.scores[static_cast<std::size_t>(i)] = dot;
  }

  rep.order.resize(static_cast<std::size_t>(n));
  std::iota(rep.order.begin(), rep.order.end(), Index{0});
  std::stable_sort(rep.order.begin(), rep.order.end(), [&](Index a, Index b) {
    return rep.scores[static_cast<std::size_t>(a)] < rep.scores[static_cast<std::size_t>(b)];
  });
  return rep;
}

std::vector<Index> quantile_keep_indices(std::span<const double> scores, double q) {
  if (!(q > 0.0) || !(q <= 1.0))
    throw invalid_quantile("quantile " + std::to_string(q) + " outside (0, 1]");
  const Index n = static_cast<Index>(scores.size());
  if (n < 1) throw validation_error("quantile_keep_indices: no scores");
  // The epsilon absorbs representation error in q (e.g. 0.3 stored slightly
  // below 3/10) so floor(q*n) matches the exact rational value.
  Index keep = static_cast<Index>(std::floor(q * static_cast<double>(n) + 1e-9));
  if (keep < 1) keep = 1;
  if (keep > n) keep = n;

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return scores[static_cast<std::size_t>(a)] < scores[static_cast<std::size_t>(b)];
  });
  order.resize(static_cast<std::size_t>(keep));
  std::sort(order.begin(), order.end());
  return order;
}

SiteDictionary filter_by_quantile(const SiteDictionary& dict, std::span<const double> scores,
                                  double q) {
  if (static_cast<Index>(scores.size()) != dict.size())
    throw dimension_mismatch("filter_by_quantile: " + std::to_string(scores.size()) +
                             " scores for " + std::to_string(dict.size()) + " sites");
  const auto keep = quantile_keep_indices(scores, q);
  SiteDictionary out;
  out.vectors = Matrix(static_cast<Index>(keep.size()), dict.dim());
  out.labels.reserve(keep.size());
  out.normalized = dict.normalized;
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const auto src = dict.vectors.row(keep[r]);
    auto dst = out.vectors.row(static_cast<Index>(r));
    std::copy(src.begin(), src.end(), dst.begin());
    out.labels.push_back(dict.labels[static_cast<std::size_t>(keep[r])]);
  }
  return out;
}

QuantileSweepResult sweep_quantiles(const EmbeddingSet& emb, const SiteDictionary& dict,
                                    const SolveConfig& cfg, std::span<const double> q_grid,
                                    InitMethod init, SolverKind solver) {
  if (q_grid.empty()) throw validation_error("sweep: empty quantile grid");
  for (double q : q_grid)
    if (!(q > 0.0) || !(q <= 1.0))
      throw invalid_quantile("sweep: quantile " + std::to_string(q) + " outside (0, 1]");

  const auto rep = generality_scores(dict);

  // Ward/k-means initializations depend only on the embeddings, so one
  // assignment serves every quantile; greedy opening depends on the filtered
  // dictionary and is recomputed per q inside run_solver.
  InitAssignment shared_init;
  const bool dict_free_init = init != InitMethod::greedy;
  if (dict_free_init) {
    EmbeddingSet emb_store;
    const EmbeddingSet* src = &emb;
    if (cfg.normalize && !emb.normalized) {
      emb_store = emb;
      kernels::normalize_rows(emb_store.vectors);
      emb_store.normalized = true;
      src = &emb_store;
    }
    shared_init = init == InitMethod::ward ? ward_init(*src, cfg.k, WardOptions{.seed = cfg.seed})
                                           : kmeans_init(*src, cfg.k, cfg.seed);
  }

  QuantileSweepResult result;
  result.records.resize(q_grid.size());
  for (std::size_t g = 0; g < q_grid.size(); ++g) {
    SweepRecord& rec = result.records[g];
    rec.q = q_grid[g];
    rec.kept_sites = quantile_keep_indices(rep.scores, rec.q);
    rec.dict_size = static_cast<Index>(rec.kept_sites.size());
    const auto filtered = filter_by_quantile(dict, rep.scores, rec.q);
    try {
      auto [state, trace] =
          run_solver(emb, filtered, cfg, init, solver, dict_free_init ? &shared_init : nullptr);
      rec.entropy = assignment_entropy(state.assignment, cfg.k);
      rec.state = std::move(state);
      rec.ok = true;
    } catch (const error& e) {
      rec.ok = false;
      rec.error = e.what();
    }
  }

  for (std::size_t g = 0; g < q_grid.size(); ++g) {
    const SweepRecord& rec = result.records[g];
    if (!rec.ok) continue;
    if (result.chosen_index < 0) {
      result.chosen_index = static_cast<Index>(g);
      continue;
    }
    const SweepRecord& cur = result.records[static_cast<std::size_t>(result.chosen_index)];
    if (rec.entropy > cur.entropy || (rec.entropy == cur.entropy && rec.q > cur.q))
      result.chosen_index = static_cast<Index>(g);
  }
  if (result.chosen_index < 0) {
    std::string detail = "sweep: every quantile failed";
    for (const auto& rec : result.records)
      detail += "\n  q=" + std::to_string(rec.q) + ": " + rec.error;
    throw solver_error(detail);
  }
  result.chosen_q = result.records[static_cast<std::size_t>(result.chosen_index)].q;
  return result;
}

std::vector<double> parse_q_grid(const std::string& text) {
  std::array<double, 3> parts{};
  std::size_t begin = 0;
  for (int t = 0; t < 3; ++t) {
    const std::size_t end = t < 2 ? text.find(':', begin) : text.size();
    if (end == std::string::npos)
      throw validation_error("quantile grid '" + text + "' is not start:stop:step");
    const std::string piece = text.substr(begin, end - begin);
    try {
      std::size_t used = 0;
      parts[static_cast<std::size_t>(t)] = std::stod(piece, &used);
      if (used != piece.size()) throw std::invalid_argument(piece);
    } catch (const std::exception&) {
      throw validation_error("quantile grid component '" + piece + "' is not a number");
    }
    begin = end + 1;
  }
  const auto [start, stop, step] = parts;
  if (!(step > 0.0)) throw validation_error("quantile grid step must be positive");
  if (stop < start - 1e-9) throw validation_error("quantile grid stop precedes start");
  std::vector<double> grid;
  for (double v = start; v <= stop + 1e-9; v += step) {
    const double q = std::min(v, stop);
    if (!(q > 0.0) || !(q <= 1.0))
      throw invalid_quantile("quantile grid value " + std::to_string(q) + " outside (0, 1]");
    grid.push_back(q);
  }
  if (grid.empty()) throw validation_error("quantile grid '" + text + "' is empty");
  return grid;
}

}  // namespace facloc
