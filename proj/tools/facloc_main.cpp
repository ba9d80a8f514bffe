// facloc — cluster embedding vectors around centers drawn from a labeled
// dictionary of candidate sites. Subcommands: cluster, sweep, oracle, eval,
// gen. Exit codes: 0 success, 1 invalid input, 2 solver failure.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "facloc/dict.hpp"
#include "facloc/init.hpp"
#include "facloc/io.hpp"
#include "facloc/metrics.hpp"
#include "facloc/solve.hpp"

namespace {

using facloc::Index;

struct CommonArgs {
  std::string embeddings;
  std::string dict;
  std::string dict_labels;
  Index k = 0;
  double q = 0.0;
  bool has_q = false;
  Index p = 0;
  bool has_p = false;
  Index max_iters = 30;
  std::uint64_t seed = 0;
  std::string init = "ward";
  std::string solver = "relaxed";
  bool normalize = false;
  double oversize_factor = 3.0;
  std::string truth;
  std::string out;
  std::string q_grid = "0.05:1.0:0.05";
};

facloc::InitMethod parse_init(const std::string& name) {
  if (name == "ward") return facloc::InitMethod::ward;
  if (name == "kmeans") return facloc::InitMethod::kmeans;
  if (name == "greedy") return facloc::InitMethod::greedy;
  throw facloc::validation_error("--init must be ward, kmeans or greedy (got '" + name + "')");
}

facloc::SolverKind parse_solver(const std::string& name) {
  if (name == "relaxed") return facloc::SolverKind::relaxed;
  if (name == "pam") return facloc::SolverKind::pam;
  throw facloc::validation_error("--solver must be relaxed or pam (got '" + name + "')");
}

facloc::SolveConfig make_config(const CommonArgs& a) {
  facloc::SolveConfig cfg;
  cfg.k = a.k;
  cfg.swaps_p = a.has_p ? a.p : facloc::default_swaps_p(a.k);
  cfg.max_iters = a.max_iters;
  cfg.oversize_factor = a.oversize_factor;
  cfg.seed = a.seed;
  cfg.normalize = a.normalize;
  return cfg;
}

// Class ids from a label file: integer lines are taken verbatim, otherwise
// distinct strings are numbered in sorted order. Metrics only compare
// partitions, so the numbering convention is free.
std::vector<Index> to_class_ids(const std::vector<std::string>& lines) {
  std::vector<Index> ids(lines.size());
  bool all_int = true;
  for (std::size_t i = 0; i < lines.size() && all_int; ++i) {
    const auto& s = lines[i];
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
      all_int = false;
    else
      ids[i] = value;
  }
  if (all_int && !lines.empty()) return ids;
  std::map<std::string, Index> dense;
  for (const auto& s : lines) dense.emplace(s, 0);
  Index next = 0;
  for (auto& [key, value] : dense) value = next++;
  for (std::size_t i = 0; i < lines.size(); ++i) ids[i] = dense[lines[i]];
  return ids;
}

std::vector<Index> read_class_file(const std::string& path) {
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
    return facloc::io::read_result(path).assignment;
  return to_class_ids(facloc::io::read_labels(path));
}

nlohmann::ordered_json trace_json(const facloc::SolveTrace& trace) {
  nlohmann::ordered_json j;
  j["iterations"] = trace.records.empty() ? 0 : trace.records.back().iteration;
  j["best_loss"] = trace.best.loss;
  auto records = nlohmann::ordered_json::array();
  for (const auto& r : trace.records) {
    records.push_back({{"iteration", r.iteration},
                       {"centers", r.centers},
                       {"loss", r.loss},
                       {"accepted", r.accepted}});
  }
  j["records"] = std::move(records);
  auto repairs = nlohmann::ordered_json::array();
  for (const auto& r : trace.repairs) {
    repairs.push_back(
        {{"iteration", r.iteration},
         {"kind",
          r.kind == facloc::SolveTrace::RepairKind::empty_cluster ? "empty" : "oversized"},
         {"loss_after", r.loss_after}});
  }
  j["repairs"] = std::move(repairs);
  return j;
}

void print_metrics(const facloc::MetricsReport& m) {
  std::printf("acc: %.6f\n", m.acc);
  std::printf("nmi: %.6f\n", m.nmi);
  std::printf("ari: %.6f\n", m.ari);
  std::printf("entropy: %.6f\n", m.entropy);
}

void print_state(const facloc::ClusterState& state,
                 const std::vector<std::string>& center_labels) {
  std::printf("loss: %.17g\n", state.loss);
  if (!state.assignment.empty())
    std::printf("mean_loss: %.17g\n", state.loss / static_cast<double>(state.assignment.size()));
  std::string joined;
  for (std::size_t i = 0; i < center_labels.size(); ++i) {
    if (i) joined += ", ";
    joined += center_labels[i];
  }
  std::printf("centers: %s\n", joined.c_str());
}

struct LoadedInstance {
  facloc::EmbeddingSet emb;
  facloc::SiteDictionary dict;
};

LoadedInstance load_instance(const CommonArgs& a) {
  LoadedInstance li;
  li.emb = facloc::io::read_embeddings(a.embeddings);
  li.dict = facloc::io::read_dictionary(a.dict, a.dict_labels);
  return li;
}

nlohmann::ordered_json config_echo(const CommonArgs& a, const char* command) {
  nlohmann::ordered_json c;
  c["command"] = command;
  c["embeddings"] = a.embeddings;
  c["dict"] = a.dict;
  c["dict_labels"] = a.dict_labels.empty() ? nlohmann::ordered_json(nullptr)
                                           : nlohmann::ordered_json(a.dict_labels);
  c["k"] = a.k;
  if (std::string(command) == "sweep")
    c["q_grid"] = a.q_grid;
  else
    c["q"] = a.has_q ? nlohmann::ordered_json(a.q) : nlohmann::ordered_json(nullptr);
  c["p"] = a.has_p ? a.p : facloc::default_swaps_p(a.k);
  c["max_iters"] = a.max_iters;
  c["seed"] = a.seed;
  c["init"] = a.init;
  c["solver"] = a.solver;
  c["normalize"] = a.normalize;
  c["oversize_factor"] = a.oversize_factor;
  c["truth"] =
      a.truth.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(a.truth);
  c["out"] = a.out;
  return c;
}

int cmd_cluster(const CommonArgs& a) {
  auto [emb, dict] = load_instance(a);
  const auto cfg = make_config(a);
  const auto init = parse_init(a.init);
  const auto solver = parse_solver(a.solver);

  // Optional generality filtering; centers are reported against the input
  // dictionary, so track which original sites survived.
  std::vector<Index> kept;
  facloc::SiteDictionary solved_dict;
  if (a.has_q) {
    const auto rep = facloc::generality_scores(dict);
    kept = facloc::quantile_keep_indices(rep.scores, a.q);
    solved_dict = facloc::filter_by_quantile(dict, rep.scores, a.q);
  } else {
    kept.resize(static_cast<std::size_t>(dict.size()));
    std::iota(kept.begin(), kept.end(), Index{0});
    solved_dict = dict;
  }

  auto [state, trace] = facloc::run_solver(emb, solved_dict, cfg, init, solver);

  facloc::io::Result result;
  result.command = "cluster";
  result.config = config_echo(a, "cluster");
  result.config["filtered_dict_size"] = solved_dict.size();
  for (Index c : state.centers) {
    const Index original = kept[static_cast<std::size_t>(c)];
    result.centers.push_back(original);
    result.center_labels.push_back(dict.labels[static_cast<std::size_t>(original)]);
  }
  result.assignment = state.assignment;
  result.loss = state.loss;
  result.trace = trace_json(trace);
  if (!a.truth.empty()) {
    const auto truth = read_class_file(a.truth);
    result.metrics = facloc::evaluate_clustering(state.assignment, truth, cfg.k, state.loss);
  }
  facloc::io::write_result(result, a.out);

  print_state(state, result.center_labels);
  if (result.metrics) print_metrics(*result.metrics);
  std::printf("wrote: %s\n", a.out.c_str());
  return 0;
}

int cmd_sweep(const CommonArgs& a) {
  auto [emb, dict] = load_instance(a);
  const auto cfg = make_config(a);
  const auto init = parse_init(a.init);
  const auto solver = parse_solver(a.solver);
  const auto grid = facloc::parse_q_grid(a.q_grid);

  const auto sweep = facloc::sweep_quantiles(emb, dict, cfg, grid, init, solver);
  const auto& chosen = sweep.records[static_cast<std::size_t>(sweep.chosen_index)];

  facloc::io::Result result;
  result.command = "sweep";
  result.config = config_echo(a, "sweep");
  result.config["chosen_q"] = sweep.chosen_q;
  for (Index c : chosen.state.centers) {
    const Index original = chosen.kept_sites[static_cast<std::size_t>(c)];
    result.centers.push_back(original);
    result.center_labels.push_back(dict.labels[static_cast<std::size_t>(original)]);
  }
  result.assignment = chosen.state.assignment;
  result.loss = chosen.state.loss;

  auto per_q = nlohmann::ordered_json::array();
  std::printf("%8s %8s %16s %12s\n", "q", "sites", "loss", "entropy");
  for (const auto& rec : sweep.records) {
    nlohmann::ordered_json row;
    row["q"] = rec.q;
    row["dict_size"] = rec.dict_size;
    row["ok"] = rec.ok;
    if (rec.ok) {
      row["loss"] = rec.state.loss;
      row["entropy"] = rec.entropy;
      row["centers"] = rec.state.centers;
      row["kept_sites"] = rec.kept_sites;
      std::printf("%8.3f %8lld %16.8f %12.8f%s\n", rec.q,
                  static_cast<long long>(rec.dict_size), rec.state.loss, rec.entropy,
                  rec.q == sweep.chosen_q ? "  <- chosen" : "");
    } else {
      row["error"] = rec.error;
      std::printf("%8.3f %8lld %16s %12s  (%s)\n", rec.q, static_cast<long long>(rec.dict_size),
                  "-", "-", rec.error.c_str());
    }
    per_q.push_back(std::move(row));
  }
  result.per_q = std::move(per_q);

  if (!a.truth.empty()) {
    const auto truth = read_class_file(a.truth);
    result.metrics =
        facloc::evaluate_clustering(chosen.state.assignment, truth, cfg.k, chosen.state.loss);
  }
  facloc::io::write_result(result, a.out);

  std::printf("chosen_q: %g\n", sweep.chosen_q);
  print_state(chosen.state, result.center_labels);
  if (result.metrics) print_metrics(*result.metrics);
  std::printf("wrote: %s\n", a.out.c_str());
  return 0;
}

int cmd_oracle(const CommonArgs& a) {
  auto [emb, dict] = load_instance(a);
  const auto state = facloc::brute_force_oracle(emb, dict, a.k);

  facloc::io::Result result;
  result.command = "oracle";
  result.config["command"] = "oracle";
  result.config["embeddings"] = a.embeddings;
  result.config["dict"] = a.dict;
  result.config["dict_labels"] = a.dict_labels.empty()
                                     ? nlohmann::ordered_json(nullptr)
                                     : nlohmann::ordered_json(a.dict_labels);
  result.config["k"] = a.k;
  result.config["exhaustive"] = true;
  result.config["out"] = a.out;
  for (Index c : state.centers) {
    result.centers.push_back(c);
    result.center_labels.push_back(dict.labels[static_cast<std::size_t>(c)]);
  }
  result.assignment = state.assignment;
  result.loss = state.loss;
  facloc::io::write_result(result, a.out);

  print_state(state, result.center_labels);
  std::printf("wrote: %s\n", a.out.c_str());
  return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& truth_path,
             const std::string& out_path) {
  const auto pred_raw = read_class_file(pred_path);
  const auto truth = read_class_file(truth_path);

  // Compact the predicted ids to [0, m) so the entropy sees a dense histogram.
  std::map<Index, Index> dense;
  for (Index v : pred_raw) dense.emplace(v, 0);
  Index next = 0;
  for (auto& [key, value] : dense) value = next++;
  std::vector<Index> pred(pred_raw.size());
  for (std::size_t i = 0; i < pred_raw.size(); ++i) pred[i] = dense[pred_raw[i]];

  const auto report = facloc::evaluate_clustering(pred, truth, next);

  facloc::io::Result result;
  result.command = "eval";
  result.config["command"] = "eval";
  result.config["pred"] = pred_path;
  result.config["truth"] = truth_path;
  result.config["out"] = out_path;
  result.assignment = pred;
  result.metrics = report;
  facloc::io::write_result(result, out_path);

  print_metrics(report);
  std::printf("wrote: %s\n", out_path.c_str());
  return 0;
}

int cmd_gen(const facloc::io::SyntheticSpec& spec, const std::string& prefix) {
  const auto data = facloc::io::gen_synthetic(spec);
  const std::string points_path = prefix + ".points.emb1";
  const std::string sites_path = prefix + ".sites.emb1";
  const std::string site_labels_path = prefix + ".sites.labels";
  const std::string truth_path = prefix + ".truth.labels";

  facloc::io::write_embeddings(data.points, points_path);
  facloc::EmbeddingSet sites_as_emb{data.sites.vectors, {}, data.sites.normalized};
  facloc::io::write_embeddings(sites_as_emb, sites_path);
  facloc::io::write_labels(data.sites.labels, site_labels_path);
  std::vector<std::string> truth_lines;
  truth_lines.reserve(data.truth.size());
  for (Index t : data.truth) truth_lines.push_back(std::to_string(t));
  facloc::io::write_labels(truth_lines, truth_path);

  std::printf("wrote: %s (%lld x %lld)\n", points_path.c_str(),
              static_cast<long long>(data.points.size()),
              static_cast<long long>(data.points.dim()));
  std::printf("wrote: %s (%lld x %lld)\n", sites_path.c_str(),
              static_cast<long long>(data.sites.size()),
              static_cast<long long>(data.sites.dim()));
  std::printf("wrote: %s\n", site_labels_path.c_str());
  std::printf("wrote: %s\n", truth_path.c_str());
  return 0;
}

void add_solver_flags(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--p", a.p, "Centers replaced per proposal (default: floor(k/2), min 1)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-iters", a.max_iters, "Iteration cap")
      ->default_val(30)
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", a.seed, "Random seed")->default_val(0);
  cmd->add_option("--init", a.init, "Initialization: ward, kmeans or greedy")->default_val("ward");
  cmd->add_option("--solver", a.solver, "Solver: relaxed or pam")->default_val("relaxed");
  cmd->add_flag("--normalize", a.normalize, "L2-normalize embeddings, sites and cluster means");
  cmd->add_option("--oversize-factor", a.oversize_factor,
                  "Repair clusters larger than this multiple of N/k")
      ->default_val(3.0);
  cmd->add_option("--truth", a.truth, "Ground-truth labels for metrics (optional)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "facloc — clustering with centers restricted to a labeled dictionary of candidate "
      "vectors"};
  app.require_subcommand(1);

  CommonArgs a;
  facloc::io::SyntheticSpec spec;
  std::string gen_prefix;
  std::string eval_pred, eval_truth, eval_out;

  auto* cluster = app.add_subcommand("cluster", "Solve one instance");
  cluster->add_option("--embeddings", a.embeddings, "Points file (.emb1 or .csv)")->required();
  cluster->add_option("--dict", a.dict, "Candidate-site vectors file")->required();
  cluster->add_option("--dict-labels", a.dict_labels,
                      "Site labels, one per line (default: site<i>)");
  cluster->add_option("-k,--k", a.k, "Number of clusters")->required()->check(CLI::PositiveNumber);
  auto* qopt = cluster->add_option("--q", a.q, "Keep the floor(q*|dict|) least-general sites");
  add_solver_flags(cluster, a);
  cluster->add_option("--out", a.out, "Result file (JSON)")->required();

  auto* sweep = app.add_subcommand("sweep", "Solve across a grid of dictionary quantiles");
  sweep->add_option("--embeddings", a.embeddings, "Points file (.emb1 or .csv)")->required();
  sweep->add_option("--dict", a.dict, "Candidate-site vectors file")->required();
  sweep->add_option("--dict-labels", a.dict_labels, "Site labels, one per line");
  sweep->add_option("-k,--k", a.k, "Number of clusters")->required()->check(CLI::PositiveNumber);
  sweep->add_option("--q-grid", a.q_grid, "Quantile grid start:stop:step")
      ->default_val("0.05:1.0:0.05");
  add_solver_flags(sweep, a);
  sweep->add_option("--out", a.out, "Result file (JSON)")->required();

  auto* oracle = app.add_subcommand("oracle", "Exact optimum by exhaustive enumeration");
  oracle->add_option("--embeddings", a.embeddings, "Points file (.emb1 or .csv)")->required();
  oracle->add_option("--dict", a.dict, "Candidate-site vectors file")->required();
  oracle->add_option("--dict-labels", a.dict_labels, "Site labels, one per line");
  oracle->add_option("-k,--k", a.k, "Number of clusters")->required()->check(CLI::PositiveNumber);
  oracle->add_option("--out", a.out, "Result file (JSON)")->required();

  auto* eval = app.add_subcommand("eval", "Score a predicted labeling against ground truth");
  eval->add_option("--pred", eval_pred, "Predicted labels (.json result or label file)")
      ->required();
  eval->add_option("--truth", eval_truth, "Ground-truth labels")->required();
  eval->add_option("--out", eval_out, "Result file (JSON)")->required();

  auto* gen = app.add_subcommand("gen", "Generate a synthetic instance");
  gen->add_option("--k", spec.k, "True cluster count")->default_val(2)->check(CLI::PositiveNumber);
  gen->add_option("--points-per-cluster", spec.points_per_cluster, "Points per cluster")
      ->default_val(50)
      ->check(CLI::PositiveNumber);
  gen->add_option("--n-sites", spec.n_sites, "Dictionary size (true sites + distractors)")
      ->default_val(10)
      ->check(CLI::PositiveNumber);
  gen->add_option("--dim", spec.dim, "Vector dimension")->default_val(8)->check(CLI::PositiveNumber);
  gen->add_option("--sigma", spec.noise_sigma, "Gaussian noise scale")->default_val(0.1);
  gen->add_flag("--general-site", spec.general_site,
                "Append the normalized mean of the true sites as an extra site");
  gen->add_option("--seed", spec.seed, "Random seed")->default_val(0);
  gen->add_option("--out-prefix", gen_prefix, "Output path prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  a.has_q = qopt->count() > 0;
  a.has_p = cluster->count("--p") > 0 || sweep->count("--p") > 0;

  try {
    if (*cluster) return cmd_cluster(a);
    if (*sweep) return cmd_sweep(a);
    if (*oracle) return cmd_oracle(a);
    if (*eval) return cmd_eval(eval_pred, eval_truth, eval_out);
    if (*gen) return cmd_gen(spec, gen_prefix);
  } catch (const facloc::solver_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const facloc::validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
