#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "facloc/core.hpp"
#include "facloc/io.hpp"

namespace facloc::io {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};
constexpr std::uint32_t kFlagNormalized = 1u;

void put_u32(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>((v >> 8) & 0xff),
                              static_cast<unsigned char>((v >> 16) & 0xff),
                              static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is, const std::string& path) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4))
    throw truncated_file(path + ": truncated header");
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void check_norms(const EmbeddingSet& emb, const std::string& path) {
  if (!emb.normalized) return;
  for (Index i = 0; i < emb.size(); ++i) {
    double ss = 0.0;
    for (double v : emb.vectors.row(i)) ss += v * v;
    if (std::fabs(std::sqrt(ss) - 1.0) > 1e-6)
      throw validation_error(path + ": normalized flag set but row " + std::to_string(i) +
                             " has norm " + std::to_string(std::sqrt(ss)));
  }
}

EmbeddingSet read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw io_error(path + ": cannot open");
  std::string header;
  if (!std::getline(is, header)) throw truncated_file(path + ": empty file");
  Index dim = 0;
  if (header.rfind("dim=", 0) != 0 ||
      !(std::istringstream(header.substr(4)) >> dim) || dim < 1)
    throw io_error(path + ": expected header \"dim=<d>\", got \"" + header + "\"");
  std::vector<double> values;
  std::string line;
  Index rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    Index col = 0;
    while (std::getline(ls, cell, ',')) {
      // strtod (unlike istream extraction) accepts "nan"/"inf" spellings, so
      // non-finite cells reach the dedicated error below instead of looking
      // like syntax errors; trailing whitespace also covers CRLF line ends.
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      while (end && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
      if (end == cell.c_str() || *end != '\0')
        throw io_error(path + ": bad number \"" + cell + "\" in row " + std::to_string(rows));
      if (!std::isfinite(v)) throw non_finite_value(path, rows, col);
      values.push_back(v);
      ++col;
    }
    if (col != dim)
      throw io_error(path + ": row " + std::to_string(rows) + " has " + std::to_string(col) +
                     " values, expected " + std::to_string(dim));
    ++rows;
  }
  if (rows == 0) throw io_error(path + ": no data rows");
  EmbeddingSet emb;
  emb.vectors.rows = rows;
  emb.vectors.cols = dim;
  emb.vectors.data = std::move(values);
  emb.normalized = false;
  return emb;
}

}  // namespace

EmbeddingSet read_embeddings(const std::string& path) {
  if (has_suffix(path, ".csv")) return read_csv(path);
  std::ifstream is(path, std::ios::binary);
  if (!is) throw io_error(path + ": cannot open");
  char magic[4];
  if (!is.read(magic, 4)) throw truncated_file(path + ": shorter than magic");
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw bad_magic(path + ": not an EMB1 file");
  const std::uint32_t rows = get_u32(is, path);
  const std::uint32_t dim = get_u32(is, path);
  const std::uint32_t flags = get_u32(is, path);
  if (rows == 0) throw io_error(path + ": zero rows");
  if (dim == 0) throw io_error(path + ": zero dimension");
  EmbeddingSet emb;
  emb.vectors = Matrix(static_cast<Index>(rows), static_cast<Index>(dim));
  emb.normalized = (flags & kFlagNormalized) != 0;
  std::vector<unsigned char> buf(static_cast<std::size_t>(dim) * 4);
  for (Index i = 0; i < emb.vectors.rows; ++i) {
    if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
      throw truncated_file(path + ": payload ends inside row " + std::to_string(i));
    auto r = emb.vectors.row(i);
    for (Index j = 0; j < emb.vectors.cols; ++j) {
      std::uint32_t u = static_cast<std::uint32_t>(buf[j * 4]) |
                        static_cast<std::uint32_t>(buf[j * 4 + 1]) << 8 |
                        static_cast<std::uint32_t>(buf[j * 4 + 2]) << 16 |
                        static_cast<std::uint32_t>(buf[j * 4 + 3]) << 24;
      const float f = std::bit_cast<float>(u);
      if (!std::isfinite(f)) throw non_finite_value(path, i, j);
      r[j] = static_cast<double>(f);
    }
  }
  if (is.peek() != std::char_traits<char>::eof())
    throw io_error(path + ": trailing bytes after payload");
  check_norms(emb, path);
  return emb;
}

void write_embeddings(const EmbeddingSet& emb, const std::string& path) {
  if (emb.size() == 0 || emb.dim() == 0)
    throw validation_error(path + ": refusing to write empty embedding set");
  check_norms(emb, path);  // refuse to write a file every reader would reject
  std::ofstream os(path, std::ios::binary);
  if (!os) throw io_error(path + ": cannot open for writing");
  os.write(kMagic, 4);
  put_u32(os, static_cast<std::uint32_t>(emb.size()));
  put_u32(os, static_cast<std::uint32_t>(emb.dim()));
  put_u32(os, emb.normalized ? kFlagNormalized : 0u);
  for (Index i = 0; i < emb.size(); ++i) {
    for (Index j = 0; j < emb.dim(); ++j) {
      const double v = emb.vectors.at(i, j);
      const float f = static_cast<float>(v);
      if (!std::isfinite(f)) throw non_finite_value(path, i, j);
      const std::uint32_t u = std::bit_cast<std::uint32_t>(f);
      put_u32(os, u);
    }
  }
  if (!os) throw io_error(path + ": write failed");
}

std::vector<std::string> read_labels(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw io_error(path + ": cannot open");
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    labels.push_back(line);
  }
  // A trailing LF is required by the writer; tolerate its absence on read.
  while (!labels.empty() && labels.back().empty()) labels.pop_back();
  if (labels.empty()) throw io_error(path + ": no labels");
  return labels;
}

void write_labels(const std::vector<std::string>& labels, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw io_error(path + ": cannot open for writing");
  for (const auto& l : labels) os << l << '\n';
  if (!os) throw io_error(path + ": write failed");
}

SiteDictionary read_dictionary(const std::string& emb_path, const std::string& labels_path) {
  EmbeddingSet emb = read_embeddings(emb_path);
  SiteDictionary dict;
  dict.vectors = std::move(emb.vectors);
  dict.normalized = emb.normalized;
  if (labels_path.empty()) {
    dict.labels.reserve(static_cast<std::size_t>(dict.size()));
    for (Index i = 0; i < dict.size(); ++i) dict.labels.push_back("site" + std::to_string(i));
  } else {
    dict.labels = read_labels(labels_path);
    if (static_cast<Index>(dict.labels.size()) != dict.size())
      throw validation_error(labels_path + ": " + std::to_string(dict.labels.size()) +
                             " labels for " + std::to_string(dict.size()) + " sites");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < dict.labels.size(); ++i) {
      if (dict.labels[i].empty())
        throw validation_error(labels_path + ": empty label at line " + std::to_string(i + 1));
      if (!seen.insert(dict.labels[i]).second)
        throw validation_error(labels_path + ": duplicate label \"" + dict.labels[i] + "\"");
    }
  }
  return dict;
}

// Result JSON ---------------------------------------------------------------

namespace {

nlohmann::ordered_json metrics_to_json(const MetricsReport& m) {
  nlohmann::ordered_json j;
  j["acc"] = m.acc;
  j["nmi"] = m.nmi;
  j["ari"] = m.ari;
  j["entropy"] = m.entropy;
  j["loss"] = m.loss;
  j["contingency"] = m.contingency;
  return j;
}

MetricsReport metrics_from_json(const nlohmann::ordered_json& j) {
  MetricsReport m;
  m.acc = j.at("acc").get<double>();
  m.nmi = j.at("nmi").get<double>();
  m.ari = j.at("ari").get<double>();
  m.entropy = j.at("entropy").get<double>();
  m.loss = j.at("loss").get<double>();
  m.contingency = j.at("contingency").get<std::vector<std::vector<Index>>>();
  return m;
}

}  // namespace

void write_result(const Result& result, const std::string& path) {
  nlohmann::ordered_json j;
  j["format"] = "facloc-result-v1";
  j["command"] = result.command;
  j["config"] = result.config;
  j["loss"] = result.loss;
  if (!result.assignment.empty())
    j["mean_loss"] = result.loss / static_cast<double>(result.assignment.size());
  nlohmann::ordered_json centers = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < result.centers.size(); ++c) {
    nlohmann::ordered_json entry;
    entry["cluster"] = static_cast<Index>(c);
    entry["site"] = result.centers[c];
    entry["label"] = c < result.center_labels.size() ? result.center_labels[c] : "";
    centers.push_back(std::move(entry));
  }
  j["centers"] = std::move(centers);
  j["assignment"] = result.assignment;
  j["metrics"] = result.metrics ? metrics_to_json(*result.metrics)
                                : nlohmann::ordered_json(nullptr);
  j["trace"] = result.trace.is_null() ? nlohmann::ordered_json(nullptr) : result.trace;
  j["per_q"] = result.per_q.is_null() ? nlohmann::ordered_json(nullptr) : result.per_q;
  std::ofstream os(path);
  if (!os) throw io_error(path + ": cannot open for writing");
  os << j.dump(2) << '\n';
  if (!os) throw io_error(path + ": write failed");
}

Result read_result(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw io_error(path + ": cannot open");
  nlohmann::ordered_json j;
  try {
    is >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw io_error(path + ": " + e.what());
  }
  if (j.value("format", "") != "facloc-result-v1")
    throw io_error(path + ": not a facloc result file");
  Result r;
  r.command = j.at("command").get<std::string>();
  r.config = j.at("config");
  r.loss = j.at("loss").get<double>();
  for (const auto& entry : j.at("centers")) {
    r.centers.push_back(entry.at("site").get<Index>());
    r.center_labels.push_back(entry.at("label").get<std::string>());
  }
  r.assignment = j.at("assignment").get<std::vector<Index>>();
  if (!j.at("metrics").is_null()) r.metrics = metrics_from_json(j.at("metrics"));
  r.trace = j.at("trace");
  r.per_q = j.at("per_q");
  return r;
}

// Synthetic generator -------------------------------------------------------

namespace {

std::vector<double> random_unit_vector(std::mt19937_64& rng, Index dim,
                                       std::normal_distribution<double>& gauss) {
  std::vector<double> v(static_cast<std::size_t>(dim));
  while (true) {
    double ss = 0.0;
    for (double& x : v) {
      x = gauss(rng);
      ss += x * x;
    }
    if (ss > 1e-24) {
      const double inv = 1.0 / std::sqrt(ss);
      for (double& x : v) x *= inv;
      return v;
    }
  }
}

}  // namespace

Synthetic gen_synthetic(const SyntheticSpec& spec) {
  if (spec.k < 1) throw validation_error("gen: k must be at least 1");
  if (spec.points_per_cluster < 1)
    throw validation_error("gen: points-per-cluster must be at least 1");
  if (spec.n_sites < spec.k)
    throw validation_error("gen: n-sites must be at least k");
  if (spec.dim < 2) throw validation_error("gen: dim must be at least 2");
  if (spec.noise_sigma < 0.0) throw validation_error("gen: sigma must be nonnegative");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // True sites: rejection-sample until every pairwise dot product is < 0.8.
  const int kBudget = 10000;
  std::vector<std::vector<double>> true_sites;
  true_sites.reserve(static_cast<std::size_t>(spec.k));
  for (Index c = 0; c < spec.k; ++c) {
    int tries = 0;
    while (true) {
      if (++tries > kBudget)
        throw rejection_budget_exceeded(
            "gen: could not place " + std::to_string(spec.k) +
            " true sites with pairwise dot < 0.8 in dimension " + std::to_string(spec.dim));
      auto cand = random_unit_vector(rng, spec.dim, gauss);
      bool ok = true;
      for (const auto& s : true_sites) {
        double dot = 0.0;
        for (Index t = 0; t < spec.dim; ++t) dot += s[static_cast<std::size_t>(t)] * cand[static_cast<std::size_t>(t)];
        if (dot >= 0.8) {
          ok = false;
          break;
        }
      }
      if (ok) {
        true_sites.push_back(std::move(cand));
        break;
      }
    }
  }

  const Index total_sites = spec.n_sites + (spec.general_site ? 1 : 0);
  Synthetic out;
  out.sites.vectors = Matrix(total_sites, spec.dim);
  out.sites.normalized = true;
  for (Index c = 0; c < spec.k; ++c) {
    auto r = out.sites.vectors.row(c);
    for (Index t = 0; t < spec.dim; ++t) r[t] = true_sites[static_cast<std::size_t>(c)][static_cast<std::size_t>(t)];
    out.sites.labels.push_back("class" + std::to_string(c));
  }
  for (Index s = spec.k; s < spec.n_sites; ++s) {
    auto cand = random_unit_vector(rng, spec.dim, gauss);
    auto r = out.sites.vectors.row(s);
    for (Index t = 0; t < spec.dim; ++t) r[t] = cand[static_cast<std::size_t>(t)];
    out.sites.labels.push_back("filler" + std::to_string(s - spec.k));
  }
  if (spec.general_site) {
    std::vector<double> mean(static_cast<std::size_t>(spec.dim), 0.0);
    for (const auto& s : true_sites)
      for (Index t = 0; t < spec.dim; ++t) mean[static_cast<std::size_t>(t)] += s[static_cast<std::size_t>(t)];
    double ss = 0.0;
    for (double& x : mean) {
      x /= static_cast<double>(spec.k);
      ss += x * x;
    }
    if (ss < 1e-12)
      throw solver_error("gen: true sites nearly cancel; attractor direction undefined");
    const double inv = 1.0 / std::sqrt(ss);
    auto r = out.sites.vectors.row(spec.n_sites);
    for (Index t = 0; t < spec.dim; ++t) r[t] = mean[static_cast<std::size_t>(t)] * inv;
    out.sites.labels.push_back("general");
  }

  const Index n_points = spec.k * spec.points_per_cluster;
  out.points.vectors = Matrix(n_points, spec.dim);
  out.points.normalized = true;
  out.truth.resize(static_cast<std::size_t>(n_points));
  Index row = 0;
  for (Index c = 0; c < spec.k; ++c) {
    for (Index p = 0; p < spec.points_per_cluster; ++p, ++row) {
      auto r = out.points.vectors.row(row);
      while (true) {
        double ss = 0.0;
        for (Index t = 0; t < spec.dim; ++t) {
          r[t] = true_sites[static_cast<std::size_t>(c)][static_cast<std::size_t>(t)] +
                 spec.noise_sigma * gauss(rng);
          ss += r[t] * r[t];
        }
        if (ss > 1e-24) {
          const double inv = 1.0 / std::sqrt(ss);
          for (Index t = 0; t < spec.dim; ++t) r[t] *= inv;
          break;
        }
      }
      out.truth[static_cast<std::size_t>(row)] = c;
    }
  }
  return out;
}

}  // namespace facloc::io
