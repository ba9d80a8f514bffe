#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "facloc/metrics.hpp"
#include "facloc/types.hpp"

#include <nlohmann/json.hpp>

namespace facloc::io {

// Binary embedding container ("EMB1"):
//   bytes 0..3   magic "EMB1"
//   bytes 4..7   rows  (u32, little endian)
//   bytes 8..11  dim   (u32, little endian)
//   bytes 12..15 flags (u32, little endian; bit 0 = rows are unit-normalized)
//   then rows*dim IEEE-754 float32, little endian, row-major.
// Total size is exactly 16 + 4*rows*dim bytes.
//
// Paths ending in ".csv" use a plain-text alternative instead: a header line
// "dim=<d>" followed by one comma-separated row per line.
EmbeddingSet read_embeddings(const std::string& path);
void write_embeddings(const EmbeddingSet& emb, const std::string& path);

// One label per line, LF-terminated.
std::vector<std::string> read_labels(const std::string& path);
void write_labels(const std::vector<std::string>& labels, const std::string& path);

// Embeddings plus one unique label per row. With an empty labels_path the
// labels are synthesized as "site<i>".
SiteDictionary read_dictionary(const std::string& emb_path, const std::string& labels_path);

// Result document: every CLI run writes one of these as JSON (stable key
// order, round-trip-exact doubles).
struct Result {
  std::string command;             // cluster | sweep | oracle | eval
  nlohmann::ordered_json config;   // full resolved configuration echo
  std::vector<Index> centers;      // site indices into the solved dictionary
  std::vector<std::string> center_labels;
  std::vector<Index> assignment;
  double loss = 0.0;
  std::optional<MetricsReport> metrics;
  nlohmann::ordered_json trace;    // solver trace summary (null when absent)
  nlohmann::ordered_json per_q;    // sweep table (null when absent)
};

void write_result(const Result& result, const std::string& path);
Result read_result(const std::string& path);

// Synthetic instance generator --------------------------------------------

struct SyntheticSpec {
  Index k = 2;
  Index points_per_cluster = 50;
  Index n_sites = 10;          // dictionary size before the optional attractor
  Index dim = 8;
  double noise_sigma = 0.1;
  bool general_site = false;   // append normalize(mean of true sites)
  std::uint64_t seed = 0;
};

struct Synthetic {
  EmbeddingSet points;        // k * points_per_cluster rows, unit norm
  SiteDictionary sites;       // true sites first, then distractors, attractor last
  std::vector<Index> truth;   // generating cluster of each point
};

// True sites are uniform on the unit sphere, re-drawn until all pairwise dot
// products are below 0.8; distractors are unconstrained uniform draws; points
// are site + N(0, sigma^2 I), re-normalized. Fully determined by the seed.
Synthetic gen_synthetic(const SyntheticSpec& spec);

}  // namespace facloc::io
