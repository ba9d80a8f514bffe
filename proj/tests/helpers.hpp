#pragma once

#include <cmath>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

#include "facloc/types.hpp"

namespace test_helpers {

template <typename Rows>
facloc::Matrix make_matrix(const Rows& rows) {
  const auto r = static_cast<facloc::Index>(rows.size());
  const auto c = static_cast<facloc::Index>(rows.begin()->size());
  facloc::Matrix m(r, c);
  facloc::Index i = 0;
  for (const auto& row : rows) {
    facloc::Index j = 0;
    for (double v : row) m.at(i, j++) = v;
    ++i;
  }
  return m;
}

inline facloc::Matrix make_matrix(std::initializer_list<std::initializer_list<double>> rows) {
  return make_matrix<std::initializer_list<std::initializer_list<double>>>(rows);
}

template <typename Rows>
facloc::EmbeddingSet make_emb(const Rows& rows, bool normalized = false) {
  facloc::EmbeddingSet e;
  e.vectors = make_matrix(rows);
  e.normalized = normalized;
  return e;
}

inline facloc::EmbeddingSet make_emb(std::initializer_list<std::initializer_list<double>> rows,
                                     bool normalized = false) {
  facloc::EmbeddingSet e;
  e.vectors = make_matrix(rows);
  e.normalized = normalized;
  return e;
}

template <typename Rows>
facloc::SiteDictionary make_dict(const Rows& rows, bool normalized = false) {
  facloc::SiteDictionary d;
  d.vectors = make_matrix(rows);
  for (facloc::Index i = 0; i < d.vectors.rows; ++i)
    d.labels.push_back("site" + std::to_string(i));
  d.normalized = normalized;
  return d;
}

inline facloc::SiteDictionary make_dict(std::initializer_list<std::initializer_list<double>> rows,
                                        bool normalized = false) {
  facloc::SiteDictionary d;
  d.vectors = make_matrix(rows);
  for (facloc::Index i = 0; i < d.vectors.rows; ++i)
    d.labels.push_back("site" + std::to_string(i));
  d.normalized = normalized;
  return d;
}

inline facloc::Matrix random_rows(facloc::Index rows, facloc::Index cols, std::mt19937_64& rng) {
  facloc::Matrix m(rows, cols);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (double& v : m.data) v = dist(rng);
  return m;
}

inline std::vector<double> unit_vector(facloc::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(dim));
  double ss = 0.0;
  do {
    ss = 0.0;
    for (auto& x : v) {
      x = dist(rng);
      ss += x * x;
    }
  } while (ss < 1e-12);
  const double inv = 1.0 / std::sqrt(ss);
  for (auto& x : v) x *= inv;
  return v;
}

}  // namespace test_helpers
