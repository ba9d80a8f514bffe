#pragma once

#include <span>

#include "facloc/types.hpp"

namespace facloc {

// Returns a copy of m with every row scaled to unit L2 norm.
// Throws zero_vector_error (carrying the row index) on a zero row.
Matrix l2_normalize_rows(const Matrix& m);
void l2_normalize_rows_inplace(Matrix& m);

// Squared Euclidean distance, accumulated left to right over coordinates.
// Throws dimension_mismatch when the spans differ in length.
double sq_dist(std::span<const double> a, std::span<const double> b);

// Index of the dictionary site minimizing sq_dist to v, ties to the lowest
// index. `exclude` removes sites from consideration; excluding everything
// throws empty_candidate_set.
Index nearest_site(std::span<const double> v, const SiteDictionary& dict,
                   std::span<const Index> exclude = {});

}  // namespace facloc
