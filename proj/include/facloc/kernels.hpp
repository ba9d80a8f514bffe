#pragma once

#include <span>
#include <vector>

#include "facloc/types.hpp"

// Hot inner loops, each in two variants:
//   kernels::serial — straightforward reference implementation,
//   kernels::par    — OpenMP version parallelized over rows (or sites).
//
// Both variants are bitwise-identical by construction, independent of thread
// count: every output element is produced by exactly one fixed-order serial
// computation, and any reduction that crosses rows is accumulated serially in
// index order (sum_ordered). Tests assert equality on random inputs; the
// bench_kernels tool times the two side by side.

namespace facloc::kernels {

// Serial left-to-right sum. This is the one reduction order used everywhere a
// total crosses rows, so parallel and serial paths agree bit for bit.
double sum_ordered(std::span<const double> x);

namespace serial {

// Scale every row to unit L2 norm. Throws zero_vector_error (with row) on a
// zero row.
void normalize_rows(Matrix& m);

// For each point, the nearest site among `candidates` (positions returned are
// indices INTO candidates). Ties go to the earliest candidate. out_sqdist may
// be empty if the distances are not needed.
void nearest_among(const Matrix& points, const Matrix& sites, std::span<const Index> candidates,
                   std::span<Index> out_choice, std::span<double> out_sqdist);

// Nearest and second-nearest candidate per point (PAM's d1/d2 tables).
// Requires at least 2 candidates; out2/d2 get kNoSite/+inf when candidates==1.
void nearest_two(const Matrix& points, const Matrix& sites, std::span<const Index> candidates,
                 std::span<Index> out1, std::span<double> d1, std::span<Index> out2,
                 std::span<double> d2);

// out(i,j) = squared Euclidean distance between a.row(i) and b.row(j).
void pairwise_sqdist(const Matrix& a, const Matrix& b, Matrix& out);

// Per-cluster coordinate sums and member counts. sums must be k x dim.
void cluster_sums(const Matrix& points, std::span<const Index> labels, Index k, Matrix& sums,
                  std::vector<Index>& counts);

// Forward-greedy scores: out_scores[j] = total loss if site j were opened in
// addition to the already-open set (whose per-point best distances are
// best_sqdist). Sites with open_mask[j] != 0 score +inf.
void greedy_scores(const Matrix& points, const Matrix& sites, std::span<const double> best_sqdist,
                   std::span<const char> open_mask, std::span<double> out_scores);

// Single-swap scores: out_scores[j] = total loss after closing the center at
// position removed_pos and opening site j, given per-point nearest (d1) and
// second-nearest (d2) open-center distances and the current choice of
// nearest-center position. Open sites score +inf.
void swap_scores(const Matrix& points, const Matrix& sites, std::span<const Index> choice,
                 std::span<const double> d1, std::span<const double> d2, Index removed_pos,
                 std::span<const char> open_mask, std::span<double> out_scores);

}  // namespace serial

namespace par {

void normalize_rows(Matrix& m);
void nearest_among(const Matrix& points, const Matrix& sites, std::span<const Index> candidates,
                   std::span<Index> out_choice, std::span<double> out_sqdist);
void nearest_two(const Matrix& points, const Matrix& sites, std::span<const Index> candidates,
                 std::span<Index> out1, std::span<double> d1, std::span<Index> out2,
                 std::span<double> d2);
void pairwise_sqdist(const Matrix& a, const Matrix& b, Matrix& out);
void cluster_sums(const Matrix& points, std::span<const Index> labels, Index k, Matrix& sums,
                  std::vector<Index>& counts);
void greedy_scores(const Matrix& points, const Matrix& sites, std::span<const double> best_sqdist,
                   std::span<const char> open_mask, std::span<double> out_scores);
void swap_scores(const Matrix& points, const Matrix& sites, std::span<const Index> choice,
                 std::span<const double> d1, std::span<const double> d2, Index removed_pos,
                 std::span<const char> open_mask, std::span<double> out_scores);

}  // namespace par

// Default dispatch used by the library (the OpenMP variant; identical output).
using par::cluster_sums;
using par::greedy_scores;
using par::nearest_among;
using par::nearest_two;
using par::normalize_rows;
using par::pairwise_sqdist;
using par::swap_scores;

}  // namespace facloc::kernels
