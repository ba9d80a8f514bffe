// Times the serial reference kernels against the OpenMP variants on random
// data and verifies the outputs are bitwise identical. Usage:
//   bench_kernels [n_points] [n_sites] [dim] [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "facloc/kernels.hpp"

namespace {

using facloc::Index;
using facloc::Matrix;
namespace kernels = facloc::kernels;

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  Matrix m(rows, cols);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (double& v : m.data) v = dist(rng);
  return m;
}

template <class F>
double time_best_of(Index repeats, F&& fn) {
  double best = 1e300;
  for (Index r = 0; r < repeats; ++r) {
    const double t0 = now_ms();
    fn();
    const double t1 = now_ms();
    if (t1 - t0 < best) best = t1 - t0;
  }
  return best;
}

bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool bits_equal(const std::vector<Index>& a, const std::vector<Index>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(Index)) == 0;
}

void report(const char* name, double serial_ms, double par_ms, bool identical) {
  std::printf("%-16s serial %10.3f ms   parallel %10.3f ms   speedup %5.2fx   %s\n", name,
              serial_ms, par_ms, par_ms > 0 ? serial_ms / par_ms : 0.0,
              identical ? "bitwise-identical" : "MISMATCH");
}

}  // namespace

Index positive_arg(const char* text, const char* name) {
  char* end = nullptr;
  const long long v = std::strtoll(text, &end, 10);
  if (end == text || *end != '\0' || v < 1) {
    std::fprintf(stderr, "bench_kernels: %s must be a positive integer, got \"%s\"\n", name,
                 text);
    std::fprintf(stderr, "usage: bench_kernels [n_points] [n_sites] [dim] [repeats]\n");
    std::exit(2);
  }
  return static_cast<Index>(v);
}

int main(int argc, char** argv) {
  const Index n = argc > 1 ? positive_arg(argv[1], "n_points") : 20000;
  const Index m = argc > 2 ? positive_arg(argv[2], "n_sites") : 256;
  const Index d = argc > 3 ? positive_arg(argv[3], "dim") : 64;
  const Index repeats = argc > 4 ? positive_arg(argv[4], "repeats") : 3;

#ifdef _OPENMP
  std::printf("points=%lld sites=%lld dim=%lld repeats=%lld threads=%d\n",
              static_cast<long long>(n), static_cast<long long>(m), static_cast<long long>(d),
              static_cast<long long>(repeats), omp_get_max_threads());
#else
  std::printf("points=%lld sites=%lld dim=%lld repeats=%lld (OpenMP disabled)\n",
              static_cast<long long>(n), static_cast<long long>(m), static_cast<long long>(d),
              static_cast<long long>(repeats));
#endif

  std::mt19937_64 rng(7);
  const Matrix points = random_matrix(n, d, rng);
  const Matrix sites = random_matrix(m, d, rng);
  std::vector<Index> candidates(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j) candidates[static_cast<std::size_t>(j)] = j;
  std::vector<Index> labels(static_cast<std::size_t>(n));
  std::uniform_int_distribution<Index> pick(0, m - 1);
  for (auto& l : labels) l = pick(rng) % 8;

  bool all_ok = true;

  {
    Matrix a = points, b = points;
    const double ts = time_best_of(repeats, [&] {
      a = points;
      kernels::serial::normalize_rows(a);
    });
    const double tp = time_best_of(repeats, [&] {
      b = points;
      kernels::par::normalize_rows(b);
    });
    const bool ok = bits_equal(a.data, b.data);
    all_ok = all_ok && ok;
    report("normalize_rows", ts, tp, ok);
  }

  {
    std::vector<Index> c1(static_cast<std::size_t>(n)), c2(static_cast<std::size_t>(n));
    std::vector<double> d1(static_cast<std::size_t>(n)), d2(static_cast<std::size_t>(n));
    const double ts = time_best_of(
        repeats, [&] { kernels::serial::nearest_among(points, sites, candidates, c1, d1); });
    const double tp = time_best_of(
        repeats, [&] { kernels::par::nearest_among(points, sites, candidates, c2, d2); });
    const bool ok = bits_equal(c1, c2) && bits_equal(d1, d2);
    all_ok = all_ok && ok;
    report("nearest_among", ts, tp, ok);
  }

  {
    std::vector<Index> o1(static_cast<std::size_t>(n)), o2(static_cast<std::size_t>(n));
    std::vector<Index> p1(static_cast<std::size_t>(n)), p2(static_cast<std::size_t>(n));
    std::vector<double> a1(static_cast<std::size_t>(n)), a2(static_cast<std::size_t>(n));
    std::vector<double> b1(static_cast<std::size_t>(n)), b2(static_cast<std::size_t>(n));
    const double ts = time_best_of(repeats, [&] {
      kernels::serial::nearest_two(points, sites, candidates, o1, a1, p1, b1);
    });
    const double tp = time_best_of(repeats, [&] {
      kernels::par::nearest_two(points, sites, candidates, o2, a2, p2, b2);
    });
    const bool ok =
        bits_equal(o1, o2) && bits_equal(a1, a2) && bits_equal(p1, p2) && bits_equal(b1, b2);
    all_ok = all_ok && ok;
    report("nearest_two", ts, tp, ok);
  }

  {
    Matrix out1(n, m), out2(n, m);
    const double ts =
        time_best_of(repeats, [&] { kernels::serial::pairwise_sqdist(points, sites, out1); });
    const double tp =
        time_best_of(repeats, [&] { kernels::par::pairwise_sqdist(points, sites, out2); });
    const bool ok = bits_equal(out1.data, out2.data);
    all_ok = all_ok && ok;
    report("pairwise_sqdist", ts, tp, ok);
  }

  {
    Matrix s1(8, d), s2(8, d);
    std::vector<Index> n1, n2;
    const double ts =
        time_best_of(repeats, [&] { kernels::serial::cluster_sums(points, labels, 8, s1, n1); });
    const double tp =
        time_best_of(repeats, [&] { kernels::par::cluster_sums(points, labels, 8, s2, n2); });
    const bool ok = bits_equal(s1.data, s2.data) && bits_equal(n1, n2);
    all_ok = all_ok && ok;
    report("cluster_sums", ts, tp, ok);
  }

  {
    std::vector<double> best(static_cast<std::size_t>(n), 1e30);
    std::vector<char> open(static_cast<std::size_t>(m), 0);
    std::vector<double> g1(static_cast<std::size_t>(m)), g2(static_cast<std::size_t>(m));
    const double ts = time_best_of(
        repeats, [&] { kernels::serial::greedy_scores(points, sites, best, open, g1); });
    const double tp = time_best_of(
        repeats, [&] { kernels::par::greedy_scores(points, sites, best, open, g2); });
    const bool ok = bits_equal(g1, g2);
    all_ok = all_ok && ok;
    report("greedy_scores", ts, tp, ok);
  }

  {
    // A plausible PAM sweep state: 8 open sites, nearest/second tables.
    std::vector<Index> open_sites(candidates.begin(), candidates.begin() + 8);
    std::vector<Index> choice(static_cast<std::size_t>(n)), second(static_cast<std::size_t>(n));
    std::vector<double> d1(static_cast<std::size_t>(n)), d2(static_cast<std::size_t>(n));
    kernels::serial::nearest_two(points, sites, open_sites, choice, d1, second, d2);
    std::vector<char> open(static_cast<std::size_t>(m), 0);
    for (Index s : open_sites) open[static_cast<std::size_t>(s)] = 1;
    std::vector<double> s1(static_cast<std::size_t>(m)), s2(static_cast<std::size_t>(m));
    const double ts = time_best_of(repeats, [&] {
      kernels::serial::swap_scores(points, sites, choice, d1, d2, 0, open, s1);
    });
    const double tp = time_best_of(repeats, [&] {
      kernels::par::swap_scores(points, sites, choice, d1, d2, 0, open, s2);
    });
    const bool ok = bits_equal(s1, s2);
    all_ok = all_ok && ok;
    report("swap_scores", ts, tp, ok);
  }

  if (!all_ok) {
    std::printf("FAILED: parallel kernels do not match the serial reference\n");
    return 1;
  }
  return 0;
}
