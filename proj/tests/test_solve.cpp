#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <set>
#include <vector>

#include <doctest.h>

#include "facloc/core.hpp"
#include "facloc/init.hpp"
#include "facloc/kernels.hpp"
#include "facloc/solve.hpp"
#include "helpers.hpp"

using namespace facloc;
using test_helpers::make_dict;
using test_helpers::make_emb;

namespace {

const double kRoot2Inv = 0.7071067811865476;  // 1/sqrt(2)
const double kUnitToDiagonal = 2.0 - std::sqrt(2.0);  // sq_dist((1,0),(r,r))

// The 3-site / 2-point instance used throughout: two unit points on the axes,
// candidate sites on both axes plus the diagonal between them.
EmbeddingSet axis_points() { return make_emb({{1.0, 0.0}, {0.0, 1.0}}, true); }
SiteDictionary axis_dict() {
  return make_dict({{1.0, 0.0}, {0.0, 1.0}, {kRoot2Inv, kRoot2Inv}}, true);
}

struct Instance {
  EmbeddingSet emb;
  SiteDictionary dict;
};

Instance random_instance(std::uint64_t seed, Index n_points, Index n_sites, Index dim) {
  std::mt19937_64 rng(seed);
  Instance inst;
  inst.emb.vectors = test_helpers::random_rows(n_points, dim, rng);
  inst.dict.vectors = test_helpers::random_rows(n_sites, dim, rng);
  for (Index s = 0; s < n_sites; ++s) inst.dict.labels.push_back("s" + std::to_string(s));
  return inst;
}

void check_feasible(const ClusterState& st, Index k, Index n_sites, Index n_points) {
  REQUIRE(static_cast<Index>(st.centers.size()) == k);
  std::set<Index> distinct(st.centers.begin(), st.centers.end());
  CHECK(static_cast<Index>(distinct.size()) == k);
  for (Index c : st.centers) {
    CHECK(c >= 0);
    CHECK(c < n_sites);
  }
  REQUIRE(static_cast<Index>(st.assignment.size()) == n_points);
  for (Index a : st.assignment) {
    CHECK(a >= 0);
    CHECK(a < k);
  }
}

void check_trace(const ClusterState& returned, const SolveTrace& trace, Index max_iters) {
  REQUIRE(!trace.records.empty());
  CHECK(trace.records.front().iteration == 0);
  CHECK(trace.records.front().accepted);
  double min_seen = std::numeric_limits<double>::infinity();
  double last_accepted = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < trace.records.size(); ++r) {
    const auto& rec = trace.records[r];
    CHECK(rec.iteration == static_cast<Index>(r));
    if (rec.accepted && r > 0) {
      CHECK(rec.loss < last_accepted);  // accepted losses strictly decrease
    }
    if (rec.accepted) last_accepted = rec.loss;
    min_seen = std::min(min_seen, rec.loss);
  }
  for (const auto& ev : trace.repairs) min_seen = std::min(min_seen, ev.loss_after);
  CHECK(trace.best.loss <= min_seen);
  CHECK(returned.loss == trace.best.loss);
  CHECK(returned.centers == trace.best.centers);
  // A run either converged (final proposal rejected) or exhausted max_iters.
  const auto& last = trace.records.back();
  if (last.accepted) CHECK(last.iteration == max_iters);
}

}  // namespace

TEST_CASE("wcss is zero when every point sits on its center") {
  EmbeddingSet emb = axis_points();
  SiteDictionary dict = axis_dict();
  ClusterState st;
  st.centers = {0, 1};
  st.assignment = {0, 1};
  CHECK(wcss_loss(emb, dict, st) == 0.0);
}

TEST_CASE("wcss of both axis points served by the diagonal site") {
  EmbeddingSet emb = axis_points();
  SiteDictionary dict = axis_dict();
  ClusterState st;
  st.centers = {2};
  st.assignment = {0, 0};
  CHECK(wcss_loss(emb, dict, st) ==
        doctest::Approx(2.0 * kUnitToDiagonal).epsilon(1e-15));
}

TEST_CASE("wcss validates the state it is given") {
  EmbeddingSet emb = axis_points();
  SiteDictionary dict = axis_dict();
  ClusterState st;
  st.centers = {0, 1};
  st.assignment = {0, 1};

  ClusterState bad = st;
  bad.assignment = {0, 2};  // cluster id out of [0, k)
  CHECK_THROWS_AS(wcss_loss(emb, dict, bad), validation_error);

  bad = st;
  bad.centers = {0, 5};  // site outside the dictionary
  CHECK_THROWS_AS(wcss_loss(emb, dict, bad), validation_error);

  bad = st;
  bad.centers = {1, 1};  // duplicate open site
  CHECK_THROWS_AS(wcss_loss(emb, dict, bad), validation_error);

  bad = st;
  bad.assignment = {0};  // wrong length
  CHECK_THROWS_AS(wcss_loss(emb, dict, bad), dimension_mismatch);
}

TEST_CASE("voronoi assignment basics and tie rule") {
  EmbeddingSet emb = axis_points();
  SiteDictionary dict = axis_dict();

  const std::vector<Index> one{2};
  CHECK(assign_voronoi(emb, dict, one) == std::vector<Index>{0, 0});

  const std::vector<Index> exact{0, 1};
  CHECK(assign_voronoi(emb, dict, exact) == std::vector<Index>{0, 1});

  // The diagonal point is equidistant from both axis sites: lower cluster wins.
  EmbeddingSet mid = make_emb({{kRoot2Inv, kRoot2Inv}}, true);
  CHECK(assign_voronoi(mid, dict, exact) == std::vector<Index>{0});

  CHECK_THROWS_AS(assign_voronoi(emb, dict, std::vector<Index>{}), validation_error);
  const std::vector<Index> oob{3};
  CHECK_THROWS_AS(assign_voronoi(emb, dict, oob), validation_error);
}

TEST_CASE("voronoi assignment is WCSS-optimal for fixed centers") {
  Instance inst = random_instance(401, 40, 8, 4);
  const std::vector<Index> centers{1, 4, 6};
  ClusterState st;
  st.centers = centers;
  st.assignment = assign_voronoi(inst.emb, inst.dict, centers);
  const double base = wcss_loss(inst.emb, inst.dict, st);

  std::mt19937_64 rng(77);
  std::uniform_int_distribution<Index> point(0, 39), cluster(0, 2);
  for (int trial = 0; trial < 200; ++trial) {
    ClusterState alt = st;
    for (int moves = 0; moves < 3; ++moves)
      alt.assignment[static_cast<std::size_t>(point(rng))] = cluster(rng);
    CHECK(wcss_loss(inst.emb, inst.dict, alt) >= base);
  }
}

TEST_CASE("projection sends an exact-site cluster to that site") {
  EmbeddingSet emb = make_emb({{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, true);
  SiteDictionary dict = axis_dict();
  const std::vector<Index> assignment{0, 0, 1};
  CHECK(project_centers(emb, dict, assignment, 2, false) == std::vector<Index>{0, 1});
}

TEST_CASE("projection of the two axis points lands on the diagonal site") {
  EmbeddingSet emb = axis_points();
  SiteDictionary dict = axis_dict();
  const std::vector<Index> assignment{0, 0};
  // mean = (0.5, 0.5); nearest of the three sites is the diagonal one.
  CHECK(project_centers(emb, dict, assignment, 1, false) == std::vector<Index>{2});
}

TEST_CASE("projection marks empty clusters with the no-site sentinel") {
  EmbeddingSet emb = axis_points();
  SiteDictionary dict = axis_dict();
  const std::vector<Index> assignment{0, 0};  // cluster 1 empty
  const auto cand = project_centers(emb, dict, assignment, 2, false);
  CHECK(cand[0] == 2);
  CHECK(cand[1] == kNoSite);
}

TEST_CASE("projection collisions keep the lower-loss cluster") {
  // Both clusters project to the diagonal site; cluster 1 sits closer to it.
  EmbeddingSet emb = make_emb({{0.9, 0.35}, {0.35, 0.9}, {0.6, 0.75}, {0.75, 0.6}});
  SiteDictionary dict = axis_dict();
  const std::vector<Index> assignment{0, 0, 1, 1};
  const auto cand = project_centers(emb, dict, assignment, 2, false);
  CHECK(cand[0] == kNoSite);
  CHECK(cand[1] == 2);

  // Identical clusters tie; the lower cluster id keeps the site.
  EmbeddingSet dup = make_emb({{0.6, 0.6}, {0.6, 0.6}});
  const std::vector<Index> one_each{0, 1};
  const auto tied = project_centers(dup, dict, one_each, 2, false);
  CHECK(tied[0] == 2);
  CHECK(tied[1] == kNoSite);
}

TEST_CASE("projection with k=1 finds the globally optimal single site") {
  for (std::uint64_t seed = 500; seed < 510; ++seed) {
    Instance inst = random_instance(seed, 25, 9, 3);
    const std::vector<Index> assignment(25, 0);
    const auto cand = project_centers(inst.emb, inst.dict, assignment, 1, false);
    const ClusterState best = brute_force_oracle(inst.emb, inst.dict, 1);
    CHECK(cand[0] == best.centers[0]);
  }
}

TEST_CASE("empty repair is the identity when nothing is empty") {
  EmbeddingSet emb = axis_points();
  SiteDictionary dict = axis_dict();
  ClusterState st;
  st.centers = {0, 1};
  st.assignment = {0, 1};
  st.loss = 0.0;
  const ClusterState rep = repair_empty(emb, dict, st);
  CHECK(rep.centers == st.centers);
  CHECK(rep.assignment == st.assignment);
}

TEST_CASE("empty repair routes a dead center to the most popular unused site") {
  // Eight points hug site 2 and two hug site 1; the far site 0 captures
  // nothing, so its cluster is empty and gets the eight-vote site 2.
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 8; ++i) rows.push_back({1.0, 0.01 * i});
  rows.push_back({0.10, 0.95});
  rows.push_back({0.05, 0.90});
  EmbeddingSet emb = make_emb(rows);
  SiteDictionary dict = make_dict({{-1.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}});

  ClusterState st;
  st.centers = {0, 1};
  st.assignment = assign_voronoi(emb, dict, st.centers);
  st.loss = wcss_loss(emb, dict, st);
  CHECK(std::count(st.assignment.begin(), st.assignment.end(), 0) == 0);

  const ClusterState rep = repair_empty(emb, dict, st);
  CHECK(rep.centers == std::vector<Index>{2, 1});
  CHECK(std::count(rep.assignment.begin(), rep.assignment.end(), 0) == 8);
  CHECK(std::count(rep.assignment.begin(), rep.assignment.end(), 1) == 2);
  CHECK(rep.loss < st.loss);
}

TEST_CASE("empty repair fills several empties in popularity order") {
  // Three tight blobs of sizes 4, 5, 3 on separate axes; the state opens the
  // first blob's site plus two far decoys, leaving two empty clusters.
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 4; ++i) rows.push_back({1.0, 0.001 * i, 0.0});
  for (int i = 0; i < 5; ++i) rows.push_back({0.0, 1.0, 0.001 * i});
  for (int i = 0; i < 3; ++i) rows.push_back({0.001 * i, 0.0, 1.0});
  EmbeddingSet emb = make_emb(rows);
  SiteDictionary dict = make_dict({{1.0, 0.0, 0.0},
                                   {0.0, 1.0, 0.0},
                                   {0.0, 0.0, 1.0},
                                   {-9.0, 0.0, 0.0},
                                   {0.0, -9.0, 0.0}});

  ClusterState st;
  st.centers = {0, 3, 4};
  st.assignment = assign_voronoi(emb, dict, st.centers);
  st.loss = wcss_loss(emb, dict, st);

  const ClusterState rep = repair_empty(emb, dict, st);
  // Empty clusters 1 and 2 are filled in order: the five-vote site first.
  CHECK(rep.centers == std::vector<Index>{0, 1, 2});
  CHECK(rep.loss <= st.loss);
}

TEST_CASE("empty repair never increases the loss") {
  std::mt19937_64 rng(600);
  for (int trial = 0; trial < 30; ++trial) {
    Instance inst = random_instance(601 + static_cast<std::uint64_t>(trial), 30, 10, 3);
    // A state whose assignment was forced, not Voronoi, so empties can occur.
    ClusterState st;
    st.centers = {0, 1, 2, 3};
    st.assignment.assign(30, 0);
    std::uniform_int_distribution<Index> cl(0, 3);
    for (auto& a : st.assignment) a = cl(rng);
    // Rebuild as a Voronoi state over a random center subset instead.
    std::vector<Index> centers{0, 1, 2, 3};
    std::shuffle(centers.begin(), centers.end(), rng);
    st.centers = centers;
    st.assignment = assign_voronoi(inst.emb, inst.dict, st.centers);
    st.loss = wcss_loss(inst.emb, inst.dict, st);
    const ClusterState rep = repair_empty(inst.emb, inst.dict, st);
    CHECK(rep.loss <= st.loss);
  }
}

TEST_CASE("empty repair fails when there are not enough unused sites") {
  EmbeddingSet emb = make_emb({{1.0, 0.0}, {1.0, 0.1}});
  SiteDictionary dict = make_dict({{1.0, 0.0}, {-1.0, 0.0}});
  ClusterState st;
  st.centers = {0, 1};
  st.assignment = {0, 0};  // cluster 1 empty, no unused site remains
  st.loss = wcss_loss(emb, dict, st);
  CHECK_THROWS_AS(repair_empty(emb, dict, st), no_unused_sites);
}

TEST_CASE("oversize repair is the identity on balanced clusters") {
  EmbeddingSet emb = axis_points();
  SiteDictionary dict = axis_dict();
  ClusterState st;
  st.centers = {0, 1};
  st.assignment = {0, 1};
  st.loss = 0.0;
  const ClusterState rep = repair_oversized(emb, dict, st, 3.0);
  CHECK(rep.centers == st.centers);

  const double inf = std::numeric_limits<double>::infinity();
  ClusterState lop = st;
  lop.assignment = {0, 0};  // fully lopsided, but an infinite factor never fires
  CHECK(repair_oversized(emb, dict, lop, inf).centers == st.centers);

  CHECK_THROWS_AS(repair_oversized(emb, dict, st, 1.0), validation_error);
  CHECK_THROWS_AS(repair_oversized(emb, dict, st, 0.5), validation_error);
}

TEST_CASE("oversize repair plus empty repair separates an attractor state") {
  // Two tight ten-point blobs on the axes; the diagonal attractor site
  // captures everything when opened against a far decoy.
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({1.0, 0.001 * i});
  for (int i = 0; i < 10; ++i) rows.push_back({0.001 * i, 1.0});
  EmbeddingSet emb = make_emb(rows);
  SiteDictionary dict = make_dict(
      {{kRoot2Inv, kRoot2Inv}, {1.0, 0.0}, {0.0, 1.0}, {-kRoot2Inv, -kRoot2Inv}});

  ClusterState st;
  st.centers = {0, 3};
  st.assignment = assign_voronoi(emb, dict, st.centers);
  st.loss = wcss_loss(emb, dict, st);
  CHECK(std::count(st.assignment.begin(), st.assignment.end(), 0) == 20);

  const ClusterState once = repair_oversized(emb, dict, st, 1.5);
  CHECK(once.centers[0] == 1);  // tie between both blob sites breaks low

  const ClusterState fixed = repair_empty(emb, dict, once);
  CHECK(fixed.centers == std::vector<Index>{1, 2});
  CHECK(std::count(fixed.assignment.begin(), fixed.assignment.end(), 0) == 10);
  CHECK(std::count(fixed.assignment.begin(), fixed.assignment.end(), 1) == 10);
  CHECK(fixed.loss < st.loss);
}

TEST_CASE("relaxed search converges immediately from an optimal init") {
  EmbeddingSet emb = axis_points();
  SiteDictionary dict = axis_dict();
  SolveConfig cfg;
  cfg.k = 2;
  InitAssignment init;
  init.labels = {0, 1};
  init.k = 2;

  const auto [state, trace] = relaxed_local_search(emb, dict, cfg, init);
  CHECK(state.loss == 0.0);
  std::vector<Index> sorted = state.centers;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<Index>{0, 1});
  REQUIRE(trace.records.size() == 2);
  CHECK(trace.records[0].iteration == 0);
  CHECK(trace.records[0].accepted);
  CHECK(trace.records[0].loss == 0.0);
  CHECK(trace.records[1].accepted == false);
  check_trace(state, trace, cfg.max_iters);
}

TEST_CASE("relaxed search with k=1 matches the oracle") {
  for (std::uint64_t seed = 700; seed < 710; ++seed) {
    Instance inst = random_instance(seed, 30, 8, 3);
    SolveConfig cfg;
    cfg.k = 1;
    cfg.seed = seed;
    InitAssignment init;
    init.labels.assign(30, 0);
    init.k = 1;
    const auto [state, trace] = relaxed_local_search(inst.emb, inst.dict, cfg, init);
    const ClusterState best = brute_force_oracle(inst.emb, inst.dict, 1);
    CHECK(state.centers == best.centers);
    CHECK(state.loss == best.loss);
  }
}

TEST_CASE("relaxed search traces obey their invariants on random instances") {
  for (std::uint64_t seed = 720; seed < 732; ++seed) {
    Instance inst = random_instance(seed, 50, 12, 4);
    SolveConfig cfg;
    cfg.k = 3;
    cfg.seed = seed;
    const InitAssignment init = ward_init(inst.emb, cfg.k);
    const auto [state, trace] = relaxed_local_search(inst.emb, inst.dict, cfg, init);
    check_feasible(state, cfg.k, inst.dict.size(), inst.emb.size());
    check_trace(state, trace, cfg.max_iters);
  }
}

TEST_CASE("relaxed search is bitwise deterministic") {
  Instance inst = random_instance(750, 60, 14, 5);
  SolveConfig cfg;
  cfg.k = 4;
  cfg.seed = 99;
  const InitAssignment init = ward_init(inst.emb, cfg.k);
  const auto [a, ta] = relaxed_local_search(inst.emb, inst.dict, cfg, init);
  const auto [b, tb] = relaxed_local_search(inst.emb, inst.dict, cfg, init);
  CHECK(a.centers == b.centers);
  CHECK(a.assignment == b.assignment);
  CHECK(a.loss == b.loss);
  CHECK(ta.records.size() == tb.records.size());
  CHECK(ta.repairs.size() == tb.repairs.size());
}

TEST_CASE("relaxed search never beats the exhaustive oracle") {
  for (std::uint64_t seed = 760; seed < 775; ++seed) {
    Instance inst = random_instance(seed, 40, 10, 3);
    SolveConfig cfg;
    cfg.k = 3;
    cfg.seed = seed;
    const InitAssignment init = ward_init(inst.emb, cfg.k);
    const auto [state, trace] = relaxed_local_search(inst.emb, inst.dict, cfg, init);
    const ClusterState best = brute_force_oracle(inst.emb, inst.dict, cfg.k);
    CHECK(state.loss >= best.loss);
  }
}

TEST_CASE("relaxed search survives more empty clusters than unused sites") {
  // Twelve points hug one site while the other three sites sit far away, so
  // every ward cell projects onto the popular site and the collision fill
  // leaves two centers that attract no points. Only one site remains unused,
  // which cannot cover both idle centers; the fill must be skipped instead of
  // aborting the solve.
  std::vector<std::vector<double>> rows;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (int i = 0; i < 12; ++i) rows.push_back({1.0 + noise(rng), noise(rng), noise(rng)});
  const EmbeddingSet emb = make_emb(rows);
  const SiteDictionary dict = make_dict(
      {{1.0, 0.0, 0.0}, {-1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, -1.0, 0.0}});
  SolveConfig cfg;
  cfg.k = 3;
  const auto [state, trace] = run_solver(emb, dict, cfg, InitMethod::ward, SolverKind::relaxed);
  check_feasible(state, cfg.k, dict.size(), emb.size());
  // The popular site keeps every point; the idle centers stay open but empty.
  for (Index a : state.assignment) CHECK(a == state.assignment[0]);
}

TEST_CASE("swap search performs zero swaps at a swap-optimal state") {
  EmbeddingSet emb = axis_points();
  SiteDictionary dict = axis_dict();
  SolveConfig cfg;
  cfg.k = 2;
  const std::vector<Index> init{0, 1};
  const auto [state, trace] = pam_local_search(emb, dict, cfg, init);
  CHECK(state.loss == 0.0);
  CHECK(state.centers == init);
  REQUIRE(trace.records.size() == 2);
  CHECK(trace.records[1].accepted == false);
}

TEST_CASE("swap search improves a bad start and respects the oracle bound") {
  for (std::uint64_t seed = 800; seed < 812; ++seed) {
    Instance inst = random_instance(seed, 40, 10, 3);
    SolveConfig cfg;
    cfg.k = 3;
    cfg.seed = seed;
    const std::vector<Index> init{0, 1, 2};
    const auto [state, trace] = pam_local_search(inst.emb, inst.dict, cfg, init);
    check_feasible(state, cfg.k, inst.dict.size(), inst.emb.size());
    check_trace(state, trace, cfg.max_iters);
    const ClusterState best = brute_force_oracle(inst.emb, inst.dict, cfg.k);
    CHECK(state.loss >= best.loss);
  }
}

TEST_CASE("single swaps reach the oracle on a planted instance") {
  // Three tight blobs with their exact centers in the dictionary plus decoys:
  // the oracle opens the three blob sites and one-swap search finds them.
  std::vector<std::vector<double>> rows;
  std::mt19937_64 rng(820);
  std::normal_distribution<double> noise(0.0, 0.01);
  const std::vector<std::vector<double>> blob = {
      {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
  for (const auto& c : blob)
    for (int i = 0; i < 8; ++i)
      rows.push_back({c[0] + noise(rng), c[1] + noise(rng), c[2] + noise(rng)});
  EmbeddingSet emb = make_emb(rows);
  SiteDictionary dict = make_dict({{1.0, 0.0, 0.0},
                                   {0.0, 1.0, 0.0},
                                   {0.0, 0.0, 1.0},
                                   {0.6, 0.6, 0.0},
                                   {0.0, 0.6, 0.6},
                                   {5.0, 5.0, 5.0}});
  SolveConfig cfg;
  cfg.k = 3;
  const std::vector<Index> init{3, 4, 5};
  const auto [state, trace] = pam_local_search(emb, dict, cfg, init);
  const ClusterState best = brute_force_oracle(emb, dict, 3);
  CHECK(state.loss == best.loss);
  std::vector<Index> sorted = state.centers;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == best.centers);
}

TEST_CASE("swap search handles multi-site swaps") {
  for (std::uint64_t seed = 830; seed < 836; ++seed) {
    Instance inst = random_instance(seed, 30, 9, 3);
    SolveConfig cfg;
    cfg.k = 4;
    cfg.swaps_p = 2;
    cfg.seed = seed;
    const std::vector<Index> init{0, 1, 2, 3};
    const auto [state, trace] = pam_local_search(inst.emb, inst.dict, cfg, init);
    check_feasible(state, cfg.k, inst.dict.size(), inst.emb.size());
    check_trace(state, trace, cfg.max_iters);
    const ClusterState best = brute_force_oracle(inst.emb, inst.dict, cfg.k);
    CHECK(state.loss >= best.loss);
  }
}

TEST_CASE("swap search with every site open stops immediately") {
  Instance inst = random_instance(840, 12, 4, 3);
  SolveConfig cfg;
  cfg.k = 4;
  const std::vector<Index> init{0, 1, 2, 3};
  const auto [state, trace] = pam_local_search(inst.emb, inst.dict, cfg, init);
  CHECK(state.centers == init);
  REQUIRE(trace.records.size() == 2);
  CHECK(trace.records[1].accepted == false);
}

TEST_CASE("swap search is bitwise deterministic and validates its init") {
  Instance inst = random_instance(850, 35, 11, 4);
  SolveConfig cfg;
  cfg.k = 3;
  const std::vector<Index> init{2, 5, 9};
  const auto [a, ta] = pam_local_search(inst.emb, inst.dict, cfg, init);
  const auto [b, tb] = pam_local_search(inst.emb, inst.dict, cfg, init);
  CHECK(a.centers == b.centers);
  CHECK(a.assignment == b.assignment);
  CHECK(a.loss == b.loss);

  const std::vector<Index> dup{2, 2, 9};
  CHECK_THROWS_AS(pam_local_search(inst.emb, inst.dict, cfg, dup), validation_error);
}

TEST_CASE("oracle with k equal to the dictionary opens every site") {
  Instance inst = random_instance(900, 20, 5, 3);
  const ClusterState best = brute_force_oracle(inst.emb, inst.dict, 5);
  CHECK(best.centers == std::vector<Index>{0, 1, 2, 3, 4});
  double expect = 0.0;
  for (Index i = 0; i < inst.emb.size(); ++i) {
    double m = std::numeric_limits<double>::infinity();
    for (Index s = 0; s < inst.dict.size(); ++s)
      m = std::min(m, sq_dist(inst.emb.vectors.row(i), inst.dict.vectors.row(s)));
    expect += m;
  }
  CHECK(best.loss == expect);
}

TEST_CASE("oracle picks the zero-loss pair on the axis instance") {
  // The three 2-subsets cost 0, ~0.586 and ~0.586; the axis pair wins.
  const ClusterState best = brute_force_oracle(axis_points(), axis_dict(), 2);
  CHECK(best.centers == std::vector<Index>{0, 1});
  CHECK(best.loss == 0.0);
}

TEST_CASE("oracle with k=1 is the argmin over single sites") {
  Instance inst = random_instance(910, 25, 7, 3);
  const ClusterState best = brute_force_oracle(inst.emb, inst.dict, 1);
  double best_total = std::numeric_limits<double>::infinity();
  Index best_site = -1;
  for (Index s = 0; s < inst.dict.size(); ++s) {
    double total = 0.0;
    for (Index i = 0; i < inst.emb.size(); ++i)
      total += sq_dist(inst.emb.vectors.row(i), inst.dict.vectors.row(s));
    if (total < best_total) {
      best_total = total;
      best_site = s;
    }
  }
  CHECK(best.centers == std::vector<Index>{best_site});
}

TEST_CASE("oracle ties resolve to the lexicographically smallest subset") {
  // Sites 0 and 1 are identical, so {0,2} and {1,2} cost the same.
  EmbeddingSet emb = make_emb({{1.0, 0.0}, {0.9, 0.1}, {0.0, 1.0}, {0.1, 0.9}});
  SiteDictionary dict = make_dict({{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}});
  const ClusterState best = brute_force_oracle(emb, dict, 2);
  CHECK(best.centers == std::vector<Index>{0, 2});
}

TEST_CASE("oracle refuses combinatorial blowups and bad k") {
  Instance inst = random_instance(920, 5, 30, 3);
  CHECK_THROWS_AS(brute_force_oracle(inst.emb, inst.dict, 15), instance_too_large);
  CHECK_THROWS_AS(brute_force_oracle(inst.emb, inst.dict, 31), k_too_large);
  CHECK_THROWS_AS(brute_force_oracle(inst.emb, inst.dict, 0), validation_error);
}

TEST_CASE("scaling all points leaves the oracle's chosen sites unchanged") {
  std::mt19937_64 rng(930);
  Instance inst;
  inst.emb.vectors = test_helpers::random_rows(30, 4, rng);
  inst.dict.vectors = Matrix(8, 4);
  for (Index s = 0; s < 8; ++s) {
    const auto u = test_helpers::unit_vector(4, rng);
    auto row = inst.dict.vectors.row(s);
    std::copy(u.begin(), u.end(), row.begin());
    inst.dict.labels.push_back("s" + std::to_string(s));
  }
  inst.dict.normalized = true;

  EmbeddingSet scaled = inst.emb;
  for (double& v : scaled.vectors.data) v *= 2.5;

  for (Index k = 1; k <= 3; ++k) {
    const ClusterState a = brute_force_oracle(inst.emb, inst.dict, k);
    const ClusterState b = brute_force_oracle(scaled, inst.dict, k);
    CHECK(a.centers == b.centers);
  }
}

TEST_CASE("normalize-on-the-fly equals solving pre-normalized data") {
  Instance inst = random_instance(940, 40, 10, 4);

  EmbeddingSet pre_emb = inst.emb;
  kernels::normalize_rows(pre_emb.vectors);
  pre_emb.normalized = true;
  SiteDictionary pre_dict = inst.dict;
  kernels::normalize_rows(pre_dict.vectors);
  pre_dict.normalized = true;

  for (SolverKind solver : {SolverKind::relaxed, SolverKind::pam}) {
    SolveConfig on;
    on.k = 3;
    on.seed = 5;
    on.normalize = true;
    SolveConfig off = on;
    off.normalize = false;
    // The init partition must also see the same geometry in both runs.
    const auto [a, ta] = run_solver(inst.emb, inst.dict, on, InitMethod::kmeans, solver);
    const auto [b, tb] = run_solver(pre_emb, pre_dict, off, InitMethod::kmeans, solver);
    CHECK(a.centers == b.centers);
    CHECK(a.loss == b.loss);
  }
}

TEST_CASE("initial centers from a partition are always distinct and in range") {
  for (std::uint64_t seed = 950; seed < 960; ++seed) {
    Instance inst = random_instance(seed, 30, 8, 3);
    const InitAssignment init = ward_init(inst.emb, 4);
    const auto centers =
        initial_centers_from_assignment(inst.emb, inst.dict, init.labels, 4, false);
    std::set<Index> distinct(centers.begin(), centers.end());
    CHECK(distinct.size() == 4);
    for (Index c : centers) {
      CHECK(c >= 0);
      CHECK(c < 8);
    }
  }
}

TEST_CASE("the solver driver wires every init method to both solvers") {
  Instance inst = random_instance(970, 36, 9, 3);
  for (InitMethod init : {InitMethod::ward, InitMethod::kmeans, InitMethod::greedy}) {
    for (SolverKind solver : {SolverKind::relaxed, SolverKind::pam}) {
      SolveConfig cfg;
      cfg.k = 3;
      cfg.seed = 7;
      const auto [state, trace] = run_solver(inst.emb, inst.dict, cfg, init, solver);
      check_feasible(state, cfg.k, inst.dict.size(), inst.emb.size());
      check_trace(state, trace, cfg.max_iters);
    }
  }
}
