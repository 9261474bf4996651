#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "pmc/partition.hpp"
#include "pmc/rng.hpp"

using namespace pmc;

namespace {

// Literal two-sided cost: for a candidate a, points strictly below go left,
// strictly above go right, each side contributing squared deviations from
// its own mean. O(n^2) over all midpoints between consecutive distinct
// sorted values.
std::optional<std::pair<double, double>> brute_force_cut(
    std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double best_cost = 1e300, best_pos = 0.0;
  bool found = false;
  for (std::size_t j = 1; j < v.size(); ++j) {
    if (!(v[j - 1] < v[j])) continue;
    double a = 0.5 * (v[j - 1] + v[j]);
    if (!(v[j - 1] < a)) continue;
    std::vector<double> left, right;
    for (double x : v) (x < a ? left : right).push_back(x);
    auto side_cost = [](const std::vector<double>& s) {
      if (s.size() < 2) return 0.0;
      double mean = std::accumulate(s.begin(), s.end(), 0.0) / double(s.size());
      double acc = 0.0;
      for (double x : s) acc += (x - mean) * (x - mean);
      return acc;
    };
    double cost = side_cost(left) + side_cost(right);
    if (cost < best_cost) {
      best_cost = cost;
      best_pos = a;
      found = true;
    }
  }
  if (!found) return std::nullopt;
  return std::make_pair(best_pos, best_cost);
}

Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

}  // namespace

TEST_CASE("two-cluster hand cases") {
  {
    std::vector<double> v = {0.0, 0.0, 1.0, 1.0};
    auto r = best_cut_1d(v);
    REQUIRE(r.has_value());
    CHECK(r->first == doctest::Approx(0.5));
    CHECK(r->second == doctest::Approx(0.0));
  }
  {
    std::vector<double> v = {0.0, 1.0};
    auto r = best_cut_1d(v);
    REQUIRE(r.has_value());
    CHECK(r->first == doctest::Approx(0.5));
    CHECK(r->second == doctest::Approx(0.0));
  }
  {
    std::vector<double> v = {2.0, 2.0, 2.0};
    CHECK_FALSE(best_cut_1d(v).has_value());
  }
}

TEST_CASE("prefix-sum cut equals the quadratic brute force") {
  Rng rng(101);
  std::uniform_real_distribution<double> unif(-5.0, 5.0);
  std::uniform_int_distribution<int> ndist(2, 200);
  for (int rep = 0; rep < 100; ++rep) {
    std::size_t n = std::size_t(ndist(rng));
    std::vector<double> v(n);
    for (auto& x : v) x = unif(rng);
    if (rep % 7 == 0)  // exercise ties
      for (auto& x : v) x = std::round(x);
    std::sort(v.begin(), v.end());
    auto fast = best_cut_1d(v);
    auto slow = brute_force_cut(v);
    REQUIRE(fast.has_value() == slow.has_value());
    if (!fast) continue;
    CHECK(fast->first == doctest::Approx(slow->first).epsilon(1e-12));
    CHECK(fast->second == doctest::Approx(slow->second).epsilon(1e-9));
  }
}

TEST_CASE("well-separated 1d clusters cut near the gap") {
  Rng rng(7);
  std::normal_distribution<double> g(0.0, 0.1);
  std::uniform_real_distribution<double> pick(0.0, 1.0);
  std::vector<double> v(5000);
  for (auto& x : v) x = (pick(rng) < 0.5 ? -3.0 : 3.0) + g(rng);
  std::sort(v.begin(), v.end());
  auto fast = best_cut_1d(v);
  auto slow = brute_force_cut(v);
  REQUIRE(fast.has_value());
  CHECK(std::abs(fast->first) < 0.5);
  CHECK(fast->first == doctest::Approx(slow->first));
}

TEST_CASE("nd cut picks the separated stretched axis") {
  // grid stretched x10 on axis 0, split into two tight clusters along axis 0
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      double x = i < 10 ? double(i) * 0.02 : 9.8 + double(i - 10) * 0.02;
      pts.push_back({x, double(j) / 19.0});
    }
  Matrix m = to_matrix(pts);
  auto cut = best_cut_nd(m);
  REQUIRE(cut.has_value());
  CHECK(cut->axis == 0);

  // oracle: exhaustive per-axis scan locates the same axis
  std::vector<double> ax0(m.rows()), ax1(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    ax0[i] = m(i, 0);
    ax1[i] = m(i, 1);
  }
  auto c0 = brute_force_cut(ax0);
  auto c1 = brute_force_cut(ax1);
  REQUIRE(c0.has_value());
  REQUIRE(c1.has_value());
  CHECK(c0->second < c1->second);
  CHECK(cut->cost_after == doctest::Approx(c0->second));
  CHECK(cut->position == doctest::Approx(c0->first));
}

TEST_CASE("identical points yield no cut") {
  Matrix m = to_matrix({{1.0, 2.0}, {1.0, 2.0}});
  CHECK_FALSE(best_cut_nd(m).has_value());
}

TEST_CASE("single-leaf tree and empty input") {
  ParameterBox box({-1.0, -1.0}, {1.0, 1.0});
  Matrix empty(0, 2);
  PartitionTree t = build_tree(empty, box, 8);
  CHECK(t.leaves().size() == 1);
  CHECK(t.n_cuts() == 0);

  Matrix pts = to_matrix({{0.1, 0.2}, {-0.5, 0.7}, {0.4, -0.3}});
  PartitionTree one = build_tree(pts, box, 1);
  CHECK(one.leaves().size() == 1);
  CHECK(one.leaves()[0].box.lower == box.lower);
  CHECK(one.leaves()[0].exploration_count == 3);
}

TEST_CASE("1d greedy cost trace is non-increasing and flattens") {
  Rng rng(31);
  std::normal_distribution<double> g(0.0, 0.3);
  std::uniform_real_distribution<double> pick(0.0, 1.0);
  Matrix pts(5000, 1);
  for (std::size_t i = 0; i < pts.rows(); ++i) {
    double u = pick(rng);
    double mode = u < 0.4 ? -4.0 : (u < 0.8 ? 4.0 : 0.0);
    pts(i, 0) = mode + g(rng);
  }
  ParameterBox box({-10.0}, {10.0});
  PartitionTree t = build_tree(pts, box, 4, 0.0);
  const auto& trace = t.cost_trace();
  REQUIRE(trace.size() >= 3);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1]);
  // early cuts between separated clusters dominate later refinements
  CHECK(trace[0] - trace[1] > trace[trace.size() - 2] - trace.back());
}

TEST_CASE("leaf membership partitions the input points") {
  Rng rng(13);
  std::uniform_real_distribution<double> unif(-9.0, 9.0);
  Matrix pts(500, 2);
  for (std::size_t i = 0; i < pts.rows(); ++i) {
    pts(i, 0) = unif(rng);
    pts(i, 1) = unif(rng);
  }
  ParameterBox box({-10.0, -10.0}, {10.0, 10.0});
  PartitionTree t = build_tree(pts, box, 30, 0.0);
  CHECK(t.leaves().size() == 30);
  CHECK(t.n_cuts() == 29);

  std::size_t assigned = 0;
  for (const Subspace& s : t.leaves()) assigned += s.exploration_count;
  CHECK(assigned == pts.rows());

  for (std::size_t i = 0; i < pts.rows(); ++i) {
    std::size_t via_locate = t.locate(pts.row(i));
    std::size_t memberships = 0, via_scan = 0;
    for (const Subspace& s : t.leaves()) {
      // half-open: on-boundary points belong to the upper leaf
      bool inside = true;
      for (std::size_t d = 0; d < 2; ++d) {
        bool lower_ok = s.box.lower[d] == box.lower[d]
                            ? pts(i, d) >= s.box.lower[d]
                            : pts(i, d) >= s.box.lower[d];
        bool upper_ok = s.box.upper[d] == box.upper[d]
                            ? pts(i, d) <= s.box.upper[d]
                            : pts(i, d) < s.box.upper[d];
        inside = inside && lower_ok && upper_ok;
      }
      if (inside) {
        ++memberships;
        via_scan = s.index;
      }
    }
    CHECK(memberships == 1);
    CHECK(via_scan == via_locate);
  }
}

TEST_CASE("locate boundary convention and volume tiling") {
  Matrix pts = to_matrix({{-1.0, 0.0}, {-1.0, 1.0}, {1.0, 0.0}, {1.0, 1.0}});
  ParameterBox box({-2.0, -2.0}, {2.0, 2.0});
  PartitionTree t = build_tree(pts, box, 2, 0.0);
  REQUIRE(t.leaves().size() == 2);

  std::vector<double> origin = {0.0, 0.0};  // exactly on the cut
  std::size_t leaf = t.locate(origin);
  CHECK(t.leaves()[leaf].box.lower[0] == doctest::Approx(0.0));

  std::vector<double> outside = {5.0, 0.0};
  CHECK_THROWS_AS(t.locate(outside), std::out_of_range);

  double vol = 0.0;
  for (const Subspace& s : t.leaves()) vol += s.box.volume();
  CHECK(vol == doctest::Approx(box.volume()).epsilon(1e-9));
}

TEST_CASE("random points locate into exactly one leaf") {
  Rng rng(47);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix pts(2000, 3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t i = 0; i < pts.rows(); ++i)
    for (std::size_t d = 0; d < 3; ++d)
      pts(i, d) = (unif(rng) < 0.5 ? -5.0 : 5.0) + g(rng);
  ParameterBox box(std::vector<double>(3, -20.0), std::vector<double>(3, 20.0));
  PartitionTree t = build_tree(pts, box, 16, 0.0);

  for (int i = 0; i < 100000; ++i) {
    std::vector<double> x(3);
    for (auto& v : x) v = -20.0 + 40.0 * unif(rng);
    std::size_t leaf = t.locate(x);
    std::size_t count = 0, found = 0;
    for (const Subspace& s : t.leaves()) {
      bool inside = true;
      for (std::size_t d = 0; d < 3; ++d)
        inside = inside && x[d] >= s.box.lower[d] &&
                 (x[d] < s.box.upper[d] || s.box.upper[d] == box.upper[d]);
      if (inside) {
        ++count;
        found = s.index;
      }
    }
    REQUIRE(count == 1);
    REQUIRE(found == leaf);
  }
}

TEST_CASE("tree is invariant under point permutation") {
  Rng rng(59);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  std::vector<std::vector<double>> rows(400, std::vector<double>(2));
  for (auto& r : rows)
    for (auto& v : r) v = unif(rng);

  ParameterBox box({-4.0, -4.0}, {4.0, 4.0});
  PartitionTree a = build_tree(to_matrix(rows), box, 12, 0.0);
  std::shuffle(rows.begin(), rows.end(), rng);
  PartitionTree b = build_tree(to_matrix(rows), box, 12, 0.0);

  REQUIRE(a.nodes().size() == b.nodes().size());
  for (std::size_t i = 0; i < a.nodes().size(); ++i) {
    CHECK(a.nodes()[i].axis == b.nodes()[i].axis);
    CHECK(a.nodes()[i].position == b.nodes()[i].position);
    CHECK(a.nodes()[i].leaf == b.nodes()[i].leaf);
  }
}

TEST_CASE("restricting the cut axes is honored") {
  Rng rng(61);
  std::normal_distribution<double> g(0.0, 0.5);
  std::uniform_real_distribution<double> pick(0.0, 1.0);
  Matrix pts(600, 2);
  for (std::size_t i = 0; i < pts.rows(); ++i) {
    pts(i, 0) = (pick(rng) < 0.5 ? -3.0 : 3.0) + g(rng);
    pts(i, 1) = (pick(rng) < 0.5 ? -3.0 : 3.0) + g(rng);
  }
  ParameterBox box({-8.0, -8.0}, {8.0, 8.0});
  PartitionTree t = build_tree(pts, box, 8, 0.0, {1});
  for (const auto& nd : t.nodes())
    if (nd.left >= 0) CHECK(nd.axis == 1);
}

TEST_CASE("json serialization round-trips") {
  Rng rng(71);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Matrix pts(200, 2);
  for (std::size_t i = 0; i < pts.rows(); ++i) {
    pts(i, 0) = unif(rng);
    pts(i, 1) = unif(rng);
  }
  ParameterBox box({-1.0, -1.0}, {1.0, 1.0});
  PartitionTree t = build_tree(pts, box, 7, 0.0);
  PartitionTree back = PartitionTree::from_json(t.to_json());

  REQUIRE(back.leaves().size() == t.leaves().size());
  for (std::size_t k = 0; k < t.leaves().size(); ++k) {
    CHECK(back.leaves()[k].box.lower == t.leaves()[k].box.lower);
    CHECK(back.leaves()[k].box.upper == t.leaves()[k].box.upper);
    CHECK(back.leaves()[k].exploration_count == t.leaves()[k].exploration_count);
  }
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x = {unif(rng), unif(rng)};
    CHECK(back.locate(x) == t.locate(x));
  }
}
