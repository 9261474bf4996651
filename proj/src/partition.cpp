#include "pmc/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

namespace pmc {

namespace {

// Sum of squared deviations from the mean, two-pass for stability.
double sse(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return acc;
}

// Multi-axis cost of a point set: sum over axes of the marginal SSE.
// Marginals are sorted before summation so the value is independent of
// point order.
double leaf_cost(const Matrix& pts, const std::vector<std::size_t>& rows) {
  if (rows.size() < 2) return 0.0;
  double total = 0.0;
  std::vector<double> marg(rows.size());
  for (std::size_t a = 0; a < pts.cols(); ++a) {
    for (std::size_t i = 0; i < rows.size(); ++i) marg[i] = pts(rows[i], a);
    std::sort(marg.begin(), marg.end());
    total += sse(marg);
  }
  return total;
}

struct LeafState {
  ParameterBox box;
  std::vector<std::size_t> rows;  // indices into the point matrix
  double cost = 0.0;
  // cached best candidate cut
  bool has_cut = false;
  Cut cut;
  double reduction = 0.0;
  int node = -1;  // index into the node vector
};

}  // namespace

std::optional<std::pair<double, double>> best_cut_1d(
    std::span<const double> v) {
  const std::size_t n = v.size();
  if (n < 2) return std::nullopt;

  // prefix sums over values shifted by the overall mean (reduces
  // cancellation in the variance decomposition)
  double shift = std::accumulate(v.begin(), v.end(), 0.0) / double(n);
  std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double x = v[i] - shift;
    s1[i + 1] = s1[i] + x;
    s2[i + 1] = s2[i] + x * x;
  }

  double best_cost = std::numeric_limits<double>::infinity();
  double best_pos = 0.0;
  bool found = false;
  for (std::size_t j = 1; j < n; ++j) {
    if (!(v[j - 1] < v[j])) continue;  // only between distinct values
    double pos = 0.5 * (v[j - 1] + v[j]);
    if (!(v[j - 1] < pos) || !(pos <= v[j])) continue;  // rounding collapse
    double nl = double(j), nr = double(n - j);
    double left = s2[j] - s1[j] * s1[j] / nl;
    double right = (s2[n] - s2[j]) - (s1[n] - s1[j]) * (s1[n] - s1[j]) / nr;
    double cost = std::max(left, 0.0) + std::max(right, 0.0);
    if (cost < best_cost) {
      best_cost = cost;
      best_pos = pos;
      found = true;
    }
  }
  if (!found) return std::nullopt;
  return std::make_pair(best_pos, best_cost);
}

std::optional<Cut> best_cut_nd(const Matrix& points,
                               const std::vector<std::size_t>& allowed_axes) {
  if (points.rows() < 2) return std::nullopt;
  std::vector<std::size_t> axes = allowed_axes;
  if (axes.empty()) {
    axes.resize(points.cols());
    std::iota(axes.begin(), axes.end(), 0);
  }
  std::optional<Cut> best;
  std::vector<double> marg(points.rows());
  for (std::size_t a : axes) {
    for (std::size_t i = 0; i < points.rows(); ++i) marg[i] = points(i, a);
    std::sort(marg.begin(), marg.end());
    auto r = best_cut_1d(marg);
    if (!r) continue;
    if (!best || r->second < best->cost_after)
      best = Cut{a, r->first, r->second};
  }
  return best;
}

PartitionTree PartitionTree::single_leaf(const ParameterBox& root) {
  PartitionTree t;
  t.root_ = root;
  t.nodes_.push_back(Node{-1, -1, 0, 0, 0.0});
  t.leaves_.push_back(Subspace{0, root, 0});
  t.cost_trace_ = {0.0};
  return t;
}

std::size_t PartitionTree::locate(std::span<const double> x) const {
  if (!root_.contains(x))
    throw std::out_of_range("PartitionTree::locate: point outside root box");
  std::size_t idx = 0;
  while (nodes_[idx].left >= 0) {
    const Node& nd = nodes_[idx];
    idx = (x[nd.axis] < nd.position) ? std::size_t(nd.left)
                                     : std::size_t(nd.right);
  }
  return std::size_t(nodes_[idx].leaf);
}

PartitionTree build_tree(const Matrix& points, const ParameterBox& root,
                         std::size_t max_subspaces, double min_rel_gain,
                         const std::vector<std::size_t>& allowed_axes) {
  if (max_subspaces < 1)
    throw std::invalid_argument("build_tree: max_subspaces must be >= 1");
  for (std::size_t a : allowed_axes)
    if (a >= root.dim())
      throw std::invalid_argument("build_tree: allowed axis out of range");
  if (!points.empty() && points.cols() != root.dim())
    throw std::invalid_argument("build_tree: point dimension mismatch");

  PartitionTree tree;
  tree.root_ = root;
  tree.nodes_.push_back(PartitionTree::Node{-1, -1, -1, 0, 0.0});

  std::vector<LeafState> leaves(1);
  leaves[0].box = root;
  leaves[0].node = 0;
  leaves[0].rows.resize(points.rows());
  std::iota(leaves[0].rows.begin(), leaves[0].rows.end(), 0);
  leaves[0].cost = leaf_cost(points, leaves[0].rows);
  tree.cost_trace_.push_back(leaves[0].cost);

  std::vector<std::size_t> axes = allowed_axes;
  if (axes.empty()) {
    axes.resize(root.dim());
    std::iota(axes.begin(), axes.end(), 0);
  }

  // Candidate cut of a leaf: per axis, the best 1-D split position; among
  // the axes, the one whose split realizes the largest reduction of the
  // leaf's total cost. Selecting by the raw per-axis cost instead would
  // favour halving the tightest marginal over separating well-separated
  // clusters on a wider axis.
  auto refresh_candidate = [&](LeafState& leaf) {
    leaf.has_cut = false;
    if (leaf.rows.size() < 2 || leaf.cost == 0.0) return;
    std::vector<double> marg(leaf.rows.size());
    std::vector<std::size_t> lrows, rrows;
    for (std::size_t a : axes) {
      for (std::size_t i = 0; i < leaf.rows.size(); ++i)
        marg[i] = points(leaf.rows[i], a);
      std::sort(marg.begin(), marg.end());
      auto r = best_cut_1d(marg);
      if (!r) continue;
      lrows.clear();
      rrows.clear();
      for (std::size_t row : leaf.rows)
        (points(row, a) < r->first ? lrows : rrows).push_back(row);
      double reduction =
          leaf.cost - leaf_cost(points, lrows) - leaf_cost(points, rrows);
      if (!leaf.has_cut || reduction > leaf.reduction) {
        leaf.has_cut = true;
        leaf.cut = Cut{a, r->first, r->second};
        leaf.reduction = reduction;
      }
    }
  };
  refresh_candidate(leaves[0]);

  while (leaves.size() < max_subspaces) {
    double total = 0.0;
    for (const LeafState& l : leaves) total += l.cost;

    int pick = -1;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      if (!leaves[i].has_cut) continue;
      if (pick < 0 || leaves[i].reduction > leaves[std::size_t(pick)].reduction)
        pick = int(i);
    }
    if (pick < 0) break;
    LeafState& leaf = leaves[std::size_t(pick)];
    if (total <= 0.0 || leaf.reduction < min_rel_gain * total) break;

    LeafState left, right;
    left.box = leaf.box;
    right.box = leaf.box;
    left.box.upper[leaf.cut.axis] = leaf.cut.position;
    right.box.lower[leaf.cut.axis] = leaf.cut.position;
    for (std::size_t r : leaf.rows)
      (points(r, leaf.cut.axis) < leaf.cut.position ? left.rows : right.rows)
          .push_back(r);
    left.cost = leaf_cost(points, left.rows);
    right.cost = leaf_cost(points, right.rows);

    auto& nodes = tree.nodes_;
    int node_idx = leaf.node;
    left.node = int(nodes.size());
    right.node = int(nodes.size()) + 1;
    nodes.push_back(PartitionTree::Node{-1, -1, -1, 0, 0.0});
    nodes.push_back(PartitionTree::Node{-1, -1, -1, 0, 0.0});
    nodes[std::size_t(node_idx)] =
        PartitionTree::Node{left.node, right.node, -1, leaf.cut.axis,
                            leaf.cut.position};

    refresh_candidate(left);
    refresh_candidate(right);
    leaves[std::size_t(pick)] = std::move(left);
    leaves.push_back(std::move(right));

    double new_total = 0.0;
    for (const LeafState& l : leaves) new_total += l.cost;
    tree.cost_trace_.push_back(new_total);
  }

  // Number leaves in preorder so the layout is independent of the greedy
  // insertion order.
  std::vector<std::size_t> order;
  std::vector<std::size_t> stack = {0};
  while (!stack.empty()) {
    std::size_t idx = stack.back();
    stack.pop_back();
    const auto& nd = tree.nodes_[idx];
    if (nd.left < 0) {
      order.push_back(idx);
    } else {
      stack.push_back(std::size_t(nd.right));
      stack.push_back(std::size_t(nd.left));
    }
  }
  tree.leaves_.resize(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    tree.nodes_[order[k]].leaf = int(k);
    const LeafState* src = nullptr;
    for (const LeafState& l : leaves)
      if (l.node == int(order[k])) src = &l;
    tree.leaves_[k] =
        Subspace{k, src->box, src->rows.size()};
  }
  return tree;
}

namespace {

nlohmann::json node_to_json(const PartitionTree& t, std::size_t idx) {
  const auto& nd = t.nodes()[idx];
  if (nd.left < 0) return nlohmann::json{{"leaf", nd.leaf}};
  return nlohmann::json{{"axis", nd.axis},
                        {"position", nd.position},
                        {"left", node_to_json(t, std::size_t(nd.left))},
                        {"right", node_to_json(t, std::size_t(nd.right))}};
}

void node_from_json(const nlohmann::json& j, std::size_t idx,
                    std::vector<PartitionTree::Node>& nodes) {
  if (j.contains("leaf")) {
    nodes[idx].left = nodes[idx].right = -1;
    nodes[idx].leaf = j.at("leaf").get<int>();
    return;
  }
  std::size_t axis = j.at("axis").get<std::size_t>();
  double position = j.at("position").get<double>();
  nodes.push_back({});
  int li = int(nodes.size() - 1);
  node_from_json(j.at("left"), std::size_t(li), nodes);
  nodes.push_back({});
  int ri = int(nodes.size() - 1);
  node_from_json(j.at("right"), std::size_t(ri), nodes);
  nodes[idx].axis = axis;
  nodes[idx].position = position;
  nodes[idx].leaf = -1;
  nodes[idx].left = li;
  nodes[idx].right = ri;
}

}  // namespace

std::string PartitionTree::to_json() const {
  nlohmann::json j;
  j["box"] = {{"lower", root_.lower}, {"upper", root_.upper}};
  j["root"] = node_to_json(*this, 0);
  nlohmann::json leaves = nlohmann::json::array();
  for (const Subspace& s : leaves_) {
    leaves.push_back({{"index", s.index},
                      {"box", {{"lower", s.box.lower}, {"upper", s.box.upper}}},
                      {"exploration_count", s.exploration_count}});
  }
  j["leaves"] = leaves;
  j["cost_trace"] = cost_trace_;
  return j.dump(2);
}

PartitionTree PartitionTree::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  PartitionTree t;
  t.root_ = ParameterBox(j.at("box").at("lower").get<std::vector<double>>(),
                         j.at("box").at("upper").get<std::vector<double>>());
  // children are appended depth-first; child indices fixed on the way out
  std::vector<Node> nodes;
  nodes.push_back({});
  node_from_json(j.at("root"), 0, nodes);
  t.nodes_ = std::move(nodes);
  for (const auto& lj : j.at("leaves")) {
    Subspace s;
    s.index = lj.at("index").get<std::size_t>();
    s.box = ParameterBox(lj.at("box").at("lower").get<std::vector<double>>(),
                         lj.at("box").at("upper").get<std::vector<double>>());
    s.exploration_count = lj.at("exploration_count").get<std::size_t>();
    t.leaves_.push_back(std::move(s));
  }
  if (j.contains("cost_trace"))
    t.cost_trace_ = j.at("cost_trace").get<std::vector<double>>();
  return t;
}

}  // namespace pmc
