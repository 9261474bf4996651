#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pmc/types.hpp"

namespace pmc {

/// One axis-aligned cut. `cost_after` is the two-sided squared-deviation
/// cost of the cut axis marginal after splitting (the quantity minimized
/// when the cut position is chosen).
struct Cut {
  std::size_t axis = 0;
  double position = 0.0;
  double cost_after = 0.0;
};

struct Subspace {
  std::size_t index = 0;
  ParameterBox box;
  std::size_t exploration_count = 0;
};

/// Binary tree of axis-aligned cuts; leaves tile the root box.
class PartitionTree {
 public:
  struct Node {
    // leaf when left < 0; then `leaf` indexes into leaves()
    int left = -1;
    int right = -1;
    int leaf = -1;
    std::size_t axis = 0;
    double position = 0.0;
  };

  static PartitionTree single_leaf(const ParameterBox& root);

  const ParameterBox& root_box() const { return root_; }
  const std::vector<Subspace>& leaves() const { return leaves_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t n_cuts() const { return (nodes_.size() - 1) / 2; }

  /// Unique leaf containing x. Boundary convention is half-open: a point
  /// exactly at a cut position belongs to the right/upper leaf.
  std::size_t locate(std::span<const double> x) const;

  /// Total marginal squared-deviation cost after each greedy step,
  /// starting with the uncut root. Non-increasing by construction.
  const std::vector<double>& cost_trace() const { return cost_trace_; }

  std::string to_json() const;
  static PartitionTree from_json(const std::string& text);

 private:
  friend PartitionTree build_tree(const Matrix&, const ParameterBox&,
                                  std::size_t, double,
                                  const std::vector<std::size_t>&);
  ParameterBox root_;
  std::vector<Node> nodes_;
  std::vector<Subspace> leaves_;
  std::vector<double> cost_trace_;
};

/// Best split position of a sorted 1-D marginal by the two-cluster
/// squared-deviation cost, candidates restricted to midpoints between
/// consecutive distinct values. Returns nothing when fewer than two
/// distinct values exist.
std::optional<std::pair<double, double>> best_cut_1d(
    std::span<const double> sorted_values);

/// Evaluates the 1-D cost on every axis marginal and returns the cut with
/// the minimal cost, ties broken by lowest axis index. `allowed_axes`
/// empty means all axes.
std::optional<Cut> best_cut_nd(const Matrix& points,
                               const std::vector<std::size_t>& allowed_axes = {});

/// Greedy construction: repeatedly applies, over all current leaves, the
/// cut with the largest absolute reduction of the total leaf cost; stops at
/// `max_subspaces` leaves or when the best relative reduction drops below
/// `min_rel_gain`. A leaf's cost is the sum over axes of the squared
/// deviations of its points from their per-axis mean, so in one dimension
/// the trace reproduces the two-cluster cost curve exactly.
PartitionTree build_tree(const Matrix& points, const ParameterBox& root,
                         std::size_t max_subspaces, double min_rel_gain = 0.01,
                         const std::vector<std::size_t>& allowed_axes = {});

}  // namespace pmc
