#ifndef ALRANK_TREE_HPP_
#define ALRANK_TREE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace alrank {

// Feature matrix quantized per feature into at most max_bins bins. A row
// falls in bin b of feature f iff edges[f][b-1] < x <= edges[f][b], so the
// split "bin <= b" is the same predicate as "x <= edges[f][b]" on raw values.
// When a feature has no more distinct values than max_bins, the edges are
// the midpoints between consecutive distinct values and splitting is exact.
class BinnedFeatures {
 public:
  // `rows` is row-major with `dim` columns.
  BinnedFeatures(std::span<const double> rows, std::size_t dim,
                 std::size_t max_bins);

  std::size_t num_rows() const { return num_rows_; }
  std::size_t dim() const { return dim_; }
  std::size_t num_bins(std::size_t feature) const {
    return edges_[feature].size() + 1;
  }
  std::uint16_t bin(std::size_t row, std::size_t feature) const {
    return bins_[feature * num_rows_ + row];
  }
  // Raw-value threshold equivalent to "bin <= b".
  double edge(std::size_t feature, std::size_t b) const {
    return edges_[feature][b];
  }

 private:
  std::size_t num_rows_;
  std::size_t dim_;
  std::vector<std::vector<double>> edges_;
  std::vector<std::uint16_t> bins_;  // column-major
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes)
      : nodes_(std::move(nodes)) {}

  // Rows with x[feature] <= threshold go left.
  double Predict(std::span<const double> features) const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int Depth() const;

  bool operator==(const RegressionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
};

struct TreeParams {
  int max_depth = 3;
  int min_samples_leaf = 5;
};

// Least-squares regression tree grown depth-first. Each split maximizes the
// reduction in summed squared error; a node becomes a leaf when no split
// with both children holding at least min_samples_leaf rows strictly reduces
// it. Ties go to the lowest feature index, then the lowest threshold. Leaf
// values are the mean target of their rows. If leaf_of_row is non-null it
// receives, for every row in `rows`, the index of its leaf node.
RegressionTree FitTree(const BinnedFeatures& x, std::span<const double> target,
                       std::span<const std::uint32_t> rows,
                       const TreeParams& params,
                       std::vector<int>* leaf_of_row = nullptr);

}  // namespace alrank

#endif  // ALRANK_TREE_HPP_
