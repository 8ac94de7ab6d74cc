#include "alrank/tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "alrank/error.hpp"

namespace alrank {
namespace {

double Midpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid < hi ? mid : lo;
}

class TreeBuilder {
 public:
  TreeBuilder(const BinnedFeatures& x, std::span<const double> target,
              std::span<const std::uint32_t> rows, const TreeParams& params,
              std::vector<int>* leaf_of_row)
      : x_(x),
        target_(target),
        rows_(rows.begin(), rows.end()),
        params_(params),
        leaf_of_row_(leaf_of_row) {}

  RegressionTree Build() {
    if (rows_.empty()) {
      throw std::invalid_argument("FitTree: no rows");
    }
    if (leaf_of_row_ != nullptr) leaf_of_row_->assign(x_.num_rows(), -1);
    Grow(0, rows_.size(), 0);
    return RegressionTree(std::move(nodes_));
  }

 private:
  struct Split {
    int feature = -1;
    std::size_t bin = 0;
    double gain = 0.0;
  };

  int Grow(std::size_t begin, std::size_t end, int depth) {
    const std::size_t n = end - begin;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double t = target_[rows_[i]];
      sum += t;
      sum_sq += t * t;
    }
    const int index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_[index].value = sum / static_cast<double>(n);

    const std::size_t min_leaf =
        static_cast<std::size_t>(std::max(1, params_.min_samples_leaf));
    if (depth >= params_.max_depth || n < 2 * min_leaf) {
      MarkLeaf(index, begin, end);
      return index;
    }
    const double total_ss = sum_sq - sum * sum / static_cast<double>(n);
    const Split split = FindSplit(begin, end, sum, total_ss, min_leaf);
    if (split.feature < 0) {
      MarkLeaf(index, begin, end);
      return index;
    }

    const auto mid_it = std::stable_partition(
        rows_.begin() + begin, rows_.begin() + end, [&](std::uint32_t r) {
          return x_.bin(r, split.feature) <= split.bin;
        });
    const std::size_t mid = static_cast<std::size_t>(mid_it - rows_.begin());
    nodes_[index].feature = split.feature;
    nodes_[index].threshold = x_.edge(split.feature, split.bin);
    const int left = Grow(begin, mid, depth + 1);
    const int right = Grow(mid, end, depth + 1);
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
  }

  Split FindSplit(std::size_t begin, std::size_t end, double sum,
                  double total_ss, std::size_t min_leaf) {
    Split best;
    const double n = static_cast<double>(end - begin);
    // A split must remove a non-negligible share of the node's squared
    // error; this filters gains that are pure rounding noise.
    best.gain = std::max(total_ss, 0.0) * 1e-10;
    if (!(total_ss > 0.0)) return Split{};
    const double parent_term = sum * sum / n;
    for (std::size_t f = 0; f < x_.dim(); ++f) {
      const std::size_t nb = x_.num_bins(f);
      if (nb < 2) continue;
      hist_sum_.assign(nb, 0.0);
      hist_count_.assign(nb, 0);
      for (std::size_t i = begin; i < end; ++i) {
        const std::uint32_t r = rows_[i];
        const std::uint16_t b = x_.bin(r, f);
        hist_sum_[b] += target_[r];
        ++hist_count_[b];
      }
      double left_sum = 0.0;
      std::size_t left_count = 0;
      const std::size_t total = end - begin;
      for (std::size_t b = 0; b + 1 < nb; ++b) {
        left_sum += hist_sum_[b];
        left_count += hist_count_[b];
        if (hist_count_[b] == 0) continue;
        if (left_count < min_leaf) continue;
        const std::size_t right_count = total - left_count;
        if (right_count < min_leaf) break;
        const double right_sum = sum - left_sum;
        const double gain = left_sum * left_sum / left_count +
                            right_sum * right_sum / right_count - parent_term;
        if (gain > best.gain) {
          best.feature = static_cast<int>(f);
          best.bin = b;
          best.gain = gain;
        }
      }
    }
    return best;
  }

  void MarkLeaf(int index, std::size_t begin, std::size_t end) {
    if (leaf_of_row_ == nullptr) return;
    for (std::size_t i = begin; i < end; ++i) (*leaf_of_row_)[rows_[i]] = index;
  }

  const BinnedFeatures& x_;
  std::span<const double> target_;
  std::vector<std::uint32_t> rows_;
  TreeParams params_;
  std::vector<int>* leaf_of_row_;
  std::vector<TreeNode> nodes_;
  std::vector<double> hist_sum_;
  std::vector<std::size_t> hist_count_;
};

}  // namespace

BinnedFeatures::BinnedFeatures(std::span<const double> rows, std::size_t dim,
                               std::size_t max_bins)
    : num_rows_(dim == 0 ? 0 : rows.size() / dim),
      dim_(dim),
      edges_(dim),
      bins_(dim * (dim == 0 ? 0 : rows.size() / dim)) {
  if (dim == 0 || rows.size() % dim != 0) {
    throw std::invalid_argument("BinnedFeatures: bad matrix shape");
  }
  if (max_bins < 2 || max_bins > 65535) {
    throw ConfigError("max_bins must be in [2, 65535]");
  }
  std::vector<double> column(num_rows_);
  for (std::size_t f = 0; f < dim; ++f) {
    for (std::size_t r = 0; r < num_rows_; ++r) column[r] = rows[r * dim + f];
    std::vector<double> sorted = column;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> unique = sorted;
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());

    auto& edges = edges_[f];
    if (unique.size() <= max_bins) {
      for (std::size_t i = 0; i + 1 < unique.size(); ++i) {
        edges.push_back(Midpoint(unique[i], unique[i + 1]));
      }
    } else {
      // Cut at row-mass quantiles, snapped between distinct values.
      for (std::size_t k = 1; k < max_bins; ++k) {
        const double q = sorted[k * num_rows_ / max_bins];
        const auto it = std::lower_bound(unique.begin(), unique.end(), q);
        if (it == unique.begin()) continue;
        const double edge = Midpoint(*(it - 1), *it);
        if (edges.empty() || edge > edges.back()) edges.push_back(edge);
      }
    }
    for (std::size_t r = 0; r < num_rows_; ++r) {
      const auto it = std::lower_bound(edges.begin(), edges.end(), column[r]);
      bins_[f * num_rows_ + r] =
          static_cast<std::uint16_t>(it - edges.begin());
    }
  }
}

double RegressionTree::Predict(std::span<const double> features) const {
  if (nodes_.empty()) return 0.0;
  int i = 0;
  while (!nodes_[i].is_leaf()) {
    const TreeNode& node = nodes_[i];
    i = features[node.feature] <= node.threshold ? node.left : node.right;
  }
  return nodes_[i].value;
}

int RegressionTree::Depth() const {
  if (nodes_.empty()) return 0;
  // Children are always appended after their parent.
  std::vector<int> depth(nodes_.size(), 0);
  int max_depth = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const TreeNode& node = nodes_[i];
    if (node.is_leaf()) {
      max_depth = std::max(max_depth, depth[i]);
      continue;
    }
    depth[node.left] = depth[i] + 1;
    depth[node.right] = depth[i] + 1;
  }
  return max_depth;
}

RegressionTree FitTree(const BinnedFeatures& x, std::span<const double> target,
                       std::span<const std::uint32_t> rows,
                       const TreeParams& params,
                       std::vector<int>* leaf_of_row) {
  if (target.size() != x.num_rows()) {
    throw std::invalid_argument("FitTree: target length mismatch");
  }
  return TreeBuilder(x, target, rows, params, leaf_of_row).Build();
}

}  // namespace alrank
