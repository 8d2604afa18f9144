#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mcwnnm/image.hpp"

namespace mcwnnm {

/// Every valid patch of an image, vectorized once so that block matching
/// can reuse the vectors. Column `row * origin_cols() + col` holds the patch
/// at that origin. With `channel` set, only that channel's p*p block is kept.
class PatchBank {
 public:
  PatchBank(const ImagePlanes& img, int p, std::optional<int> channel = std::nullopt);

  int patch_size() const { return p_; }
  int origin_rows() const { return origin_rows_; }
  int origin_cols() const { return origin_cols_; }
  int dim() const { return static_cast<int>(data_.rows()); }
  std::optional<int> channel() const { return channel_; }

  int index(Origin o) const { return o.row * origin_cols_ + o.col; }
  auto vector(Origin o) const { return data_.col(index(o)); }

 private:
  int p_;
  int origin_rows_;
  int origin_cols_;
  std::optional<int> channel_;
  Eigen::MatrixXd data_;
};

/// Half-open range of candidate origins searched around a reference.
struct SearchWindow {
  int row_begin = 0;
  int row_end = 0;
  int col_begin = 0;
  int col_end = 0;

  int count() const { return (row_end - row_begin) * (col_end - col_begin); }
};

/// Square window of side `window` (in origins) centred on `ref` and clipped
/// to valid origins. Grows by one origin per side until it holds at least
/// `min_candidates` origins. Throws "search window too small" if the whole
/// origin grid is smaller than that.
SearchWindow search_window(int origin_rows, int origin_cols, Origin ref, int window,
                           int min_candidates);

/// Group of similar patches. Column 0 is the reference; the rest follow in
/// ascending squared distance, ties broken by raster order of the origin.
struct PatchGroup {
  Eigen::MatrixXd Y;
  std::vector<Origin> origins;
  std::vector<double> distances;
  int p = 0;

  int size() const { return static_cast<int>(origins.size()); }
};

PatchGroup block_match(const PatchBank& bank, Origin ref, int M, int window);
PatchGroup block_match(const ImagePlanes& img, Origin ref, int p, int M, int window);

/// Reference origins on a `stride` grid, with the last valid row/column
/// appended so every pixel is covered when stride <= p. Row-major order.
std::vector<Origin> assemble_reference_origins(int width, int height, int p, int stride);

/// Running per-pixel sums and contribution counts for patch aggregation.
class Accumulator {
 public:
  Accumulator(int width, int height);

  /// Adds one vectorized patch. With `channel` unset the vector holds all
  /// three channel blocks; otherwise a single block for that channel.
  void add_patch(const Eigen::Ref<const Eigen::VectorXd>& v, Origin o, int p,
                 std::optional<int> channel = std::nullopt);
  void add_group(const Eigen::MatrixXd& X, std::span<const Origin> origins, int p,
                 std::optional<int> channel = std::nullopt);
  void merge(const Accumulator& other);

  /// Per-pixel average; throws "aggregation hole" for uncovered pixels.
  ImagePlanes finalize() const;

  int width() const { return sum_.width(); }
  int height() const { return sum_.height(); }

 private:
  ImagePlanes sum_;
  ImagePlanes count_;
};

struct DenoisedGroup {
  Eigen::MatrixXd X;
  std::vector<Origin> origins;
  int p = 0;
  std::optional<int> channel;
};

ImagePlanes aggregate(std::span<const DenoisedGroup> groups, int width, int height);

}  // namespace mcwnnm
