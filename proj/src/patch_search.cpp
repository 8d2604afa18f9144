#include "mcwnnm/patch_search.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace mcwnnm {

PatchBank::PatchBank(const ImagePlanes& img, int p, std::optional<int> channel)
    : p_(p), origin_rows_(img.height() - p + 1), origin_cols_(img.width() - p + 1),
      channel_(channel) {
  if (p < 1 || origin_rows_ < 1 || origin_cols_ < 1) {
    throw std::invalid_argument("patch size exceeds image dimensions");
  }
  if (channel && (*channel < 0 || *channel >= kChannels)) {
    throw std::invalid_argument("channel index out of range");
  }
  const int block = p * p;
  const int first = channel ? *channel : 0;
  const int nch = channel ? 1 : kChannels;
  data_.resize(nch * block, static_cast<Eigen::Index>(origin_rows_) * origin_cols_);
  for (int r = 0; r < origin_rows_; ++r) {
    for (int k = 0; k < origin_cols_; ++k) {
      auto col = data_.col(index({r, k}));
      for (int c = 0; c < nch; ++c) {
        for (int dc = 0; dc < p; ++dc) {
          for (int dr = 0; dr < p; ++dr) {
            col[c * block + patch_offset(p, dr, dc)] = img.at(first + c, r + dr, k + dc);
          }
        }
      }
    }
  }
}

SearchWindow search_window(int origin_rows, int origin_cols, Origin ref, int window,
                           int min_candidates) {
  if (window < 1) throw std::invalid_argument("search window must be positive");
  if (static_cast<long>(origin_rows) * origin_cols < min_candidates) {
    throw std::invalid_argument("search window too small");
  }
  int lo_r = ref.row - window / 2;
  int lo_c = ref.col - window / 2;
  int side = window;
  for (;;) {
    SearchWindow w{std::max(lo_r, 0), std::min(lo_r + side, origin_rows), std::max(lo_c, 0),
                   std::min(lo_c + side, origin_cols)};
    if (w.count() >= min_candidates) return w;
    --lo_r;
    --lo_c;
    side += 2;
  }
}

namespace {

struct Candidate {
  double distance;
  Origin origin;
};

bool closer(const Candidate& a, const Candidate& b) {
  if (a.distance != b.distance) return a.distance < b.distance;
  return a.origin < b.origin;
}

}  // namespace

PatchGroup block_match(const PatchBank& bank, Origin ref, int M, int window) {
  if (M < 1) throw std::invalid_argument("group size must be positive");
  if (ref.row < 0 || ref.col < 0 || ref.row >= bank.origin_rows() ||
      ref.col >= bank.origin_cols()) {
    throw std::out_of_range("patch exceeds image bounds");
  }
  const SearchWindow w = search_window(bank.origin_rows(), bank.origin_cols(), ref, window, M);
  const auto ref_vec = bank.vector(ref);

  std::vector<Candidate> cands;
  cands.reserve(static_cast<std::size_t>(w.count()));
  for (int r = w.row_begin; r < w.row_end; ++r) {
    for (int k = w.col_begin; k < w.col_end; ++k) {
      const Origin o{r, k};
      if (o == ref) continue;
      cands.push_back({(bank.vector(o) - ref_vec).squaredNorm(), o});
    }
  }
  const auto keep = static_cast<std::ptrdiff_t>(M - 1);
  std::partial_sort(cands.begin(), cands.begin() + keep, cands.end(), closer);

  PatchGroup g;
  g.p = bank.patch_size();
  g.Y.resize(bank.dim(), M);
  g.origins.reserve(M);
  g.distances.reserve(M);
  g.Y.col(0) = ref_vec;
  g.origins.push_back(ref);
  g.distances.push_back(0.0);
  for (std::ptrdiff_t j = 0; j < keep; ++j) {
    g.Y.col(j + 1) = bank.vector(cands[j].origin);
    g.origins.push_back(cands[j].origin);
    g.distances.push_back(cands[j].distance);
  }
  return g;
}

PatchGroup block_match(const ImagePlanes& img, Origin ref, int p, int M, int window) {
  return block_match(PatchBank(img, p), ref, M, window);
}

std::vector<Origin> assemble_reference_origins(int width, int height, int p, int stride) {
  if (stride < 1) throw std::invalid_argument("stride must be at least 1");
  if (p < 1 || p > width || p > height) {
    throw std::invalid_argument("patch size exceeds image dimensions");
  }
  auto axis = [&](int n) {
    std::vector<int> v;
    for (int x = 0; x <= n - p; x += stride) v.push_back(x);
    if (v.back() != n - p) v.push_back(n - p);
    return v;
  };
  const auto rows = axis(height);
  const auto cols = axis(width);
  std::vector<Origin> out;
  out.reserve(rows.size() * cols.size());
  for (int r : rows) {
    for (int c : cols) out.push_back({r, c});
  }
  return out;
}

Accumulator::Accumulator(int width, int height) : sum_(width, height), count_(width, height) {}

void Accumulator::add_patch(const Eigen::Ref<const Eigen::VectorXd>& v, Origin o, int p,
                            std::optional<int> channel) {
  const int block = p * p;
  const int first = channel ? *channel : 0;
  const int nch = channel ? 1 : kChannels;
  if (v.size() != nch * block) throw std::invalid_argument("patch vector length mismatch");
  if (o.row < 0 || o.col < 0 || o.row + p > height() || o.col + p > width()) {
    throw std::out_of_range("patch exceeds image bounds");
  }
  for (int c = 0; c < nch; ++c) {
    for (int dc = 0; dc < p; ++dc) {
      for (int dr = 0; dr < p; ++dr) {
        sum_.at(first + c, o.row + dr, o.col + dc) += v[c * block + patch_offset(p, dr, dc)];
        count_.at(first + c, o.row + dr, o.col + dc) += 1.0;
      }
    }
  }
}

void Accumulator::add_group(const Eigen::MatrixXd& X, std::span<const Origin> origins, int p,
                            std::optional<int> channel) {
  if (X.cols() != static_cast<Eigen::Index>(origins.size())) {
    throw std::invalid_argument("group column count differs from origin count");
  }
  for (std::size_t j = 0; j < origins.size(); ++j) {
    add_patch(X.col(static_cast<Eigen::Index>(j)), origins[j], p, channel);
  }
}

void Accumulator::merge(const Accumulator& other) {
  if (!sum_.same_dims(other.sum_)) throw std::invalid_argument("accumulator size mismatch");
  for (int c = 0; c < kChannels; ++c) {
    auto s = sum_.plane(c);
    auto n = count_.plane(c);
    const auto os = other.sum_.plane(c);
    const auto on = other.count_.plane(c);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] += os[i];
      n[i] += on[i];
    }
  }
}

ImagePlanes Accumulator::finalize() const {
  ImagePlanes out(width(), height());
  for (int c = 0; c < kChannels; ++c) {
    const auto s = sum_.plane(c);
    const auto n = count_.plane(c);
    auto o = out.plane(c);
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (n[i] <= 0.0) throw std::runtime_error("aggregation hole");
      o[i] = s[i] / n[i];
    }
  }
  return out;
}

ImagePlanes aggregate(std::span<const DenoisedGroup> groups, int width, int height) {
  Accumulator acc(width, height);
  for (const auto& g : groups) acc.add_group(g.X, g.origins, g.p, g.channel);
  return acc.finalize();
}

}  // namespace mcwnnm
