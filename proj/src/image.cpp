#include "mcwnnm/image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace mcwnnm {

ImagePlanes::ImagePlanes(int width, int height, double fill) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("image dimensions must be positive");
  }
  for (auto& plane : planes_) {
    plane.assign(static_cast<std::size_t>(width) * height, fill);
  }
}

void ImagePlanes::check_finite() const {
  for (const auto& plane : planes_) {
    for (double v : plane) {
      if (!std::isfinite(v)) {
        throw std::runtime_error("image contains non-finite values");
      }
    }
  }
}

ImagePlanes ImagePlanes::crop(int row, int col, int height, int width) const {
  if (row < 0 || col < 0 || height <= 0 || width <= 0 || row + height > height_ ||
      col + width > width_) {
    throw std::invalid_argument("crop exceeds image bounds");
  }
  ImagePlanes out(width, height);
  for (int c = 0; c < kChannels; ++c) {
    for (int r = 0; r < height; ++r) {
      for (int k = 0; k < width; ++k) {
        out.at(c, r, k) = at(c, row + r, col + k);
      }
    }
  }
  return out;
}

ChannelSigmas ChannelSigmas::clamped(double floor) const {
  return {std::max(r, floor), std::max(g, floor), std::max(b, floor)};
}

PatchVector extract_patch(const ImagePlanes& img, int row, int col, int p) {
  if (p < 1 || row < 0 || col < 0 || row > img.height() - p || col > img.width() - p) {
    throw std::out_of_range("patch exceeds image bounds");
  }
  PatchVector out{p, {row, col}, Eigen::VectorXd(kChannels * p * p)};
  const int block = p * p;
  for (int c = 0; c < kChannels; ++c) {
    for (int dc = 0; dc < p; ++dc) {
      for (int dr = 0; dr < p; ++dr) {
        out.data[c * block + patch_offset(p, dr, dc)] = img.at(c, row + dr, col + dc);
      }
    }
  }
  return out;
}

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::array<std::uint64_t, kChannels> derive_channel_seeds(std::uint64_t seed) {
  return {mix_seed(seed), mix_seed(seed + 1), mix_seed(seed + 2)};
}

ImagePlanes add_awgn(const ImagePlanes& img, const ChannelSigmas& sigmas,
                     const std::array<std::uint64_t, kChannels>& channel_seeds) {
  ImagePlanes out = img;
  for (int c = 0; c < kChannels; ++c) {
    const double sigma = sigmas[c];
    if (!std::isfinite(sigma) || sigma < 0.0) {
      throw std::invalid_argument("noise sigma must be finite and non-negative");
    }
    if (sigma == 0.0) continue;
    std::mt19937_64 engine(channel_seeds[c]);
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& v : out.plane(c)) v += noise(engine);
  }
  return out;
}

ImagePlanes add_awgn(const ImagePlanes& img, const ChannelSigmas& sigmas, std::uint64_t seed) {
  return add_awgn(img, sigmas, derive_channel_seeds(seed));
}

ImagePlanes clip_to_range(const ImagePlanes& img) {
  ImagePlanes out = img;
  for (int c = 0; c < kChannels; ++c) {
    for (double& v : out.plane(c)) v = std::clamp(v, 0.0, kPeak);
  }
  return out;
}

double psnr(const ImagePlanes& clean, const ImagePlanes& test) {
  if (!clean.same_dims(test)) {
    throw std::invalid_argument("psnr: image dimensions differ");
  }
  double sse = 0.0;
  for (int c = 0; c < kChannels; ++c) {
    const auto a = clean.plane(c);
    const auto b = test.plane(c);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      sse += d * d;
    }
  }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / (static_cast<double>(kChannels) * clean.pixel_count());
  return 10.0 * std::log10(kPeak * kPeak / mse);
}

namespace {

double median_in_place(std::vector<double>& v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), mid));
  }
  return m;
}

}  // namespace

ChannelSigmas estimate_sigmas(const ImagePlanes& img) {
  if (img.width() < 16 || img.height() < 16) {
    throw std::invalid_argument("estimate_sigmas: image must be at least 16x16");
  }
  ChannelSigmas out;
  std::vector<double> diffs;
  diffs.reserve(static_cast<std::size_t>(img.height()) * (img.width() - 1));
  for (int c = 0; c < kChannels; ++c) {
    diffs.clear();
    for (int r = 0; r < img.height(); ++r) {
      for (int k = 0; k + 1 < img.width(); ++k) {
        diffs.push_back(img.at(c, r, k + 1) - img.at(c, r, k));
      }
    }
    const double med = median_in_place(diffs);
    for (double& d : diffs) d = std::abs(d - med);
    const double mad = median_in_place(diffs);
    out[c] = 1.4826 * mad / std::sqrt(2.0);
  }
  return out.clamped();
}

}  // namespace mcwnnm
