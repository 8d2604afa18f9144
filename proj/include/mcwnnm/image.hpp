#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace mcwnnm {

/// Smallest noise level allowed wherever a sigma ends up in a denominator.
inline constexpr double kSigmaMin = 0.1;

/// Peak intensity used by PSNR and 8-bit I/O.
inline constexpr double kPeak = 255.0;

inline constexpr int kChannels = 3;

struct Origin {
  int row = 0;
  int col = 0;

  friend auto operator<=>(const Origin&, const Origin&) = default;
};

/// Planar R,G,B image holding real intensities on the [0,255] scale.
/// Each plane is stored row-major.
class ImagePlanes {
 public:
  ImagePlanes() = default;
  ImagePlanes(int width, int height, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

  double& at(int channel, int row, int col) {
    return planes_[channel][static_cast<std::size_t>(row) * width_ + col];
  }
  double at(int channel, int row, int col) const {
    return planes_[channel][static_cast<std::size_t>(row) * width_ + col];
  }

  std::span<double> plane(int channel) { return planes_[channel]; }
  std::span<const double> plane(int channel) const { return planes_[channel]; }

  bool same_dims(const ImagePlanes& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  /// Throws if any sample is NaN or infinite.
  void check_finite() const;

  /// Copy of the rectangle [row, row+height) x [col, col+width).
  ImagePlanes crop(int row, int col, int height, int width) const;

  friend bool operator==(const ImagePlanes&, const ImagePlanes&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::array<std::vector<double>, kChannels> planes_;
};

/// Per-channel noise standard deviations in intensity units.
struct ChannelSigmas {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  double operator[](int c) const { return c == 0 ? r : (c == 1 ? g : b); }
  double& operator[](int c) { return c == 0 ? r : (c == 1 ? g : b); }

  /// Every component raised to at least `floor`.
  ChannelSigmas clamped(double floor = kSigmaMin) const;

  friend bool operator==(const ChannelSigmas&, const ChannelSigmas&) = default;
};

/// A vectorized p x p x 3 patch: three contiguous channel blocks of p*p
/// values (R, G, B), each block column-major within the patch.
struct PatchVector {
  int p = 0;
  Origin origin;
  Eigen::VectorXd data;
};

/// Offset of pixel (dr, dc) of a patch inside one channel block.
constexpr int patch_offset(int p, int dr, int dc) { return dc * p + dr; }

PatchVector extract_patch(const ImagePlanes& img, int row, int col, int p);

/// Adds i.i.d. Gaussian noise per channel. Channel c draws from its own
/// engine seeded with `channel_seeds[c]`. No clipping.
ImagePlanes add_awgn(const ImagePlanes& img, const ChannelSigmas& sigmas,
                     const std::array<std::uint64_t, kChannels>& channel_seeds);

/// Same as above with the channel seeds derived from one root seed
/// (see derive_channel_seeds).
ImagePlanes add_awgn(const ImagePlanes& img, const ChannelSigmas& sigmas, std::uint64_t seed);

std::array<std::uint64_t, kChannels> derive_channel_seeds(std::uint64_t seed);

/// splitmix64 finalizer; used for every seed derivation in the project.
std::uint64_t mix_seed(std::uint64_t x);

/// Clamp every sample to [0, 255].
ImagePlanes clip_to_range(const ImagePlanes& img);

/// 10*log10(255^2 / MSE) over all 3*H*W samples; +infinity when MSE is 0.
double psnr(const ImagePlanes& clean, const ImagePlanes& test);

/// Rough per-channel noise level from the median absolute deviation of
/// horizontal first differences. Results are clamped to kSigmaMin.
ChannelSigmas estimate_sigmas(const ImagePlanes& img);

}  // namespace mcwnnm
