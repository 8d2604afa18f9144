#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "mcwnnm/admm.hpp"
#include "mcwnnm/image.hpp"

namespace mcwnnm {

/// The channel-weighted model and the three WNNM baselines:
///   Wnnm1  - per-channel WNNM with that channel's sigma;
///   Wnnm2  - WNNM on concatenated RGB patches with the averaged sigma;
///   Wnnm3  - the ADMM solver with a uniform weight 1/average sigma.
enum class Variant { McWnnm, Wnnm1, Wnnm2, Wnnm3 };

/// Fixed keeps the input sigmas for every outer iteration; Reestimate
/// lowers them by the noise already removed.
enum class SigmaMode { Fixed, Reestimate };

enum class Preset { Synthetic, Real };

std::string_view to_string(Variant v);
std::string_view to_string(SigmaMode m);
std::string_view to_string(Preset p);
Variant parse_variant(std::string_view s);
SigmaMode parse_sigma_mode(std::string_view s);
Preset parse_preset(std::string_view s);

struct DenoiseConfig {
  int p = 6;
  int M = 70;
  int window = 40;
  int stride = 4;
  int K2 = 8;
  AdmmConfig admm;
  Variant variant = Variant::McWnnm;
  SigmaMode resigma = SigmaMode::Reestimate;
  /// Intensities and sigmas are divided by this before the group solvers
  /// run and multiplied back afterwards.
  double model_scale = 255.0;
  /// 0 picks MCWNNM_THREADS or the hardware concurrency.
  int threads = 0;

  /// Defaults for `variant` under a preset (rho0 and K2).
  static DenoiseConfig preset(Preset preset, Variant variant);

  void validate() const;
};

/// Reciprocal per-channel sigmas (clamped at kSigmaMin) in intensity units.
ChannelWeightMatrix build_weight_matrix(const ChannelSigmas& sigmas, int p);

/// sqrt((r^2 + g^2 + b^2) / 3).
double average_sigma(const ChannelSigmas& sigmas);

/// sigma_c' = sqrt(max(sigma_c^2 - mean((noisy_c - current_c)^2), 0)),
/// clamped at kSigmaMin.
ChannelSigmas reestimate_sigmas(const ChannelSigmas& original, const ImagePlanes& noisy,
                                const ImagePlanes& current);

/// Called after every outer iteration with its index (1-based), the sigmas
/// that parameterized it and the resulting estimate.
using DenoiseObserver =
    std::function<void(int iteration, const ChannelSigmas& sigmas, const ImagePlanes& estimate)>;

/// Iterative non-local low-rank denoising of a colour image.
ImagePlanes denoise(const ImagePlanes& noisy, const ChannelSigmas& sigmas,
                    const DenoiseConfig& cfg, const DenoiseObserver& observer = {});

/// Worker count for `requested` (0 = MCWNNM_THREADS or hardware).
int resolve_thread_count(int requested);

}  // namespace mcwnnm
