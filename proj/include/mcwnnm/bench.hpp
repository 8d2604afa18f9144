#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "mcwnnm/denoiser.hpp"
#include "mcwnnm/image.hpp"

namespace mcwnnm {

/// Crop rectangle written `HxW+row+col`.
struct CropSpec {
  int height = 0;
  int width = 0;
  int row = 0;
  int col = 0;

  static CropSpec parse(std::string_view text);
  std::string to_string() const;
  ImagePlanes apply(const ImagePlanes& img) const;
};

ChannelSigmas parse_sigmas(std::string_view text);

/// Command-line overrides layered on top of a preset.
struct ConfigOverrides {
  std::optional<int> p, M, window, stride, K1, K2;
  std::optional<double> mu, rho0, model_scale;
  std::optional<SigmaMode> resigma;
  bool halved_x_update = false;

  DenoiseConfig apply(DenoiseConfig cfg) const;
};

nlohmann::json config_to_json(const DenoiseConfig& cfg);
DenoiseConfig config_from_json(const nlohmann::json& j);

struct RunRecord {
  std::string image_id;
  Variant variant = Variant::McWnnm;
  ChannelSigmas sigmas;  // noise injected (bench) or supplied/estimated (denoise)
  double input_psnr = 0.0;
  double output_psnr = 0.0;
  double wall_seconds = 0.0;
  DenoiseConfig cfg;
  std::uint64_t seed = 0;
  std::optional<CropSpec> crop;
  bool clip = false;
};

struct VariantSummary {
  Variant variant;
  int count = 0;
  double mean_input_psnr = 0.0;
  double mean_output_psnr = 0.0;
};

struct RunReport {
  std::vector<RunRecord> records;

  std::vector<VariantSummary> summaries() const;

  /// One JSON object per line: every record, then one summary per variant.
  /// Wall-clock times are left out unless `include_timing` is set so that
  /// identical runs give identical bytes.
  std::string to_jsonl(bool include_timing = false) const;

  /// Table with one row per image and one column per variant, plus the
  /// average row.
  std::string to_table() const;

  static RunReport from_jsonl(std::string_view text);
};

nlohmann::json record_to_json(const RunRecord& r, bool include_timing);
RunRecord record_from_json(const nlohmann::json& j);

/// 64-bit FNV-1a of the bytes of `s`.
std::uint64_t stable_hash(std::string_view s);

/// Noise seed for one corpus image: root seed XOR hash of its file name.
std::uint64_t image_seed(std::uint64_t root, std::string_view file_name);

struct BenchOptions {
  std::filesystem::path corpus;
  std::vector<Variant> variants{Variant::McWnnm};
  ChannelSigmas sigmas{40.0, 20.0, 30.0};
  Preset preset = Preset::Synthetic;
  std::uint64_t seed = 0;
  std::optional<CropSpec> crop;
  bool clip = false;
  ConfigOverrides overrides;
  int threads = 0;
};

/// Sorted list of .ppm/.png files in `dir`; throws if there are none.
std::vector<std::filesystem::path> list_corpus(const std::filesystem::path& dir);

RunReport run_bench(const BenchOptions& opts);

/// Re-runs one record from its own snapshot, reading the clean image from
/// `corpus`. Returns the reproduced output PSNR.
double reproduce_record(const RunRecord& r, const std::filesystem::path& corpus);

}  // namespace mcwnnm
