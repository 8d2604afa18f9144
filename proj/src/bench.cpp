#include "mcwnnm/bench.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "mcwnnm/image_io.hpp"

namespace mcwnnm {

namespace fs = std::filesystem;
using nlohmann::json;

CropSpec CropSpec::parse(std::string_view text) {
  static const std::regex re(R"((\d+)x(\d+)\+(\d+)\+(\d+))");
  std::cmatch m;
  if (!std::regex_match(text.begin(), text.end(), m, re)) {
    throw std::invalid_argument("crop must look like HxW+row+col, got '" + std::string(text) + "'");
  }
  CropSpec c{std::stoi(m[1]), std::stoi(m[2]), std::stoi(m[3]), std::stoi(m[4])};
  if (c.height <= 0 || c.width <= 0) throw std::invalid_argument("crop size must be positive");
  return c;
}

std::string CropSpec::to_string() const {
  return std::to_string(height) + "x" + std::to_string(width) + "+" + std::to_string(row) + "+" +
         std::to_string(col);
}

ImagePlanes CropSpec::apply(const ImagePlanes& img) const {
  return img.crop(row, col, height, width);
}

ChannelSigmas parse_sigmas(std::string_view text) {
  std::vector<double> v;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad sigma value '" + item + "'");
    }
  }
  if (v.size() != 3) throw std::invalid_argument("sigmas must be three comma-separated values");
  for (double s : v) {
    if (!std::isfinite(s) || s < 0.0) throw std::invalid_argument("sigmas must be non-negative");
  }
  return {v[0], v[1], v[2]};
}

DenoiseConfig ConfigOverrides::apply(DenoiseConfig cfg) const {
  if (p) cfg.p = *p;
  if (M) cfg.M = *M;
  if (window) cfg.window = *window;
  if (stride) cfg.stride = *stride;
  if (K1) cfg.admm.max_iter = *K1;
  if (K2) cfg.K2 = *K2;
  if (mu) cfg.admm.mu = *mu;
  if (rho0) cfg.admm.rho0 = *rho0;
  if (model_scale) cfg.model_scale = *model_scale;
  if (resigma) cfg.resigma = *resigma;
  if (halved_x_update) cfg.admm.halved_x_update = true;
  return cfg;
}

json config_to_json(const DenoiseConfig& cfg) {
  json admm{{"mu", cfg.admm.mu},
            {"rho0", cfg.admm.rho0},
            {"K1", cfg.admm.max_iter},
            {"eps", cfg.admm.eps},
            {"halved_x_update", cfg.admm.halved_x_update}};
  admm["tol"] = cfg.admm.tol ? json(*cfg.admm.tol) : json(nullptr);
  admm["C"] = cfg.admm.C ? json(*cfg.admm.C) : json(nullptr);
  return {{"variant", to_string(cfg.variant)},
          {"p", cfg.p},
          {"M", cfg.M},
          {"window", cfg.window},
          {"stride", cfg.stride},
          {"K2", cfg.K2},
          {"resigma", to_string(cfg.resigma)},
          {"model_scale", cfg.model_scale},
          {"admm", admm}};
}

DenoiseConfig config_from_json(const json& j) {
  DenoiseConfig cfg;
  cfg.variant = parse_variant(j.at("variant").get<std::string>());
  cfg.p = j.at("p").get<int>();
  cfg.M = j.at("M").get<int>();
  cfg.window = j.at("window").get<int>();
  cfg.stride = j.at("stride").get<int>();
  cfg.K2 = j.at("K2").get<int>();
  cfg.resigma = parse_sigma_mode(j.at("resigma").get<std::string>());
  cfg.model_scale = j.at("model_scale").get<double>();
  const json& a = j.at("admm");
  cfg.admm.mu = a.at("mu").get<double>();
  cfg.admm.rho0 = a.at("rho0").get<double>();
  cfg.admm.max_iter = a.at("K1").get<int>();
  cfg.admm.eps = a.at("eps").get<double>();
  cfg.admm.halved_x_update = a.at("halved_x_update").get<bool>();
  if (!a.at("tol").is_null()) cfg.admm.tol = a.at("tol").get<double>();
  if (!a.at("C").is_null()) cfg.admm.C = a.at("C").get<double>();
  return cfg;
}

json record_to_json(const RunRecord& r, bool include_timing) {
  json j{{"type", "record"},
         {"image", r.image_id},
         {"variant", to_string(r.variant)},
         {"sigmas", {r.sigmas.r, r.sigmas.g, r.sigmas.b}},
         {"input_psnr", r.input_psnr},
         {"output_psnr", r.output_psnr},
         {"seed", r.seed},
         {"crop", r.crop ? json(r.crop->to_string()) : json(nullptr)},
         {"clip", r.clip},
         {"config", config_to_json(r.cfg)}};
  if (include_timing) j["wall_seconds"] = r.wall_seconds;
  return j;
}

RunRecord record_from_json(const json& j) {
  RunRecord r;
  r.image_id = j.at("image").get<std::string>();
  r.variant = parse_variant(j.at("variant").get<std::string>());
  const auto s = j.at("sigmas").get<std::vector<double>>();
  if (s.size() != 3) throw std::invalid_argument("record sigmas must have three entries");
  r.sigmas = {s[0], s[1], s[2]};
  r.input_psnr = j.at("input_psnr").get<double>();
  r.output_psnr = j.at("output_psnr").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  if (!j.at("crop").is_null()) r.crop = CropSpec::parse(j.at("crop").get<std::string>());
  r.clip = j.at("clip").get<bool>();
  r.cfg = config_from_json(j.at("config"));
  if (j.contains("wall_seconds")) r.wall_seconds = j.at("wall_seconds").get<double>();
  return r;
}

std::vector<VariantSummary> RunReport::summaries() const {
  std::vector<VariantSummary> out;
  for (const auto& r : records) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const VariantSummary& s) { return s.variant == r.variant; });
    if (it == out.end()) {
      out.push_back({r.variant});
      it = std::prev(out.end());
    }
    ++it->count;
    it->mean_input_psnr += r.input_psnr;
    it->mean_output_psnr += r.output_psnr;
  }
  for (auto& s : out) {
    s.mean_input_psnr /= s.count;
    s.mean_output_psnr /= s.count;
  }
  return out;
}

std::string RunReport::to_jsonl(bool include_timing) const {
  std::string out;
  for (const auto& r : records) out += record_to_json(r, include_timing).dump() + "\n";
  for (const auto& s : summaries()) {
    json j{{"type", "summary"},
           {"variant", to_string(s.variant)},
           {"count", s.count},
           {"mean_input_psnr", s.mean_input_psnr},
           {"mean_output_psnr", s.mean_output_psnr}};
    out += j.dump() + "\n";
  }
  return out;
}

std::string RunReport::to_table() const {
  std::vector<std::string> images;
  for (const auto& r : records) {
    if (std::find(images.begin(), images.end(), r.image_id) == images.end()) {
      images.push_back(r.image_id);
    }
  }
  const auto sums = summaries();
  auto find = [&](const std::string& img, Variant v) -> const RunRecord* {
    for (const auto& r : records) {
      if (r.image_id == img && r.variant == v) return &r;
    }
    return nullptr;
  };

  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << std::left << std::setw(24) << "image" << std::right << std::setw(10) << "noisy";
  for (const auto& s : sums) os << std::setw(10) << to_string(s.variant);
  os << std::setw(10) << "time(s)" << "\n";
  for (const auto& img : images) {
    os << std::left << std::setw(24) << img << std::right;
    const RunRecord* first = nullptr;
    double seconds = 0.0;
    for (const auto& s : sums) {
      if (const RunRecord* r = find(img, s.variant)) {
        if (!first) first = r;
        seconds += r->wall_seconds;
      }
    }
    os << std::setw(10) << (first ? first->input_psnr : 0.0);
    for (const auto& s : sums) {
      const RunRecord* r = find(img, s.variant);
      if (r) {
        os << std::setw(10) << r->output_psnr;
      } else {
        os << std::setw(10) << "-";
      }
    }
    os << std::setw(10) << seconds << "\n";
  }
  os << std::left << std::setw(24) << "average" << std::right << std::setw(10)
     << (sums.empty() ? 0.0 : sums.front().mean_input_psnr);
  for (const auto& s : sums) os << std::setw(10) << s.mean_output_psnr;
  os << "\n";
  return os.str();
}

RunReport RunReport::from_jsonl(std::string_view text) {
  RunReport rep;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    if (j.at("type") == "record") rep.records.push_back(record_from_json(j));
  }
  return rep;
}

std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t image_seed(std::uint64_t root, std::string_view file_name) {
  return root ^ stable_hash(file_name);
}

std::vector<fs::path> list_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("corpus is not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) {
      return static_cast<char>(std::tolower(c));
    });
    if (ext == ".ppm" || ext == ".png") files.push_back(e.path());
  }
  if (files.empty()) throw std::runtime_error("corpus is empty: " + dir.string());
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return files;
}

namespace {

struct NoisyPair {
  ImagePlanes clean;
  ImagePlanes noisy;
};

NoisyPair make_pair(const fs::path& file, const std::optional<CropSpec>& crop,
                    const ChannelSigmas& sigmas, std::uint64_t seed, bool clip) {
  ImagePlanes clean = image_read(file);
  if (crop) clean = crop->apply(clean);
  ImagePlanes noisy = add_awgn(clean, sigmas, seed);
  if (clip) noisy = clip_to_range(noisy);
  return {std::move(clean), std::move(noisy)};
}

}  // namespace

RunReport run_bench(const BenchOptions& opts) {
  if (opts.variants.empty()) throw std::invalid_argument("no variants requested");
  RunReport rep;
  for (const fs::path& file : list_corpus(opts.corpus)) {
    const std::string id = file.filename().string();
    const std::uint64_t seed = image_seed(opts.seed, id);
    const NoisyPair pair = make_pair(file, opts.crop, opts.sigmas, seed, opts.clip);
    const double input_psnr = psnr(pair.clean, pair.noisy);
    for (Variant v : opts.variants) {
      DenoiseConfig cfg = opts.overrides.apply(DenoiseConfig::preset(opts.preset, v));
      cfg.threads = opts.threads;
      const auto t0 = std::chrono::steady_clock::now();
      const ImagePlanes out = denoise(pair.noisy, opts.sigmas, cfg);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      // Snapshots are stored with threads = 0; the worker count never
      // changes results.
      cfg.threads = 0;
      rep.records.push_back(
          {id, v, opts.sigmas, input_psnr, psnr(pair.clean, out), secs, cfg, seed, opts.crop,
           opts.clip});
    }
  }
  return rep;
}

double reproduce_record(const RunRecord& r, const fs::path& corpus) {
  const NoisyPair pair = make_pair(corpus / r.image_id, r.crop, r.sigmas, r.seed, r.clip);
  return psnr(pair.clean, denoise(pair.noisy, r.sigmas, r.cfg));
}

}  // namespace mcwnnm
