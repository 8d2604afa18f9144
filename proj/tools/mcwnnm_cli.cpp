// Command-line front end: `mcwnnm denoise` for single images and
// `mcwnnm bench` for synthetic-noise PSNR tables over a corpus.

#include <chrono>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mcwnnm/bench.hpp"
#include "mcwnnm/image_io.hpp"

namespace {

using namespace mcwnnm;

struct CommonFlags {
  std::string variant = "mcwnnm";
  std::string preset = "synthetic";
  std::string sigmas;
  std::uint64_t seed = 0;
  std::string crop;
  bool clip = false;
  std::string resigma;
  std::string report;
  ConfigOverrides overrides;
  int threads = 0;
};

void add_model_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--preset", f.preset, "synthetic | real")
      ->check(CLI::IsMember({"synthetic", "real"}));
  cmd->add_option("--seed", f.seed, "Root seed for noise synthesis");
  cmd->add_option("--crop", f.crop, "Crop HxW+row+col before processing");
  cmd->add_flag("--clip", f.clip, "Clamp noisy samples to [0,255]");
  cmd->add_option("--resigma", f.resigma, "fixed | reestimate")
      ->check(CLI::IsMember({"fixed", "reestimate"}));
  cmd->add_option("--report", f.report, "Structured (JSON lines) report path");
  cmd->add_option("--p", f.overrides.p, "Patch side");
  cmd->add_option("--M", f.overrides.M, "Similar patches per group");
  cmd->add_option("--window", f.overrides.window, "Search window side");
  cmd->add_option("--stride", f.overrides.stride, "Reference patch stride");
  cmd->add_option("--K1", f.overrides.K1, "ADMM iterations");
  cmd->add_option("--K2", f.overrides.K2, "Outer iterations");
  cmd->add_option("--mu", f.overrides.mu, "Penalty growth factor");
  cmd->add_option("--rho0", f.overrides.rho0, "Initial penalty");
  cmd->add_option("--model-scale", f.overrides.model_scale,
                  "Intensity divisor applied before the group solvers");
  cmd->add_flag("--halved-x-update", f.overrides.halved_x_update,
                "Evaluate the X-update in its halved arrangement");
  cmd->add_option("--threads", f.threads, "Worker threads (default: MCWNNM_THREADS or all)");
}

void finish_overrides(CommonFlags& f) {
  if (!f.resigma.empty()) f.overrides.resigma = parse_sigma_mode(f.resigma);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

struct DenoiseFlags {
  std::string in, out, reference;
  bool estimate = false;
  bool add_noise = false;
};

int run_denoise(CommonFlags& f, const DenoiseFlags& d) {
  finish_overrides(f);
  if (f.sigmas.empty() && !d.estimate) {
    std::cerr << "error: sigmas required (pass --sigmas r,g,b or --estimate)\n";
    return 2;
  }
  const Variant variant = parse_variant(f.variant);
  std::optional<CropSpec> crop;
  if (!f.crop.empty()) crop = CropSpec::parse(f.crop);

  ImagePlanes input = image_read(d.in);
  if (crop) input = crop->apply(input);

  std::optional<ImagePlanes> clean;
  if (!d.reference.empty()) {
    clean = image_read(d.reference);
    if (crop) clean = crop->apply(*clean);
  }
  ImagePlanes noisy = input;
  if (d.add_noise) {
    if (f.sigmas.empty()) {
      std::cerr << "error: --add-noise needs explicit --sigmas\n";
      return 2;
    }
    clean = input;
    noisy = add_awgn(input, parse_sigmas(f.sigmas), f.seed);
    if (f.clip) noisy = clip_to_range(noisy);
  }
  const ChannelSigmas sigmas = f.sigmas.empty() ? estimate_sigmas(noisy) : parse_sigmas(f.sigmas);

  DenoiseConfig cfg = f.overrides.apply(DenoiseConfig::preset(parse_preset(f.preset), variant));
  cfg.threads = f.threads;
  const auto t0 = std::chrono::steady_clock::now();
  const ImagePlanes out = denoise(noisy, sigmas, cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  image_write(out, d.out);

  cfg.threads = 0;
  RunRecord rec{std::filesystem::path(d.in).filename().string(), variant, sigmas, 0.0, 0.0, secs,
                cfg, f.seed, crop, f.clip};
  if (clean) {
    rec.input_psnr = psnr(*clean, noisy);
    rec.output_psnr = psnr(*clean, out);
  }
  const std::string report_path = f.report.empty() ? d.out + ".report.jsonl" : f.report;
  write_text(report_path, record_to_json(rec, true).dump() + "\n");

  std::cout << "variant " << to_string(variant) << "  sigmas " << sigmas.r << "," << sigmas.g
            << "," << sigmas.b << "  time " << secs << " s\n";
  if (clean) {
    std::cout << "PSNR noisy " << rec.input_psnr << " dB -> denoised " << rec.output_psnr
              << " dB\n";
  }
  return 0;
}

struct BenchFlags {
  std::string corpus;
  std::vector<std::string> variants{"mcwnnm"};
  std::string table;
  bool timings = false;
};

int run_bench_cmd(CommonFlags& f, const BenchFlags& b) {
  finish_overrides(f);
  BenchOptions opts;
  opts.corpus = b.corpus;
  opts.variants.clear();
  for (const auto& v : b.variants) opts.variants.push_back(parse_variant(v));
  if (!f.sigmas.empty()) opts.sigmas = parse_sigmas(f.sigmas);
  opts.preset = parse_preset(f.preset);
  opts.seed = f.seed;
  if (!f.crop.empty()) opts.crop = CropSpec::parse(f.crop);
  opts.clip = f.clip;
  opts.overrides = f.overrides;
  opts.threads = f.threads;

  const RunReport rep = run_bench(opts);
  const std::string table = rep.to_table();
  std::cout << table;
  write_text(f.report.empty() ? "bench_report.jsonl" : f.report, rep.to_jsonl(b.timings));
  if (!b.table.empty()) write_text(b.table, table);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Channel-weighted low-rank colour image denoiser"};
  app.require_subcommand(1);

  CommonFlags df;
  DenoiseFlags dd;
  auto* den = app.add_subcommand("denoise", "Denoise one image");
  den->add_option("--in", dd.in, "Input image (.ppm or .png)")->required()->check(CLI::ExistingFile);
  den->add_option("--out", dd.out, "Output image (.ppm or .png)")->required();
  den->add_option("--sigmas", df.sigmas, "Per-channel noise levels r,g,b");
  den->add_flag("--estimate", dd.estimate, "Estimate sigmas from the input");
  den->add_option("--variant", df.variant, "mcwnnm | wnnm1 | wnnm2 | wnnm3")
      ->check(CLI::IsMember({"mcwnnm", "wnnm1", "wnnm2", "wnnm3"}));
  den->add_option("--reference", dd.reference, "Clean image for PSNR reporting")
      ->check(CLI::ExistingFile);
  den->add_flag("--add-noise", dd.add_noise,
                "Treat --in as clean and add seeded noise at --sigmas first");
  add_model_flags(den, df);

  CommonFlags bf;
  BenchFlags bb;
  auto* bench = app.add_subcommand("bench", "Synthetic-noise benchmark over a corpus");
  bench->add_option("--corpus", bb.corpus, "Directory of clean .ppm/.png images")->required();
  bench->add_option("--variant,--variants", bb.variants, "Variants to run")
      ->delimiter(',')
      ->check(CLI::IsMember({"mcwnnm", "wnnm1", "wnnm2", "wnnm3"}));
  bench->add_option("--sigmas", bf.sigmas, "Per-channel noise levels r,g,b (default 40,20,30)");
  bench->add_option("--table", bb.table, "Also write the text table here");
  bench->add_flag("--timings", bb.timings, "Include wall-clock times in the report");
  add_model_flags(bench, bf);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*den) return run_denoise(df, dd);
    return run_bench_cmd(bf, bb);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
