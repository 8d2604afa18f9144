#include "mcwnnm/denoiser.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#include "mcwnnm/lowrank_prox.hpp"
#include "mcwnnm/patch_search.hpp"

namespace mcwnnm {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::McWnnm: return "mcwnnm";
    case Variant::Wnnm1: return "wnnm1";
    case Variant::Wnnm2: return "wnnm2";
    case Variant::Wnnm3: return "wnnm3";
  }
  return "?";
}

std::string_view to_string(SigmaMode m) {
  return m == SigmaMode::Fixed ? "fixed" : "reestimate";
}

std::string_view to_string(Preset p) { return p == Preset::Synthetic ? "synthetic" : "real"; }

Variant parse_variant(std::string_view s) {
  for (Variant v : {Variant::McWnnm, Variant::Wnnm1, Variant::Wnnm2, Variant::Wnnm3}) {
    if (s == to_string(v)) return v;
  }
  throw std::invalid_argument("unknown variant: " + std::string(s));
}

SigmaMode parse_sigma_mode(std::string_view s) {
  if (s == "fixed") return SigmaMode::Fixed;
  if (s == "reestimate") return SigmaMode::Reestimate;
  throw std::invalid_argument("unknown resigma mode: " + std::string(s));
}

Preset parse_preset(std::string_view s) {
  if (s == "synthetic") return Preset::Synthetic;
  if (s == "real") return Preset::Real;
  throw std::invalid_argument("unknown preset: " + std::string(s));
}

DenoiseConfig DenoiseConfig::preset(Preset preset, Variant variant) {
  DenoiseConfig cfg;
  cfg.variant = variant;
  if (preset == Preset::Synthetic) {
    cfg.K2 = 8;
    cfg.admm.rho0 = variant == Variant::Wnnm3 ? 10.0 : 3.0;
  } else {
    cfg.K2 = 2;
    cfg.admm.rho0 = variant == Variant::Wnnm3 ? 8.0 : 6.0;
  }
  return cfg;
}

void DenoiseConfig::validate() const {
  if (p < 1) throw std::invalid_argument("patch size must be at least 1");
  if (M < 1) throw std::invalid_argument("group size must be at least 1");
  if (window < p) throw std::invalid_argument("search window must be at least the patch size");
  if (stride < 1) throw std::invalid_argument("stride must be at least 1");
  if (K2 < 1) throw std::invalid_argument("K2 must be at least 1");
  if (!(model_scale > 0.0)) throw std::invalid_argument("model scale must be positive");
  if (threads < 0) throw std::invalid_argument("thread count must be non-negative");
  admm.validate();
}

ChannelWeightMatrix build_weight_matrix(const ChannelSigmas& sigmas, int p) {
  const ChannelSigmas s = sigmas.clamped();
  return {{1.0 / s.r, 1.0 / s.g, 1.0 / s.b}, p};
}

double average_sigma(const ChannelSigmas& s) {
  return std::sqrt((s.r * s.r + s.g * s.g + s.b * s.b) / 3.0);
}

ChannelSigmas reestimate_sigmas(const ChannelSigmas& original, const ImagePlanes& noisy,
                                const ImagePlanes& current) {
  if (!noisy.same_dims(current)) throw std::invalid_argument("reestimate: dimension mismatch");
  ChannelSigmas out;
  for (int c = 0; c < kChannels; ++c) {
    const auto y = noisy.plane(c);
    const auto x = current.plane(c);
    double sse = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double d = y[i] - x[i];
      sse += d * d;
    }
    const double removed = sse / static_cast<double>(y.size());
    out[c] = std::sqrt(std::max(original[c] * original[c] - removed, 0.0));
  }
  return out.clamped();
}

int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MCWNNM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

// Tasks are solved in parallel but folded into the accumulator in task
// order, so the result does not depend on the worker count.
constexpr std::size_t kBatch = 256;

struct Task {
  Origin ref;
  std::optional<int> channel;
};

class PassSolver {
 public:
  PassSolver(const ImagePlanes& y, const ChannelSigmas& sigmas, const DenoiseConfig& cfg)
      : cfg_(cfg), sigmas_(sigmas.clamped()), C_(cfg.admm.C_for(cfg.M)) {
    if (cfg.variant == Variant::Wnnm1) {
      for (int c = 0; c < kChannels; ++c) banks_.emplace_back(y, cfg.p, c);
    } else {
      banks_.emplace_back(y, cfg.p);
    }
    const double inv_scale = 1.0 / cfg.model_scale;
    weights_ = build_weight_matrix(sigmas_, cfg.p).scaled(cfg.model_scale);
    uniform_ = ChannelWeightMatrix::uniform(cfg.model_scale / average_sigma(sigmas_), cfg.p);
    mean_sigma_model_ = average_sigma(sigmas_) * inv_scale;
  }

  DenoisedGroup solve(const Task& t) const {
    const PatchBank& bank = banks_[t.channel ? *t.channel : 0];
    PatchGroup g = block_match(bank, t.ref, cfg_.M, cfg_.window);
    const Eigen::MatrixXd Y = g.Y / cfg_.model_scale;
    Eigen::MatrixXd X;
    switch (cfg_.variant) {
      case Variant::McWnnm:
        X = admm_solve(Y, weights_, cfg_.admm).X;
        break;
      case Variant::Wnnm3:
        X = admm_solve(Y, uniform_, cfg_.admm).X;
        break;
      case Variant::Wnnm2:
        X = closed_form(Y, mean_sigma_model_);
        break;
      case Variant::Wnnm1:
        X = closed_form(Y, sigmas_[*t.channel] / cfg_.model_scale);
        break;
    }
    return {X * cfg_.model_scale, std::move(g.origins), g.p, t.channel};
  }

 private:
  // One weighted-SVT step with w_i = C sigma^2 / (s_i + eps) taken from
  // the noisy group's own spectrum.
  Eigen::MatrixXd closed_form(const Eigen::MatrixXd& Y, double sigma) const {
    const SvdFactors f = svd(Y);
    return wnnm_closed_form(
        f, SingularWeights::from_singular_values(f.S, C_ * sigma * sigma, cfg_.admm.eps));
  }

  const DenoiseConfig& cfg_;
  ChannelSigmas sigmas_;
  double C_;
  std::vector<PatchBank> banks_;
  ChannelWeightMatrix weights_;
  ChannelWeightMatrix uniform_;
  double mean_sigma_model_ = 0.0;
};

ImagePlanes denoise_pass(const ImagePlanes& y, const ChannelSigmas& sigmas,
                         const DenoiseConfig& cfg, int workers) {
  const PassSolver solver(y, sigmas, cfg);
  const auto refs = assemble_reference_origins(y.width(), y.height(), cfg.p, cfg.stride);

  std::vector<Task> tasks;
  if (cfg.variant == Variant::Wnnm1) {
    for (int c = 0; c < kChannels; ++c) {
      for (Origin r : refs) tasks.push_back({r, c});
    }
  } else {
    for (Origin r : refs) tasks.push_back({r, std::nullopt});
  }

  Accumulator acc(y.width(), y.height());
  std::vector<DenoisedGroup> batch;
  for (std::size_t begin = 0; begin < tasks.size(); begin += kBatch) {
    const std::size_t n = std::min(kBatch, tasks.size() - begin);
    batch.assign(n, DenoisedGroup{});
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          batch[i] = solver.solve(tasks[begin + i]);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    const int nthreads = static_cast<int>(std::min<std::size_t>(workers, n));
    if (nthreads <= 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (int t = 0; t < nthreads; ++t) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
    for (const auto& g : batch) acc.add_group(g.X, g.origins, g.p, g.channel);
  }
  return acc.finalize();
}

}  // namespace

ImagePlanes denoise(const ImagePlanes& noisy, const ChannelSigmas& sigmas,
                    const DenoiseConfig& cfg, const DenoiseObserver& observer) {
  cfg.validate();
  if (noisy.width() < cfg.p || noisy.height() < cfg.p) {
    throw std::invalid_argument("image is smaller than the patch size");
  }
  noisy.check_finite();
  const ChannelSigmas base = sigmas.clamped();
  const int workers = resolve_thread_count(cfg.threads);

  ImagePlanes estimate = noisy;
  for (int k = 1; k <= cfg.K2; ++k) {
    const ChannelSigmas current = (k == 1 || cfg.resigma == SigmaMode::Fixed)
                                      ? base
                                      : reestimate_sigmas(base, noisy, estimate);
    estimate = denoise_pass(estimate, current, cfg, workers);
    estimate.check_finite();
    if (observer) observer(k, current, estimate);
  }
  return estimate;
}

}  // namespace mcwnnm
