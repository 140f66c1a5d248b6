// Fully-connected variational autoencoder over bar frames.
//
// Encoder: x -> sigmoid hidden -> (mean, logvar) heads. Decoder: z -> sigmoid hidden ->
// sigmoid output, read as independent Bernoulli probabilities per cell.
//
// The training objective is the beta-weighted negative ELBO written as
//     loss = R + beta * D
// with R the closed-form KL(q(z|x) || N(0, I)) and D the Bernoulli negative
// log-likelihood, both in nats and averaged over frames. Note that beta multiplies
// the distortion here; the usual beta-VAE form D + beta' * R corresponds to
// beta' = 1 / beta after dividing the loss by beta.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qbdi/errors.hpp"
#include "qbdi/pianoroll.hpp"

namespace qbdi {

using Rng = std::mt19937_64;

inline constexpr double kLogvarMin = -10.0;
inline constexpr double kLogvarMax = 10.0;

struct VaeDims {
  std::size_t input = kStepsPerBar * PitchRange{}.count();
  std::size_t hidden = 500;
  std::size_t latent = 120;
  friend bool operator==(const VaeDims&, const VaeDims&) = default;
};

/// Weight and bias arrays. Matrices are stored (fan_in x fan_out): a layer computes
/// W^T x + b, or X W + b for a row-per-frame batch.
struct VaeParams {
  Eigen::MatrixXd enc_w;     // input x hidden
  Eigen::VectorXd enc_b;     // hidden
  Eigen::MatrixXd mean_w;    // hidden x latent
  Eigen::VectorXd mean_b;    // latent
  Eigen::MatrixXd logvar_w;  // hidden x latent
  Eigen::VectorXd logvar_b;  // latent
  Eigen::MatrixXd dec_w;     // latent x hidden
  Eigen::VectorXd dec_b;     // hidden
  Eigen::MatrixXd out_w;     // hidden x input
  Eigen::VectorXd out_b;     // input

  static VaeParams zeros(const VaeDims& d) {
    VaeParams p;
    p.enc_w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d.input), static_cast<Eigen::Index>(d.hidden));
    p.enc_b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d.hidden));
    p.mean_w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d.hidden), static_cast<Eigen::Index>(d.latent));
    p.mean_b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d.latent));
    p.logvar_w = p.mean_w;
    p.logvar_b = p.mean_b;
    p.dec_w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d.latent), static_cast<Eigen::Index>(d.hidden));
    p.dec_b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d.hidden));
    p.out_w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d.hidden), static_cast<Eigen::Index>(d.input));
    p.out_b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d.input));
    return p;
  }

  /// Calls f(name, array) for every parameter array in a fixed order.
  template <class Self, class F>
  static void visit(Self& self, F&& f) {
    f("enc_w", self.enc_w);
    f("enc_b", self.enc_b);
    f("mean_w", self.mean_w);
    f("mean_b", self.mean_b);
    f("logvar_w", self.logvar_w);
    f("logvar_b", self.logvar_b);
    f("dec_w", self.dec_w);
    f("dec_b", self.dec_b);
    f("out_w", self.out_w);
    f("out_b", self.out_b);
  }
  template <class F> void for_each(F&& f) { visit(*this, std::forward<F>(f)); }
  template <class F> void for_each(F&& f) const { visit(*this, std::forward<F>(f)); }

  bool operator==(const VaeParams& o) const {
    bool same = true;
    auto lhs = std::vector<const double*>{};
    auto sizes = std::vector<Eigen::Index>{};
    for_each([&](const char*, const auto& a) {
      lhs.push_back(a.data());
      sizes.push_back(a.size());
    });
    std::size_t i = 0;
    o.for_each([&](const char*, const auto& a) {
      if (a.size() != sizes[i] || !std::equal(a.data(), a.data() + a.size(), lhs[i])) same = false;
      ++i;
    });
    return same;
  }
};

struct VaeModel {
  VaeDims dims{};
  double beta = 1.0;
  VaeParams params;

  bool operator==(const VaeModel& o) const {
    return dims == o.dims && beta == o.beta && params == o.params;
  }
};

/// Posterior statistics of one frame: mean, log-variance and (optionally) a drawn sample.
struct LatentFrame {
  Eigen::VectorXd mean;
  Eigen::VectorXd logvar;
  Eigen::VectorXd sample;

  Eigen::VectorXd variance() const { return logvar.array().exp().matrix(); }
};

struct RdReport {
  double rate = 0.0;          ///< mean KL(q(z|x) || N(0, I)), nats
  double distortion = 0.0;    ///< mean Bernoulli negative log-likelihood, nats
  double neg_elbo_beta = 0.0; ///< rate + beta * distortion
  double beta = 1.0;
};

inline RdReport make_report(double rate, double distortion, double beta) {
  return RdReport{rate, distortion, rate + beta * distortion, beta};
}

namespace detail {

inline double sigmoid(double a) {
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

/// log(1 + exp(a)) without overflow.
inline double softplus(double a) { return std::max(a, 0.0) + std::log1p(std::exp(-std::abs(a))); }

template <class Derived>
Eigen::MatrixXd sigmoid(const Eigen::MatrixBase<Derived>& a) {
  return a.unaryExpr([](double v) { return sigmoid(v); });
}

inline Eigen::Index idx(std::size_t n) { return static_cast<Eigen::Index>(n); }

inline void check_positive_dims(const VaeDims& d) {
  if (d.input == 0 || d.hidden == 0 || d.latent == 0) {
    throw InputError("VAE dimensions must all be >= 1 (got " + std::to_string(d.input) + ", " +
                     std::to_string(d.hidden) + ", " + std::to_string(d.latent) + ")");
  }
}

inline void check_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw InputError("beta must be a positive finite number, got " + std::to_string(beta));
  }
}

}  // namespace detail

/// Uniform +-sqrt(6 / (fan_in + fan_out)) weights, zero biases. Deterministic per seed.
inline VaeModel init_model(const VaeDims& dims, double beta, std::uint64_t seed) {
  detail::check_positive_dims(dims);
  detail::check_beta(beta);
  VaeModel m{dims, beta, VaeParams::zeros(dims)};
  Rng rng(seed);
  auto fill = [&](Eigen::MatrixXd& w) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = u(rng);
  };
  fill(m.params.enc_w);
  fill(m.params.mean_w);
  fill(m.params.logvar_w);
  fill(m.params.dec_w);
  fill(m.params.out_w);
  return m;
}

/// Frame as a 0/1 column vector.
inline Eigen::VectorXd frame_input(const BarFrame& frame) {
  Eigen::VectorXd x(detail::idx(frame.values.size()));
  for (std::size_t i = 0; i < frame.values.size(); ++i) x(detail::idx(i)) = frame.values[i] ? 1.0 : 0.0;
  return x;
}

/// Frames stacked as rows.
inline Eigen::MatrixXd frames_matrix(std::span<const BarFrame> frames) {
  if (frames.empty()) return {};
  Eigen::MatrixXd x(detail::idx(frames.size()), detail::idx(frames.front().values.size()));
  for (std::size_t r = 0; r < frames.size(); ++r) {
    if (frames[r].values.size() != frames.front().values.size()) {
      throw InputError("frames have inconsistent lengths");
    }
    for (std::size_t c = 0; c < frames[r].values.size(); ++c)
      x(detail::idx(r), detail::idx(c)) = frames[r].values[c] ? 1.0 : 0.0;
  }
  return x;
}

/// Encoder heads over the shared hidden layer. Returned logvar is clamped to [-10, 10].
inline LatentFrame encode(const VaeModel& model, const Eigen::VectorXd& x) {
  if (static_cast<std::size_t>(x.size()) != model.dims.input) {
    throw InputError("encode: input length " + std::to_string(x.size()) + " != model input " +
                     std::to_string(model.dims.input));
  }
  const auto& p = model.params;
  const Eigen::VectorXd h = detail::sigmoid(p.enc_w.transpose() * x + p.enc_b);
  LatentFrame out;
  out.mean = p.mean_w.transpose() * h + p.mean_b;
  out.logvar = (p.logvar_w.transpose() * h + p.logvar_b).cwiseMax(kLogvarMin).cwiseMin(kLogvarMax);
  return out;
}

inline LatentFrame encode(const VaeModel& model, const BarFrame& frame) {
  return encode(model, frame_input(frame));
}

/// Fills latent.sample = mean + exp(logvar / 2) * eps with eps ~ N(0, I).
inline LatentFrame reparameterize(LatentFrame latent, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  latent.sample.resize(latent.mean.size());
  for (Eigen::Index i = 0; i < latent.mean.size(); ++i) {
    const double lv = std::clamp(latent.logvar(i), kLogvarMin, kLogvarMax);
    latent.sample(i) = latent.mean(i) + std::exp(0.5 * lv) * normal(rng);
  }
  return latent;
}

/// Per-cell Bernoulli probabilities, kept strictly inside (0, 1).
inline Eigen::VectorXd decode(const VaeModel& model, const Eigen::VectorXd& z) {
  if (static_cast<std::size_t>(z.size()) != model.dims.latent) {
    throw InputError("decode: latent length " + std::to_string(z.size()) + " != model latent " +
                     std::to_string(model.dims.latent));
  }
  const auto& p = model.params;
  const Eigen::VectorXd h = detail::sigmoid(p.dec_w.transpose() * z + p.dec_b);
  constexpr double eps = 1e-15;
  return detail::sigmoid(p.out_w.transpose() * h + p.out_b).cwiseMax(eps).cwiseMin(1.0 - eps);
}

/// Closed-form KL(N(mean, exp(logvar)) || N(0, I)), summed over components.
inline double kl_to_standard_normal(const Eigen::VectorXd& mean, const Eigen::VectorXd& logvar) {
  double kl = 0.0;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    kl += 0.5 * (mean(i) * mean(i) + std::exp(logvar(i)) - 1.0 - logvar(i));
  }
  return kl;
}

/// Rate/distortion report and exact gradient of rate + beta * distortion for a batch
/// (rows of `x`) with fixed reparameterization noise `noise` (batch x latent).
struct LossGradient {
  RdReport report;
  VaeParams grad;
};

inline LossGradient loss_and_gradient(const VaeModel& model, const Eigen::MatrixXd& x,
                                      const Eigen::MatrixXd& noise, bool want_gradient = true) {
  using Eigen::MatrixXd;
  const auto& p = model.params;
  const Eigen::Index batch = x.rows();
  if (batch == 0) throw InputError("loss: empty batch");
  if (static_cast<std::size_t>(x.cols()) != model.dims.input) throw InputError("loss: input dimension mismatch");
  if (noise.rows() != batch || static_cast<std::size_t>(noise.cols()) != model.dims.latent) {
    throw InputError("loss: noise shape mismatch");
  }
  const double inv_b = 1.0 / static_cast<double>(batch);
  const double beta = model.beta;

  const MatrixXd h = detail::sigmoid((x * p.enc_w).rowwise() + p.enc_b.transpose());
  const MatrixXd mu = (h * p.mean_w).rowwise() + p.mean_b.transpose();
  const MatrixXd lv_raw = (h * p.logvar_w).rowwise() + p.logvar_b.transpose();
  const MatrixXd lv = lv_raw.cwiseMax(kLogvarMin).cwiseMin(kLogvarMax);
  const MatrixXd sd = (0.5 * lv.array()).exp().matrix();
  const MatrixXd z = mu + sd.cwiseProduct(noise);
  const MatrixXd h2 = detail::sigmoid((z * p.dec_w).rowwise() + p.dec_b.transpose());
  const MatrixXd logits = (h2 * p.out_w).rowwise() + p.out_b.transpose();

  double rate = 0.0;
  double distortion = 0.0;
  for (Eigen::Index r = 0; r < batch; ++r) {
    for (Eigen::Index c = 0; c < mu.cols(); ++c) {
      rate += 0.5 * (mu(r, c) * mu(r, c) + std::exp(lv(r, c)) - 1.0 - lv(r, c));
    }
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      distortion += detail::softplus(logits(r, c)) - x(r, c) * logits(r, c);
    }
  }
  LossGradient out;
  out.report = make_report(rate * inv_b, distortion * inv_b, beta);
  if (!want_gradient) return out;

  auto& g = out.grad;
  const MatrixXd d_logits = (beta * inv_b) * (detail::sigmoid(logits) - x);
  g.out_w = h2.transpose() * d_logits;
  g.out_b = d_logits.colwise().sum().transpose();
  const MatrixXd d_h2 = (d_logits * p.out_w.transpose()).cwiseProduct(
      h2.cwiseProduct((1.0 - h2.array()).matrix()));
  g.dec_w = z.transpose() * d_h2;
  g.dec_b = d_h2.colwise().sum().transpose();
  const MatrixXd d_z = d_h2 * p.dec_w.transpose();

  const MatrixXd d_mu = d_z + inv_b * mu;
  MatrixXd d_lv = d_z.cwiseProduct(noise).cwiseProduct(0.5 * sd) +
                  (0.5 * inv_b) * (lv.array().exp() - 1.0).matrix();
  for (Eigen::Index r = 0; r < d_lv.rows(); ++r)
    for (Eigen::Index c = 0; c < d_lv.cols(); ++c)
      if (lv_raw(r, c) < kLogvarMin || lv_raw(r, c) > kLogvarMax) d_lv(r, c) = 0.0;

  g.mean_w = h.transpose() * d_mu;
  g.mean_b = d_mu.colwise().sum().transpose();
  g.logvar_w = h.transpose() * d_lv;
  g.logvar_b = d_lv.colwise().sum().transpose();
  const MatrixXd d_h = (d_mu * p.mean_w.transpose() + d_lv * p.logvar_w.transpose())
                           .cwiseProduct(h.cwiseProduct((1.0 - h.array()).matrix()));
  g.enc_w = x.transpose() * d_h;
  g.enc_b = d_h.colwise().sum().transpose();
  return out;
}

/// Standard normal noise matrix (rows x cols) drawn row by row.
inline Eigen::MatrixXd standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd e(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) e(r, c) = normal(rng);
  return e;
}

/// Rate/distortion over a batch with one reparameterization sample per frame.
inline RdReport loss(const VaeModel& model, std::span<const BarFrame> batch, Rng& rng) {
  if (batch.empty()) throw InputError("loss: empty batch");
  const Eigen::MatrixXd x = frames_matrix(batch);
  const Eigen::MatrixXd noise = standard_normal(x.rows(), detail::idx(model.dims.latent), rng);
  return loss_and_gradient(model, x, noise, false).report;
}

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t epochs = 100;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  std::optional<double> beta;  ///< overrides the model's beta when set
};

struct TrainResult {
  VaeModel model;
  std::vector<RdReport> curve;  ///< per epoch, frame-weighted mean of the step reports
};

/// Plain minibatch SGD on rate + beta * distortion. Frames are reshuffled every epoch;
/// single-threaded and bit-reproducible for a fixed seed.
inline TrainResult train(VaeModel model, std::span<const BarFrame> frames, const TrainConfig& config) {
  if (frames.empty()) throw InputError("train: no frames");
  if (config.batch_size == 0) throw InputError("train: batch size must be >= 1");
  if (!(config.learning_rate > 0.0)) throw InputError("train: learning rate must be > 0");
  if (config.beta) {
    detail::check_beta(*config.beta);
    model.beta = *config.beta;
  }
  const Eigen::MatrixXd all = frames_matrix(frames);
  if (static_cast<std::size_t>(all.cols()) != model.dims.input) {
    throw InputError("train: frame length " + std::to_string(all.cols()) + " != model input " +
                     std::to_string(model.dims.input));
  }

  Rng rng(config.seed);
  std::vector<Eigen::Index> order(frames.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  TrainResult result;
  result.curve.reserve(config.epochs);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double rate = 0.0, distortion = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, order.size() - start);
      Eigen::MatrixXd x(detail::idx(count), all.cols());
      for (std::size_t r = 0; r < count; ++r) x.row(detail::idx(r)) = all.row(order[start + r]);
      const Eigen::MatrixXd noise = standard_normal(x.rows(), detail::idx(model.dims.latent), rng);
      LossGradient step = loss_and_gradient(model, x, noise);
      if (!std::isfinite(step.report.neg_elbo_beta)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + " (rate " +
                           std::to_string(step.report.rate) + ", distortion " +
                           std::to_string(step.report.distortion) + ")");
      }
      rate += step.report.rate * static_cast<double>(count);
      distortion += step.report.distortion * static_cast<double>(count);

      std::vector<Eigen::Map<Eigen::VectorXd>> grads;
      step.grad.for_each([&](const char*, auto& a) { grads.emplace_back(a.data(), a.size()); });
      std::size_t k = 0;
      model.params.for_each([&](const char*, auto& a) {
        Eigen::Map<Eigen::VectorXd>(a.data(), a.size()) -= config.learning_rate * grads[k++];
      });
    }
    const double n = static_cast<double>(frames.size());
    result.curve.push_back(make_report(rate / n, distortion / n, model.beta));
  }
  result.model = std::move(model);
  return result;
}

enum class Binarize { threshold, bernoulli };

/// 0.5 threshold (exact ties -> 0), or an independent Bernoulli draw per cell.
inline BarFrame binarize(const Eigen::VectorXd& probs, PitchRange range, Binarize mode, Rng* rng = nullptr) {
  BarFrame f{range, std::vector<std::uint8_t>(static_cast<std::size_t>(probs.size()), 0)};
  if (mode == Binarize::bernoulli && !rng) throw InputError("bernoulli binarization needs an rng");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    const bool on = mode == Binarize::threshold ? probs(i) > 0.5 : u(*rng) < probs(i);
    f.values[static_cast<std::size_t>(i)] = on ? 1 : 0;
  }
  return f;
}

/// Decodes z ~ N(0, I) per frame and binarizes.
inline std::vector<BarFrame> sample_prior(const VaeModel& model, std::size_t n, Rng& rng,
                                          PitchRange range = {}, Binarize mode = Binarize::threshold) {
  if (model.dims.input != kStepsPerBar * range.count()) {
    throw InputError("sample_prior: model input " + std::to_string(model.dims.input) +
                     " does not match pitch range");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<BarFrame> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Eigen::VectorXd z(detail::idx(model.dims.latent));
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    out.push_back(binarize(decode(model, z), range, mode, &rng));
  }
  return out;
}

/// Per-component mean and variance of the aggregate posterior (uniform mixture of
/// per-frame posteriors): variance = Var(posterior means) + mean posterior variance.
struct LatentStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};

inline LatentStats aggregate_stats(std::span<const LatentFrame> latents) {
  if (latents.empty()) throw InputError("latent statistics need at least one frame");
  const Eigen::Index d = latents.front().mean.size();
  const double n = static_cast<double>(latents.size());
  LatentStats s{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d)};
  for (const auto& l : latents) s.mean += l.mean;
  s.mean /= n;
  for (const auto& l : latents) {
    s.variance += (l.mean - s.mean).cwiseAbs2() + l.variance();
  }
  s.variance /= n;
  return s;
}

inline std::vector<LatentFrame> encode_all(const VaeModel& model, std::span<const BarFrame> frames) {
  std::vector<LatentFrame> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(encode(model, f));
  return out;
}

inline LatentStats marginal_latent_stats(const VaeModel& model, std::span<const BarFrame> frames) {
  if (frames.empty()) throw InputError("marginal_latent_stats: no frames");
  const auto latents = encode_all(model, frames);
  return aggregate_stats(latents);
}

/// Monte-Carlo estimate of I_e = E_x KL(q(z|x) || q(z)) with q(z) the uniform mixture of the
/// given posteriors. `std_error` is the standard error of the mean over all draws.
struct MiEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t draws = 0;
};

namespace detail {

inline double log_normal_density(const Eigen::VectorXd& z, const LatentFrame& q) {
  constexpr double log_2pi = 1.8378770664093454835606594728112;
  double s = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double diff = z(i) - q.mean(i);
    s += -0.5 * (log_2pi + q.logvar(i) + diff * diff * std::exp(-q.logvar(i)));
  }
  return s;
}

}  // namespace detail

inline MiEstimate estimate_mutual_information(std::span<const LatentFrame> posteriors, Rng& rng,
                                              std::size_t samples_per_frame) {
  if (posteriors.size() < 2) throw InputError("mutual information estimate needs >= 2 frames");
  if (samples_per_frame == 0) throw InputError("samples_per_frame must be >= 1");
  const double log_n = std::log(static_cast<double>(posteriors.size()));
  std::vector<double> terms;
  terms.reserve(posteriors.size() * samples_per_frame);
  std::vector<double> logs(posteriors.size());
  for (const auto& q : posteriors) {
    for (std::size_t s = 0; s < samples_per_frame; ++s) {
      const Eigen::VectorXd z = reparameterize(q, rng).sample;
      double own = detail::log_normal_density(z, q);
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < posteriors.size(); ++j) {
        logs[j] = (&posteriors[j] == &q) ? own : detail::log_normal_density(z, posteriors[j]);
        top = std::max(top, logs[j]);
      }
      double acc = 0.0;
      for (double l : logs) acc += std::exp(l - top);
      const double log_mix = top + std::log(acc) - log_n;
      terms.push_back(own - log_mix);
    }
  }
  MiEstimate est;
  est.draws = terms.size();
  est.value = std::accumulate(terms.begin(), terms.end(), 0.0) / static_cast<double>(terms.size());
  double ss = 0.0;
  for (double t : terms) ss += (t - est.value) * (t - est.value);
  const double var = terms.size() > 1 ? ss / static_cast<double>(terms.size() - 1) : 0.0;
  est.std_error = std::sqrt(var / static_cast<double>(terms.size()));
  return est;
}

inline MiEstimate estimate_mutual_information(const VaeModel& model, std::span<const BarFrame> frames,
                                              Rng& rng, std::size_t samples_per_frame) {
  const auto latents = encode_all(model, frames);
  return estimate_mutual_information(latents, rng, samples_per_frame);
}

/// Frame-pooled precision/recall F1 of thresholded mean reconstructions.
inline double reconstruction_f1(const VaeModel& model, std::span<const BarFrame> frames) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& f : frames) {
    const Eigen::VectorXd p = decode(model, encode(model, f).mean);
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      const bool predicted = p(detail::idx(i)) > 0.5;
      const bool actual = f.values[i] != 0;
      tp += predicted && actual;
      fp += predicted && !actual;
      fn += !predicted && actual;
    }
  }
  if (tp == 0) return (fp == 0 && fn == 0) ? 1.0 : 0.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

}  // namespace qbdi
