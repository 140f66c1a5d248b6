// End-to-end commands: corpus training, prior sampling, rate-limited query generation,
// information-dynamics analysis and rate/distortion reporting. The CLI is a thin layer
// over these functions; every command is a pure function of its inputs and seed.
#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "qbdi/channel.hpp"
#include "qbdi/errors.hpp"
#include "qbdi/io.hpp"
#include "qbdi/midi.hpp"
#include "qbdi/model_io.hpp"
#include "qbdi/pianoroll.hpp"
#include "qbdi/vae.hpp"
#include "qbdi/vmo.hpp"

namespace qbdi {

// ---------------------------------------------------------------------------
// Corpus
// ---------------------------------------------------------------------------

struct Corpus {
  std::vector<BarFrame> frames;
  std::vector<std::filesystem::path> files;  ///< files that contributed (parsed cleanly)
  std::vector<std::string> warnings;
};

inline bool has_midi_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".mid" || ext == ".midi";
}

/// Parses every .mid/.midi file in `dir` (sorted by name) and pools their full bars.
/// Unparseable files are skipped with a warning; none parseable is an error.
inline Corpus load_corpus(const std::filesystem::path& dir, PitchRange range = {}) {
  if (!std::filesystem::is_directory(dir)) throw InputError("corpus '" + dir.string() + "' is not a directory");
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && has_midi_extension(entry.path())) paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  Corpus c;
  for (const auto& p : paths) {
    try {
      MidiParseStats stats;
      const PianoRoll roll = parse_midi(read_bytes(p), range, &stats);
      if (stats.dropped_notes > 0) {
        c.warnings.push_back(p.filename().string() + ": dropped " + std::to_string(stats.dropped_notes) +
                             " notes outside the pitch range");
      }
      auto frames = to_frames(roll);
      c.frames.insert(c.frames.end(), frames.begin(), frames.end());
      c.files.push_back(p);
    } catch (const InputError& e) {
      c.warnings.push_back(p.filename().string() + ": skipped (" + e.what() + ")");
    }
  }
  if (c.files.empty()) throw InputError("no parseable MIDI files in '" + dir.string() + "'");
  if (c.frames.empty()) throw InputError("corpus '" + dir.string() + "' contains no full bars");
  return c;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainOptions {
  std::size_t hidden = 500;
  std::size_t latent = 120;
  double beta = 1.0;
  TrainConfig train;
  PitchRange range{};
};

struct TrainOutcome {
  ModelBundle bundle;
  std::vector<RdReport> curve;
};

/// Trains a fresh model on the frames and stores the corpus marginal latent statistics.
/// The same seed initializes the weights and drives the SGD noise.
inline TrainOutcome train_bundle(std::span<const BarFrame> frames, const TrainOptions& opt) {
  const VaeDims dims{kStepsPerBar * opt.range.count(), opt.hidden, opt.latent};
  TrainConfig cfg = opt.train;
  cfg.beta = opt.beta;
  TrainResult r = train(init_model(dims, opt.beta, cfg.seed), frames, cfg);
  TrainOutcome out;
  out.bundle.range = opt.range;
  out.bundle.marginal = marginal_latent_stats(r.model, frames);
  out.bundle.model = std::move(r.model);
  out.curve = std::move(r.curve);
  return out;
}

inline CsvWriter loss_curve_csv(std::span<const RdReport> curve) {
  CsvWriter csv({"epoch", "rate", "distortion", "neg_elbo_beta"});
  for (std::size_t e = 0; e < curve.size(); ++e) {
    csv.row({std::to_string(e), format_real(curve[e].rate), format_real(curve[e].distortion),
             format_real(curve[e].neg_elbo_beta)});
  }
  return csv;
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

inline PianoRoll sample_bars(const ModelBundle& bundle, std::size_t bars, std::uint64_t seed,
                             Binarize mode = Binarize::threshold) {
  Rng rng(seed);
  const auto frames = sample_prior(bundle.model, bars, rng, bundle.range, mode);
  return frames_to_pianoroll(frames, bundle.range);
}

// ---------------------------------------------------------------------------
// query
// ---------------------------------------------------------------------------

/// Which statistics feed the channel as (mu_e, sigma_e^2).
enum class StatsMode {
  marginal,   ///< corpus aggregate posterior stored in the bundle: zero-rate components collapse to it
  posterior,  ///< each frame's own posterior mean and variance
};

inline StatsMode parse_stats_mode(const std::string& s) {
  if (s == "marginal") return StatsMode::marginal;
  if (s == "posterior") return StatsMode::posterior;
  throw InputError("unknown stats mode '" + s + "' (expected marginal or posterior)");
}

struct QueryOptions {
  std::optional<long> bits;  ///< per-frame budget; empty = full rate
  std::uint64_t seed = 0;
  StatsMode stats = StatsMode::marginal;
};

struct QueryOutcome {
  PianoRoll output;
  bool full_rate = true;
  BitAllocation allocation;  ///< computed once from the marginal variances (empty without a budget)
  std::vector<std::vector<double>> encoder_latents;  ///< z_e per bar
  std::vector<std::vector<double>> decoder_latents;  ///< z_d per bar
};

/// Seed of the channel noise stream (splitmix64 of the query seed). z_e comes from a
/// separate stream seeded directly, so it is identical for a given seed at every budget.
inline std::uint64_t channel_seed(std::uint64_t seed) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Per bar: encode, reparameterize (z_e), pass through the rate-limited channel (z_d),
/// decode and threshold. The allocation is computed once from the marginal variances.
/// A budget >= 64 * latent_dim, or no budget, is full rate: z_d = z_e.
inline QueryOutcome run_query(const ModelBundle& bundle, const PianoRoll& query, const QueryOptions& opt) {
  if (query.range() != bundle.range) throw InputError("query pitch range does not match the model");
  const auto frames = to_frames(query);
  if (frames.empty()) throw InputError("query contains no full bars");
  if (opt.bits && *opt.bits < 0) throw InputError("bit budget must be >= 0");

  const VaeModel& model = bundle.model;
  const std::size_t latent = model.dims.latent;
  QueryOutcome out;
  out.full_rate = !opt.bits || *opt.bits >= static_cast<long>(kInfiniteRateBits) * static_cast<long>(latent);

  ChannelParams params;
  if (opt.bits) {
    const std::vector<double> ref_var(bundle.marginal.variance.data(),
                                      bundle.marginal.variance.data() + bundle.marginal.variance.size());
    out.allocation = allocate_bits(ref_var, *opt.bits);
    params.rate.assign(out.allocation.rates.begin(), out.allocation.rates.end());
    params.mean.assign(bundle.marginal.mean.data(), bundle.marginal.mean.data() + latent);
    params.variance = ref_var;
  }

  Rng latent_rng(opt.seed);
  Rng chan_rng(channel_seed(opt.seed));
  std::vector<BarFrame> decoded;
  decoded.reserve(frames.size());
  for (const auto& f : frames) {
    const LatentFrame q = reparameterize(encode(model, f), latent_rng);
    std::vector<double> z_e(q.sample.data(), q.sample.data() + q.sample.size());
    std::vector<double> z_d;
    if (out.full_rate) {
      z_d = z_e;
    } else {
      if (opt.stats == StatsMode::posterior) {
        const Eigen::VectorXd var = q.variance();
        params.mean.assign(q.mean.data(), q.mean.data() + latent);
        params.variance.assign(var.data(), var.data() + latent);
      }
      z_d = transmit(z_e, params, chan_rng);
    }
    const Eigen::Map<const Eigen::VectorXd> zd(z_d.data(), static_cast<Eigen::Index>(z_d.size()));
    decoded.push_back(binarize(decode(model, zd), bundle.range, Binarize::threshold));
    out.encoder_latents.push_back(std::move(z_e));
    out.decoder_latents.push_back(std::move(z_d));
  }
  out.output = frames_to_pianoroll(decoded, bundle.range);
  return out;
}

inline CsvWriter allocation_csv(const BitAllocation& a) {
  CsvWriter csv({"component", "variance", "rate_bits", "residual"});
  for (std::size_t i = 0; i < a.rates.size(); ++i) {
    csv.row({std::to_string(i), format_real(a.variances[i]), std::to_string(a.rates[i]), format_real(a.residual[i])});
  }
  return csv;
}

/// One row per bar, latent_dim columns z0..z{d-1}.
inline CsvWriter latents_csv(std::span<const std::vector<double>> rows) {
  std::vector<std::string> header;
  const std::size_t d = rows.empty() ? 0 : rows.front().size();
  for (std::size_t i = 0; i < d; ++i) header.push_back("z" + std::to_string(i));
  CsvWriter csv(header);
  for (const auto& r : rows) {
    std::vector<std::string> cells;
    cells.reserve(r.size());
    for (double v : r) cells.push_back(format_real(v));
    csv.row(cells);
  }
  return csv;
}

/// Mean over bars and components of (a - b)^2.
inline double latent_mse(std::span<const std::vector<double>> a, std::span<const std::vector<double>> b) {
  if (a.size() != b.size()) throw InputError("latent_mse: sequence lengths differ");
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t].size() != b[t].size()) throw InputError("latent_mse: vector lengths differ");
    for (std::size_t i = 0; i < a[t].size(); ++i) {
      s += (a[t][i] - b[t][i]) * (a[t][i] - b[t][i]);
      ++n;
    }
  }
  return n ? s / static_cast<double>(n) : 0.0;
}

// ---------------------------------------------------------------------------
// ir
// ---------------------------------------------------------------------------

/// Chroma of each full bar, as VMO features.
inline std::vector<vmo::Feature> chroma_features(const PianoRoll& roll) {
  std::vector<vmo::Feature> out;
  for (const auto& f : to_frames(roll)) {
    const ChromaVector c = chroma(f);
    out.emplace_back(c.begin(), c.end());
  }
  return out;
}

inline std::vector<vmo::Feature> latent_features(const NumericTable& table) { return table.rows; }

/// Threshold candidates: the automatic quantile grid, every distinct pairwise distance,
/// or an explicit list.
using ThetaSpec = std::variant<vmo::ThetaGridKind, std::vector<double>>;

inline ThetaSpec parse_theta_spec(const std::string& s) {
  if (s == "auto") return vmo::ThetaGridKind::automatic;
  if (s == "all") return vmo::ThetaGridKind::exhaustive;
  std::vector<double> list;
  std::string cell;
  std::istringstream in(s);
  while (std::getline(in, cell, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(cell, &used);
      if (used != cell.size() || !(v >= 0.0)) throw std::invalid_argument(cell);
      list.push_back(v);
    } catch (const std::exception&) {
      throw InputError("bad threshold '" + cell + "' (expected auto, all, or a comma list of values >= 0)");
    }
  }
  if (list.empty()) throw InputError("empty threshold list");
  return list;
}

struct IrOptions {
  vmo::Distance distance = vmo::Distance::tonnetz;
  ThetaSpec thetas = vmo::ThetaGridKind::automatic;
  std::size_t min_length = 2;
  std::size_t min_occurrences = 2;
};

struct IrOutcome {
  vmo::ThresholdSearch search;
  vmo::IRProfile profile;
  std::vector<vmo::Motif> motifs;
};

inline IrOutcome run_ir(std::span<const vmo::Feature> features, const IrOptions& opt) {
  if (features.size() < 2) throw InputError("information-rate analysis needs at least 2 frames");
  const vmo::DistanceFn fn = vmo::distance_function(opt.distance);
  std::vector<double> grid = std::holds_alternative<std::vector<double>>(opt.thetas)
                                 ? std::get<std::vector<double>>(opt.thetas)
                                 : vmo::theta_grid(features, fn, std::get<vmo::ThetaGridKind>(opt.thetas));
  IrOutcome out;
  out.search = vmo::threshold_search(features, fn, std::move(grid), std::string(vmo::to_string(opt.distance)));
  out.profile = vmo::ir_of_oracle(out.search.oracle);
  out.motifs = vmo::find_motifs(out.search.oracle, opt.min_length, opt.min_occurrences);
  return out;
}

inline CsvWriter ir_profile_csv(const vmo::IRProfile& p) {
  CsvWriter csv({"position", "ir"});
  for (std::size_t i = 0; i < p.per_frame.size(); ++i) csv.row({std::to_string(i + 1), format_real(p.per_frame[i])});
  return csv;
}

inline CsvWriter threshold_curve_csv(const vmo::ThresholdCurve& c) {
  CsvWriter csv({"theta", "total_ir", "optimal"});
  for (const auto& [theta, total] : c.points) {
    csv.row({format_real(theta), format_real(total), theta == c.theta_star ? "1" : "0"});
  }
  return csv;
}

/// One row per occurrence.
inline CsvWriter motifs_csv(std::span<const vmo::Motif> motifs) {
  CsvWriter csv({"motif_id", "length", "end_position"});
  for (std::size_t m = 0; m < motifs.size(); ++m) {
    for (std::size_t e : motifs[m].occurrences) {
      csv.row({std::to_string(m), std::to_string(motifs[m].length), std::to_string(e)});
    }
  }
  return csv;
}

// ---------------------------------------------------------------------------
// rd-report
// ---------------------------------------------------------------------------

struct RdDiagnostics {
  RdReport report;
  MiEstimate mutual_information;
  std::size_t frames = 0;
  bool bound_holds = true;  ///< I_e <= R + 3 standard errors
};

inline RdDiagnostics rd_diagnostics(const VaeModel& model, std::span<const BarFrame> frames, std::uint64_t seed,
                                    std::size_t samples_per_frame = 16) {
  if (frames.empty()) throw InputError("rd-report: empty corpus");
  Rng rng(seed);
  RdDiagnostics d;
  d.frames = frames.size();
  d.report = loss(model, frames, rng);
  if (frames.size() >= 2) {
    d.mutual_information = estimate_mutual_information(model, frames, rng, samples_per_frame);
  }
  d.bound_holds = d.mutual_information.value <= d.report.rate + 3.0 * d.mutual_information.std_error;
  return d;
}

inline CsvWriter rd_report_csv(const RdDiagnostics& d) {
  CsvWriter csv({"frames", "beta", "rate", "distortion", "neg_elbo_beta", "mi_estimate", "mi_std_error",
                 "bound_holds"});
  csv.row({std::to_string(d.frames), format_real(d.report.beta), format_real(d.report.rate),
           format_real(d.report.distortion), format_real(d.report.neg_elbo_beta),
           format_real(d.mutual_information.value), format_real(d.mutual_information.std_error),
           d.bound_holds ? "1" : "0"});
  return csv;
}

}  // namespace qbdi
