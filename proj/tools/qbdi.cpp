// qbdi command-line tool: train / sample / query / ir / rd-report / demo-corpus.
//
// Exit codes: 0 success, 2 input or parse error, 3 numeric failure.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qbdi/qbdi.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

/// key=value lines from a config file, turned into "--key=value" arguments. Blank lines
/// and lines starting with '#' are ignored; "[section]" headers are not supported.
std::vector<std::string> config_arguments(const fs::path& path) {
  std::vector<std::string> args;
  std::istringstream in(qbdi::read_text(path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw qbdi::InputError(path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.rfind("--", 0) != 0) key = "--" + key;
    args.push_back(key + "=" + value);
  }
  return args;
}

/// Splices config-file arguments in front of the command-line ones (after the subcommand
/// name) so that explicit flags, parsed later, take precedence.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::optional<fs::path> config;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!config || rest.empty()) return rest;
  auto extra = config_arguments(*config);
  rest.insert(rest.begin() + 1, extra.begin(), extra.end());
  return rest;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
  fs::path p = out;
  p.replace_extension();
  return p.string() + suffix;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Query-based improvisation with a rate-limited VAE channel and VMO information dynamics"};
  app.name("qbdi");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_note;
  app.add_option("--config", config_note, "key=value file; command-line flags take precedence");

  // train
  auto* train = app.add_subcommand("train", "Train a VAE on a directory of MIDI files");
  fs::path train_corpus, train_out, train_loss_out;
  qbdi::TrainOptions topt;
  topt.train.epochs = 100;
  train->add_option("--corpus", train_corpus, "Directory of .mid files")->required();
  train->add_option("--out", train_out, "Model bundle path (JSON)")->required();
  train->add_option("--loss-out", train_loss_out, "Loss curve CSV (default: --out with a .loss.csv extension)");
  train->add_option("--beta", topt.beta, "Weight of the distortion term: loss = R + beta*D")->capture_default_str();
  train->add_option("--epochs", topt.train.epochs)->capture_default_str();
  train->add_option("--batch", topt.train.batch_size)->capture_default_str();
  train->add_option("--lr", topt.train.learning_rate)->capture_default_str();
  train->add_option("--seed", topt.train.seed)->capture_default_str();
  train->add_option("--hidden", topt.hidden)->capture_default_str();
  train->add_option("--latent", topt.latent)->capture_default_str();
  train->add_option("--pitch-lo", topt.range.lo)->capture_default_str();
  train->add_option("--pitch-hi", topt.range.hi)->capture_default_str();

  // sample
  auto* sample = app.add_subcommand("sample", "Decode random prior samples into MIDI");
  fs::path sample_model, sample_out;
  std::size_t sample_bars = 8;
  std::uint64_t sample_seed = 0;
  bool sample_bernoulli = false;
  double sample_tempo = 120.0;
  sample->add_option("--model", sample_model)->required();
  sample->add_option("--bars", sample_bars)->capture_default_str();
  sample->add_option("--seed", sample_seed)->capture_default_str();
  sample->add_option("--out", sample_out)->required();
  sample->add_flag("--bernoulli", sample_bernoulli, "Sample cells instead of thresholding at 0.5");
  sample->add_option("--tempo", sample_tempo)->capture_default_str();

  // query
  auto* query = app.add_subcommand("query", "Re-generate a MIDI query through a bit-rate limited channel");
  fs::path query_model, query_midi, query_out, query_alloc_out, query_dump;
  std::optional<long> query_bits;
  std::uint64_t query_seed = 0;
  std::string query_stats = "marginal";
  double query_tempo = 120.0;
  query->add_option("--model", query_model)->required();
  query->add_option("--midi", query_midi)->required();
  query->add_option("--bits", query_bits, "Bits per frame; omit for full rate");
  query->add_option("--seed", query_seed)->capture_default_str();
  query->add_option("--stats", query_stats, "Channel reference statistics")
      ->check(CLI::IsMember({"marginal", "posterior"}))
      ->capture_default_str();
  query->add_option("--dump-latents", query_dump, "CSV of decoder-side latents, one row per bar");
  query->add_option("--out", query_out)->required();
  query->add_option("--alloc-out", query_alloc_out, "Allocation CSV (default: --out with an .alloc.csv extension)");
  query->add_option("--tempo", query_tempo)->capture_default_str();

  // ir
  auto* ir = app.add_subcommand("ir", "Information Rate, threshold curve and motifs of a MIDI file or latent CSV");
  fs::path ir_in, ir_prefix;
  std::optional<std::string> ir_distance;
  std::string ir_thetas = "auto";
  qbdi::IrOptions iropt;
  ir->add_option("--in", ir_in, "MIDI file (chroma features) or latent CSV")->required();
  ir->add_option("--distance", ir_distance, "tonnetz | cosine | euclidean (default: tonnetz for MIDI, cosine for CSV)")
      ->check(CLI::IsMember({"tonnetz", "cosine", "euclidean"}));
  ir->add_option("--thetas", ir_thetas, "auto | all | comma-separated list")->capture_default_str();
  ir->add_option("--min-len", iropt.min_length)->capture_default_str();
  ir->add_option("--min-occ", iropt.min_occurrences)->capture_default_str();
  ir->add_option("--out-prefix", ir_prefix)->required();

  // rd-report
  auto* rd = app.add_subcommand("rd-report", "Rate, distortion, -ELBO(beta) and the I_e <= R check over a corpus");
  fs::path rd_model, rd_corpus, rd_out;
  std::uint64_t rd_seed = 0;
  std::size_t rd_samples = 16;
  rd->add_option("--model", rd_model)->required();
  rd->add_option("--corpus", rd_corpus)->required();
  rd->add_option("--out", rd_out)->required();
  rd->add_option("--seed", rd_seed)->capture_default_str();
  rd->add_option("--samples", rd_samples, "Monte-Carlo draws per frame for I_e")->capture_default_str();

  // demo-corpus
  auto* demo = app.add_subcommand("demo-corpus", "Write a synthetic chord/melody MIDI corpus");
  fs::path demo_out;
  std::size_t demo_files = 5, demo_bars = 16, demo_patterns = 8;
  std::uint64_t demo_seed = 0;
  demo->add_option("--out", demo_out, "Output directory")->required();
  demo->add_option("--files", demo_files)->capture_default_str();
  demo->add_option("--bars", demo_bars)->capture_default_str();
  demo->add_option("--patterns", demo_patterns)->capture_default_str();
  demo->add_option("--seed", demo_seed)->capture_default_str();

  try {
    auto args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  } catch (const qbdi::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    if (*train) {
      const qbdi::Corpus corpus = qbdi::load_corpus(train_corpus, topt.range);
      print_warnings(corpus.warnings);
      const auto outcome = qbdi::train_bundle(corpus.frames, topt);
      qbdi::save_bundle(train_out, outcome.bundle);
      qbdi::loss_curve_csv(outcome.curve).save(train_loss_out.empty() ? sibling(train_out, ".loss.csv") : train_loss_out);
      std::cout << "trained on " << corpus.frames.size() << " bars from " << corpus.files.size() << " files; final -ELBO("
                << topt.beta << ") = " << outcome.curve.back().neg_elbo_beta << '\n';
    } else if (*sample) {
      const auto bundle = qbdi::load_bundle(sample_model);
      const auto roll = qbdi::sample_bars(bundle, sample_bars, sample_seed,
                                          sample_bernoulli ? qbdi::Binarize::bernoulli : qbdi::Binarize::threshold);
      qbdi::write_bytes(sample_out, qbdi::pianoroll_to_midi(roll, sample_tempo));
    } else if (*query) {
      const auto bundle = qbdi::load_bundle(query_model);
      qbdi::MidiParseStats stats;
      const auto roll = qbdi::parse_midi(qbdi::read_bytes(query_midi), bundle.range, &stats);
      if (stats.dropped_notes) std::cerr << "warning: dropped " << stats.dropped_notes << " notes outside the pitch range\n";
      qbdi::QueryOptions qopt{query_bits, query_seed, qbdi::parse_stats_mode(query_stats)};
      const auto outcome = qbdi::run_query(bundle, roll, qopt);
      qbdi::write_bytes(query_out, qbdi::pianoroll_to_midi(outcome.output, query_tempo));
      if (query_bits) {
        qbdi::allocation_csv(outcome.allocation)
            .save(query_alloc_out.empty() ? sibling(query_out, ".alloc.csv") : query_alloc_out);
      }
      if (!query_dump.empty()) qbdi::latents_csv(outcome.decoder_latents).save(query_dump);
    } else if (*ir) {
      std::vector<qbdi::vmo::Feature> features;
      const auto bytes = qbdi::read_bytes(ir_in);
      const bool is_midi = bytes.size() >= 4 && bytes[0] == 'M' && bytes[1] == 'T' && bytes[2] == 'h' && bytes[3] == 'd';
      if (is_midi) {
        features = qbdi::chroma_features(qbdi::parse_midi(bytes));
      } else {
        features = qbdi::latent_features(
            qbdi::parse_numeric_csv(std::string(bytes.begin(), bytes.end()), ir_in.string()));
      }
      iropt.distance = qbdi::vmo::parse_distance(ir_distance.value_or(is_midi ? "tonnetz" : "cosine"));
      iropt.thetas = qbdi::parse_theta_spec(ir_thetas);
      const auto outcome = qbdi::run_ir(features, iropt);
      const std::string prefix = ir_prefix.string();
      qbdi::ir_profile_csv(outcome.profile).save(prefix + "_ir.csv");
      qbdi::threshold_curve_csv(outcome.search.curve).save(prefix + "_curve.csv");
      qbdi::motifs_csv(outcome.motifs).save(prefix + "_motifs.csv");
      std::cout << "theta* = " << outcome.search.curve.theta_star << ", total IR = " << outcome.profile.total
                << " bits, " << outcome.motifs.size() << " motifs\n";
    } else if (*rd) {
      const auto bundle = qbdi::load_bundle(rd_model);
      const qbdi::Corpus corpus = qbdi::load_corpus(rd_corpus, bundle.range);
      print_warnings(corpus.warnings);
      const auto diag = qbdi::rd_diagnostics(bundle.model, corpus.frames, rd_seed, rd_samples);
      qbdi::rd_report_csv(diag).save(rd_out);
      if (!diag.bound_holds) {
        std::cerr << "warning: I_e estimate " << diag.mutual_information.value << " exceeds rate " << diag.report.rate
                  << " by more than 3 standard errors\n";
      }
    } else if (*demo) {
      const auto bank = qbdi::synthetic::pattern_bank(demo_patterns);
      for (std::size_t f = 0; f < demo_files; ++f) {
        const auto roll = qbdi::synthetic::song(bank, demo_bars, demo_seed + f);
        char name[32];
        std::snprintf(name, sizeof name, "song_%03zu.mid", f);
        qbdi::write_bytes(demo_out / name, qbdi::pianoroll_to_midi(roll));
      }
    }
  } catch (const qbdi::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const qbdi::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return 0;
}
