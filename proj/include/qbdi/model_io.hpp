// Model bundle persistence: VAE weights, marginal latent statistics and pitch range in a
// versioned JSON document. See docs/model_format.md for the schema.
#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include "json.hpp"

#include "qbdi/errors.hpp"
#include "qbdi/io.hpp"
#include "qbdi/pianoroll.hpp"
#include "qbdi/vae.hpp"

namespace qbdi {

inline constexpr const char* kBundleFormat = "qbdi-model-bundle";
inline constexpr int kBundleVersion = 1;

struct ModelBundle {
  VaeModel model;
  LatentStats marginal;  ///< aggregate-posterior mean/variance over the training corpus
  PitchRange range{};
  int version = kBundleVersion;
};

namespace detail {

inline void append_array(std::string& out, const double* data, Eigen::Index n) {
  out += '[';
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(data[i])) throw NumericError("cannot serialize a non-finite value");
    if (i) out += ',';
    out += format_real(data[i]);
  }
  out += ']';
}

}  // namespace detail

/// Writes the bundle as JSON. Matrices are emitted row-major with 17 significant digits.
inline std::string serialize_bundle(const ModelBundle& b) {
  const auto& d = b.model.dims;
  std::string out = "{\n";
  out += "  \"format\": \"" + std::string(kBundleFormat) + "\",\n";
  out += "  \"version\": " + std::to_string(kBundleVersion) + ",\n";
  out += "  \"pitch_lo\": " + std::to_string(b.range.lo) + ",\n";
  out += "  \"pitch_hi\": " + std::to_string(b.range.hi) + ",\n";
  out += "  \"dims\": {\"input\": " + std::to_string(d.input) + ", \"hidden\": " + std::to_string(d.hidden) +
         ", \"latent\": " + std::to_string(d.latent) + "},\n";
  out += "  \"beta\": " + format_real(b.model.beta) + ",\n";
  out += "  \"weights\": {\n";
  bool first = true;
  b.model.params.for_each([&](const char* name, const auto& a) {
    if (!first) out += ",\n";
    first = false;
    const Eigen::Index rows = a.rows();
    const Eigen::Index cols = a.cols();
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major = a;
    out += "    \"" + std::string(name) + "\": {\"rows\": " + std::to_string(rows) +
           ", \"cols\": " + std::to_string(cols) + ", \"data\": ";
    detail::append_array(out, row_major.data(), row_major.size());
    out += '}';
  });
  out += "\n  },\n";
  out += "  \"marginal\": {\"mean\": ";
  detail::append_array(out, b.marginal.mean.data(), b.marginal.mean.size());
  out += ", \"variance\": ";
  detail::append_array(out, b.marginal.variance.data(), b.marginal.variance.size());
  out += "}\n}\n";
  return out;
}

inline ModelBundle deserialize_bundle(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("model bundle is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kBundleFormat) throw InputError("not a qbdi model bundle");
    const int version = j.at("version").get<int>();
    if (version != kBundleVersion) {
      throw InputError("unsupported model bundle version " + std::to_string(version) + " (this build reads " +
                       std::to_string(kBundleVersion) + ")");
    }
    ModelBundle b;
    b.version = version;
    b.range = PitchRange{j.at("pitch_lo").get<int>(), j.at("pitch_hi").get<int>()};
    if (!b.range.valid()) throw InputError("model bundle has an invalid pitch range");
    const auto& dims = j.at("dims");
    b.model.dims = VaeDims{dims.at("input").get<std::size_t>(), dims.at("hidden").get<std::size_t>(),
                           dims.at("latent").get<std::size_t>()};
    detail::check_positive_dims(b.model.dims);
    if (b.model.dims.input != kStepsPerBar * b.range.count()) {
      throw InputError("model input size does not match its pitch range");
    }
    b.model.beta = j.at("beta").get<double>();
    detail::check_beta(b.model.beta);
    b.model.params = VaeParams::zeros(b.model.dims);
    const auto& weights = j.at("weights");
    b.model.params.for_each([&](const char* name, auto& a) {
      const auto& w = weights.at(name);
      const auto rows = w.at("rows").get<Eigen::Index>();
      const auto cols = w.at("cols").get<Eigen::Index>();
      const auto data = w.at("data").get<std::vector<double>>();
      if (rows != a.rows() || cols != a.cols() || static_cast<Eigen::Index>(data.size()) != a.size()) {
        throw InputError(std::string("weight array '") + name + "' has the wrong shape");
      }
      for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) a(r, c) = data[static_cast<std::size_t>(r * cols + c)];
    });
    const auto mean = j.at("marginal").at("mean").get<std::vector<double>>();
    const auto var = j.at("marginal").at("variance").get<std::vector<double>>();
    if (mean.size() != b.model.dims.latent || var.size() != b.model.dims.latent) {
      throw InputError("marginal statistics length does not match latent size");
    }
    b.marginal.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    b.marginal.variance = Eigen::Map<const Eigen::VectorXd>(var.data(), static_cast<Eigen::Index>(var.size()));
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed model bundle: ") + e.what());
  }
}

inline void save_bundle(const std::filesystem::path& path, const ModelBundle& b) {
  write_bytes(path, serialize_bundle(b));
}

inline ModelBundle load_bundle(const std::filesystem::path& path) {
  return deserialize_bundle(read_text(path));
}

}  // namespace qbdi
