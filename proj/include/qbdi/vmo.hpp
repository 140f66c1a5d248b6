// Variable Markov Oracle: a factor oracle over a metric space.
//
// Symbol equality of the classical factor oracle is replaced by "distance <= theta".
// All transitions entering state j carry frame j as their label, so a transition is
// stored as its target state only. Information Rate is estimated from a Compror parse
// of the oracle (literals vs. repeated blocks), and motifs are read off suffix-link
// threads.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qbdi/errors.hpp"
#include "qbdi/pianoroll.hpp"

namespace qbdi::vmo {

using Feature = std::vector<double>;
using DistanceFn = std::function<double(const Feature&, const Feature&)>;

enum class Distance { tonnetz, cosine, euclidean };

inline std::string_view to_string(Distance d) {
  switch (d) {
    case Distance::tonnetz: return "tonnetz";
    case Distance::cosine: return "cosine";
    case Distance::euclidean: return "euclidean";
  }
  return "?";
}

inline Distance parse_distance(std::string_view name) {
  if (name == "tonnetz") return Distance::tonnetz;
  if (name == "cosine") return Distance::cosine;
  if (name == "euclidean") return Distance::euclidean;
  throw InputError("unknown distance '" + std::string(name) + "' (expected tonnetz, cosine or euclidean)");
}

/// 1 - cos(angle). A zero vector is maximally direction-free: distance 1.
inline double cosine_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw InputError("cosine_distance: length mismatch");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 1.0;
  const double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::clamp(1.0 - c, 0.0, 2.0);
}

inline double euclidean_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw InputError("euclidean_distance: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += (u[i] - v[i]) * (u[i] - v[i]);
  return std::sqrt(s);
}

/// Tonnetz distance between 12-bin chroma features.
inline double chroma_tonnetz_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != 12 || v.size() != 12) throw InputError("tonnetz distance needs 12-bin chroma features");
  ChromaVector a{}, b{};
  std::copy(u.begin(), u.end(), a.begin());
  std::copy(v.begin(), v.end(), b.begin());
  return tonnetz_distance(a, b);
}

inline DistanceFn distance_function(Distance d) {
  switch (d) {
    case Distance::tonnetz: return [](const Feature& a, const Feature& b) { return chroma_tonnetz_distance(a, b); };
    case Distance::cosine: return [](const Feature& a, const Feature& b) { return cosine_distance(a, b); };
    case Distance::euclidean: return [](const Feature& a, const Feature& b) { return euclidean_distance(a, b); };
  }
  throw InputError("unknown distance id");
}

struct Oracle {
  std::size_t n = 0;                          ///< frame count; states are 0..n
  std::vector<std::vector<int>> transitions;  ///< per state, targets in creation order
  std::vector<int> sfx;                       ///< suffix link; sfx[0] = -1
  std::vector<int> lrs;                       ///< longest repeated suffix length
  double theta = 0.0;
  std::string distance_id;
};

/// Online construction. For each new frame i the suffix chain from state i-1 is walked;
/// states without a theta-similar outgoing transition get a transition to i. The first
/// state that has one provides the suffix link (minimum-distance target, earliest on ties).
template <class Dist>
Oracle build_oracle(std::span<const Feature> frames, Dist&& distance, double theta,
                    std::string distance_id = "custom") {
  if (frames.empty()) throw InputError("build_oracle: need at least one frame");
  if (!(theta >= 0.0)) throw InputError("build_oracle: theta must be >= 0");
  Oracle o;
  o.n = frames.size();
  o.theta = theta;
  o.distance_id = std::move(distance_id);
  o.transitions.assign(o.n + 1, {});
  o.sfx.assign(o.n + 1, 0);
  o.lrs.assign(o.n + 1, 0);
  o.sfx[0] = -1;

  // Frame labelling the transitions into state s.
  auto label = [&](int s) -> const Feature& { return frames[static_cast<std::size_t>(s - 1)]; };

  // Lefebvre-Lecroq common-suffix length between the prefixes ending at p1 and p2.
  auto common_suffix = [&](int p1, int p2) {
    if (p2 == o.sfx[static_cast<std::size_t>(p1)]) return o.lrs[static_cast<std::size_t>(p1)];
    while (p2 > 0 && o.sfx[static_cast<std::size_t>(p2)] != o.sfx[static_cast<std::size_t>(p1)]) {
      p2 = o.sfx[static_cast<std::size_t>(p2)];
    }
    return std::min(o.lrs[static_cast<std::size_t>(p1)], o.lrs[static_cast<std::size_t>(p2)]);
  };

  for (int i = 1; i <= static_cast<int>(o.n); ++i) {
    const Feature& x = label(i);
    o.transitions[static_cast<std::size_t>(i - 1)].push_back(i);
    int k = o.sfx[static_cast<std::size_t>(i - 1)];
    int pi = i - 1;
    int match = -1;
    while (k >= 0) {
      double best = std::numeric_limits<double>::infinity();
      for (int target : o.transitions[static_cast<std::size_t>(k)]) {
        const double d = distance(label(target), x);
        if (d <= theta && d < best) {
          best = d;
          match = target;
        }
      }
      if (match >= 0) break;
      o.transitions[static_cast<std::size_t>(k)].push_back(i);
      pi = k;
      k = o.sfx[static_cast<std::size_t>(k)];
    }
    if (match < 0) {
      o.sfx[static_cast<std::size_t>(i)] = 0;
      o.lrs[static_cast<std::size_t>(i)] = 0;
    } else {
      o.sfx[static_cast<std::size_t>(i)] = match;
      o.lrs[static_cast<std::size_t>(i)] = common_suffix(pi, match - 1) + 1;
    }
  }
  return o;
}

inline Oracle build_oracle(std::span<const Feature> frames, Distance distance, double theta) {
  return build_oracle(frames, distance_function(distance), theta, std::string(to_string(distance)));
}

/// One element of the Compror parse: a literal (length 1, new frame) or a block of
/// `length` frames repeating the factor that ends at `pointer + length - 1`.
struct ParseElement {
  std::size_t start = 0;  ///< first position covered (1-based)
  std::size_t length = 1;
  bool literal = true;
  int pointer = 0;        ///< start state of the earlier occurrence (blocks only)
};

/// Greedy left-to-right parse: a block extends while the repeated suffix at the next
/// position still covers the whole block.
inline std::vector<ParseElement> compror_parse(const Oracle& o) {
  std::vector<ParseElement> parse;
  std::size_t j = 0;
  while (j < o.n) {
    std::size_t i = j;
    while (i < o.n && o.lrs[i + 1] >= static_cast<int>(i - j + 1)) ++i;
    if (i == j) {
      parse.push_back({j + 1, 1, true, 0});
      j = j + 1;
    } else {
      const auto len = i - j;
      parse.push_back({j + 1, len, false, o.sfx[i] - static_cast<int>(len) + 1});
      j = i;
    }
  }
  return parse;
}

struct IRProfile {
  std::vector<double> per_frame;  ///< IR at positions 1..n (index 0 = position 1), bits
  double total = 0.0;
  double theta = 0.0;
};

/// Code-length Information Rate of the Compror parse. For a frame at position p:
///   H0(p) = log2(literals so far)        cost against the alphabet of new frames
///   H1(p) = log2(codewords so far) / L   its block's codeword amortized over L frames
///   IR(p) = max(0, H0(p) - H1(p))
/// where "so far" counts up to and including p's own codeword. A one-symbol alphabet
/// has H0 = 0, so a constant sequence scores 0.
inline IRProfile ir_of_oracle(const Oracle& o) {
  IRProfile ir;
  ir.theta = o.theta;
  ir.per_frame.assign(o.n, 0.0);
  std::size_t literals = 0, codewords = 0;
  for (const ParseElement& e : compror_parse(o)) {
    ++codewords;
    if (e.literal) ++literals;
    const double h0 = std::log2(static_cast<double>(literals));
    const double h1 = std::log2(static_cast<double>(codewords)) / static_cast<double>(e.length);
    const double value = std::max(0.0, h0 - h1);
    for (std::size_t p = e.start; p < e.start + e.length; ++p) ir.per_frame[p - 1] = value;
  }
  ir.total = std::accumulate(ir.per_frame.begin(), ir.per_frame.end(), 0.0);
  return ir;
}

struct ThresholdCurve {
  std::vector<std::pair<double, double>> points;  ///< (theta, total IR), ascending theta
  double theta_star = 0.0;
};

enum class ThetaGridKind { automatic, exhaustive };

inline constexpr std::size_t kAutoGridSize = 32;
inline constexpr std::size_t kQuantileSubsample = 500;

/// Sorted pairwise distances, over an evenly strided subsample of at most `max_frames`.
template <class Dist>
std::vector<double> pairwise_distances(std::span<const Feature> frames, Dist&& distance,
                                       std::size_t max_frames = std::numeric_limits<std::size_t>::max()) {
  std::vector<std::size_t> picked;
  if (frames.size() <= max_frames) {
    picked.resize(frames.size());
    std::iota(picked.begin(), picked.end(), std::size_t{0});
  } else {
    for (std::size_t k = 0; k < max_frames; ++k) picked.push_back(k * frames.size() / max_frames);
  }
  std::vector<double> d;
  d.reserve(picked.size() * (picked.size() - 1) / 2);
  for (std::size_t a = 0; a < picked.size(); ++a)
    for (std::size_t b = a + 1; b < picked.size(); ++b) d.push_back(distance(frames[picked[a]], frames[picked[b]]));
  std::sort(d.begin(), d.end());
  return d;
}

/// Candidate thresholds. "automatic": 32 evenly spaced quantiles (linear interpolation,
/// from the minimum to the maximum) of the pairwise distances of at most 500 frames.
/// "exhaustive": every distinct pairwise distance. Always deduplicated and ascending; a
/// single frame yields {0}.
template <class Dist>
std::vector<double> theta_grid(std::span<const Feature> frames, Dist&& distance, ThetaGridKind kind) {
  std::vector<double> grid;
  if (kind == ThetaGridKind::exhaustive) {
    grid = pairwise_distances(frames, distance);
  } else {
    const auto d = pairwise_distances(frames, distance, kQuantileSubsample);
    if (!d.empty()) {
      for (std::size_t q = 0; q < kAutoGridSize; ++q) {
        const double pos = static_cast<double>(q) * static_cast<double>(d.size() - 1) /
                           static_cast<double>(kAutoGridSize - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, d.size() - 1);
        grid.push_back(d[lo] + (pos - static_cast<double>(lo)) * (d[hi] - d[lo]));
      }
    }
  }
  if (grid.empty()) grid.push_back(0.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

struct ThresholdSearch {
  ThresholdCurve curve;
  Oracle oracle;  ///< built at theta_star
};

/// Builds one oracle per candidate theta and keeps the one with the largest total IR
/// (smallest theta on ties).
template <class Dist>
ThresholdSearch threshold_search(std::span<const Feature> frames, Dist&& distance,
                                 std::vector<double> thetas, std::string distance_id = "custom") {
  if (frames.empty()) throw InputError("threshold_search: need at least one frame");
  if (thetas.empty()) throw InputError("threshold_search: empty threshold list");
  std::sort(thetas.begin(), thetas.end());
  ThresholdSearch out;
  double best = -1.0;
  for (double theta : thetas) {
    Oracle o = build_oracle(frames, distance, theta, distance_id);
    const double total = ir_of_oracle(o).total;
    out.curve.points.emplace_back(theta, total);
    if (total > best) {
      best = total;
      out.curve.theta_star = theta;
      out.oracle = std::move(o);
    }
  }
  return out;
}

inline ThresholdSearch threshold_search(std::span<const Feature> frames, Distance distance,
                                        std::vector<double> thetas) {
  return threshold_search(frames, distance_function(distance), std::move(thetas),
                          std::string(to_string(distance)));
}

inline ThresholdSearch threshold_search(std::span<const Feature> frames, Distance distance,
                                        ThetaGridKind kind = ThetaGridKind::automatic) {
  const DistanceFn fn = distance_function(distance);
  return threshold_search(frames, fn, theta_grid(frames, fn, kind), std::string(to_string(distance)));
}

struct Motif {
  std::size_t length = 0;
  std::vector<std::size_t> occurrences;  ///< end positions, 1-based, ascending
};

/// Repeated patterns read from suffix links. Every state k with lrs[k] >= min_length joins
/// k and sfx[k] into one cluster; a cluster's pattern length is the smallest such lrs in it
/// and its occurrences are all member states. Clusters with fewer than min_occurrences
/// members are dropped, as is any motif whose occurrence spans all lie inside the spans of
/// a longer motif (equal spans keep the earlier first occurrence).
inline std::vector<Motif> find_motifs(const Oracle& o, std::size_t min_length, std::size_t min_occurrences) {
  if (min_length < 1) throw InputError("find_motifs: min_length must be >= 1");
  if (min_occurrences < 2) throw InputError("find_motifs: min_occurrences must be >= 2");
  const std::size_t states = o.n + 1;
  std::vector<std::size_t> parent(states);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<char> member(states, 0);
  for (std::size_t k = 1; k < states; ++k) {
    const int s = o.sfx[k];
    if (s <= 0 || o.lrs[k] < static_cast<int>(min_length)) continue;
    member[k] = member[static_cast<std::size_t>(s)] = 1;
    parent[find(k)] = find(static_cast<std::size_t>(s));
  }
  std::vector<std::size_t> length(states, std::numeric_limits<std::size_t>::max());
  for (std::size_t k = 1; k < states; ++k) {
    const int s = o.sfx[k];
    if (s <= 0 || o.lrs[k] < static_cast<int>(min_length)) continue;
    auto& len = length[find(k)];
    len = std::min(len, static_cast<std::size_t>(o.lrs[k]));
  }
  std::vector<Motif> motifs;
  std::vector<std::size_t> slot(states, std::numeric_limits<std::size_t>::max());
  for (std::size_t k = 1; k < states; ++k) {
    if (!member[k]) continue;
    const std::size_t root = find(k);
    if (slot[root] == std::numeric_limits<std::size_t>::max()) {
      slot[root] = motifs.size();
      motifs.push_back({length[root], {}});
    }
    motifs[slot[root]].occurrences.push_back(k);
  }
  std::erase_if(motifs, [&](const Motif& m) { return m.occurrences.size() < min_occurrences; });

  // span [end - length + 1, end] of every occurrence of `inner` inside some span of `outer`
  auto contained = [](const Motif& inner, const Motif& outer) {
    for (std::size_t e : inner.occurrences) {
      const std::size_t b = e + 1 - inner.length;
      const bool inside = std::any_of(outer.occurrences.begin(), outer.occurrences.end(), [&](std::size_t f) {
        return f + 1 <= b + outer.length && e <= f;
      });
      if (!inside) return false;
    }
    return true;
  };
  std::vector<char> drop(motifs.size(), 0);
  for (std::size_t a = 0; a < motifs.size(); ++a) {
    for (std::size_t b = 0; b < motifs.size() && !drop[a]; ++b) {
      if (a == b || drop[b]) continue;
      const Motif& ma = motifs[a];
      const Motif& mb = motifs[b];
      const bool longer = mb.length > ma.length;
      const bool tie = mb.length == ma.length && mb.occurrences.front() < ma.occurrences.front();
      if ((longer || tie) && contained(ma, mb)) drop[a] = 1;
    }
  }
  std::vector<Motif> kept;
  for (std::size_t a = 0; a < motifs.size(); ++a)
    if (!drop[a]) kept.push_back(std::move(motifs[a]));
  std::sort(kept.begin(), kept.end(), [](const Motif& x, const Motif& y) {
    return x.occurrences.front() < y.occurrences.front();
  });
  return kept;
}

}  // namespace qbdi::vmo
