// Binary piano-roll surface, bar framing and harmonic features (chroma, Tonnetz).
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "qbdi/errors.hpp"

namespace qbdi {

/// Number of 16th-note steps in one 4/4 bar.
inline constexpr std::size_t kStepsPerBar = 16;

/// Inclusive MIDI pitch interval covered by a piano roll.
struct PitchRange {
  int lo = 24;
  int hi = 101;

  constexpr std::size_t count() const noexcept {
    return static_cast<std::size_t>(hi - lo + 1);
  }
  constexpr bool contains(int pitch) const noexcept {
    return pitch >= lo && pitch <= hi;
  }
  constexpr bool valid() const noexcept {
    return lo >= 0 && hi <= 127 && lo < hi;
  }
  friend constexpr bool operator==(const PitchRange&, const PitchRange&) = default;
};

/// Binary step x pitch grid at 16th-note resolution. Cell = 1 while a note sounds.
class PianoRoll {
 public:
  PianoRoll() = default;
  PianoRoll(std::size_t steps, PitchRange range) : steps_(steps), range_(range) {
    if (!range.valid()) {
      throw InputError("invalid pitch range [" + std::to_string(range.lo) + ", " +
                       std::to_string(range.hi) + "]");
    }
    cells_.assign(steps * range.count(), 0);
  }

  std::size_t steps() const noexcept { return steps_; }
  const PitchRange& range() const noexcept { return range_; }
  std::size_t pitch_count() const noexcept { return range_.count(); }

  /// Access by step and pitch index (0 = range().lo).
  std::uint8_t at(std::size_t step, std::size_t pitch_index) const {
    return cells_[step * pitch_count() + pitch_index];
  }
  void set(std::size_t step, std::size_t pitch_index, bool on) {
    cells_[step * pitch_count() + pitch_index] = on ? 1 : 0;
  }

  std::span<const std::uint8_t> cells() const noexcept { return cells_; }
  std::span<std::uint8_t> cells() noexcept { return cells_; }

  /// Grows or shrinks the step count; new steps are silent.
  void resize_steps(std::size_t steps) {
    cells_.resize(steps * pitch_count(), 0);
    steps_ = steps;
  }

  friend bool operator==(const PianoRoll&, const PianoRoll&) = default;

 private:
  std::size_t steps_ = 0;
  PitchRange range_{};
  std::vector<std::uint8_t> cells_;
};

/// One bar: 16 consecutive steps flattened time-major (step 0 pitches, step 1 pitches, ...).
struct BarFrame {
  PitchRange range{};
  std::vector<std::uint8_t> values;

  std::size_t pitch_count() const noexcept { return range.count(); }
  friend bool operator==(const BarFrame&, const BarFrame&) = default;
};

/// Splits a roll into non-overlapping bars. A trailing partial bar is dropped.
inline std::vector<BarFrame> to_frames(const PianoRoll& roll) {
  const std::size_t width = kStepsPerBar * roll.pitch_count();
  const std::size_t bars = roll.steps() / kStepsPerBar;
  std::vector<BarFrame> frames;
  frames.reserve(bars);
  auto cells = roll.cells();
  for (std::size_t b = 0; b < bars; ++b) {
    auto first = cells.begin() + static_cast<std::ptrdiff_t>(b * width);
    frames.push_back(BarFrame{roll.range(), {first, first + static_cast<std::ptrdiff_t>(width)}});
  }
  return frames;
}

/// Concatenates bars back into a roll. All frames must match the given pitch range.
inline PianoRoll frames_to_pianoroll(std::span<const BarFrame> frames, PitchRange range = {}) {
  PianoRoll roll(frames.size() * kStepsPerBar, range);
  const std::size_t width = kStepsPerBar * range.count();
  auto out = roll.cells();
  for (std::size_t b = 0; b < frames.size(); ++b) {
    if (frames[b].values.size() != width) {
      throw InputError("frame " + std::to_string(b) + " has length " +
                       std::to_string(frames[b].values.size()) + ", expected " +
                       std::to_string(width));
    }
    for (std::size_t i = 0; i < width; ++i) out[b * width + i] = frames[b].values[i] ? 1 : 0;
  }
  return roll;
}

/// 12-bin pitch-class mass; index 0 = C.
using ChromaVector = std::array<double, 12>;

/// (sin, cos) pairs on the circles of fifths, minor thirds and major thirds.
using TonnetzVector = std::array<double, 6>;

/// L1-normalizes a chroma vector. The all-zero vector is returned unchanged.
inline ChromaVector normalize(const ChromaVector& c) {
  double total = 0.0;
  for (double v : c) total += v;
  if (total <= 0.0) return ChromaVector{};
  ChromaVector out{};
  for (std::size_t i = 0; i < 12; ++i) out[i] = c[i] / total;
  return out;
}

/// Pitch-class histogram of a bar, counting one unit per active cell, L1-normalized.
inline ChromaVector chroma(const BarFrame& frame) {
  ChromaVector mass{};
  const std::size_t pitches = frame.pitch_count();
  for (std::size_t i = 0; i < frame.values.size(); ++i) {
    if (!frame.values[i]) continue;
    const int pitch = frame.range.lo + static_cast<int>(i % pitches);
    mass[static_cast<std::size_t>(pitch % 12)] += 1.0;
  }
  return normalize(mass);
}

/// Circle radii and angular step (radians per semitone) of the tonal-centroid projection.
struct TonnetzCircle {
  double radius;
  double step;
};

inline constexpr std::array<TonnetzCircle, 3> kTonnetzCircles{{
    {1.0, 7.0 * std::numbers::pi / 6.0},  // fifths
    {1.0, 3.0 * std::numbers::pi / 2.0},  // minor thirds
    {0.5, 2.0 * std::numbers::pi / 3.0},  // major thirds
}};

/// Projects chroma mass onto the 6-D Tonnetz. The input is used as given (no normalization).
inline TonnetzVector tonnetz(const ChromaVector& c) {
  TonnetzVector out{};
  for (std::size_t p = 0; p < 12; ++p) {
    if (c[p] == 0.0) continue;
    for (std::size_t k = 0; k < kTonnetzCircles.size(); ++k) {
      const double angle = static_cast<double>(p) * kTonnetzCircles[k].step;
      out[2 * k] += c[p] * kTonnetzCircles[k].radius * std::sin(angle);
      out[2 * k + 1] += c[p] * kTonnetzCircles[k].radius * std::cos(angle);
    }
  }
  return out;
}

/// Euclidean distance between the Tonnetz projections of the L1-normalized chroma vectors.
/// A zero chroma projects to the origin.
inline double tonnetz_distance(const ChromaVector& a, const ChromaVector& b) {
  const TonnetzVector ta = tonnetz(normalize(a));
  const TonnetzVector tb = tonnetz(normalize(b));
  double sum = 0.0;
  for (std::size_t i = 0; i < 6; ++i) sum += (ta[i] - tb[i]) * (ta[i] - tb[i]);
  return std::sqrt(sum);
}

}  // namespace qbdi
