// Small synthetic chord-and-melody material for demos and tests.
#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "qbdi/pianoroll.hpp"

namespace qbdi::synthetic {

struct Chord {
  int root;   ///< MIDI pitch of the root in the chord octave
  bool minor;
};

/// C, F, G, Am, Dm, Em, Bb, D around middle C.
inline constexpr std::array<Chord, 8> kChords{{
    {48, false}, {53, false}, {55, false}, {57, true}, {50, true}, {52, true}, {58, false}, {50, false},
}};

/// One bar: a sustained triad plus a four-note melody of chord tones an octave up.
/// `variant` picks the melody contour.
inline BarFrame chord_bar(const Chord& chord, int variant, PitchRange range = {}) {
  PianoRoll roll(kStepsPerBar, range);
  const std::array<int, 3> tones{chord.root, chord.root + (chord.minor ? 3 : 4), chord.root + 7};
  auto put = [&](int pitch, std::size_t from, std::size_t to) {
    if (!range.contains(pitch)) return;
    for (std::size_t s = from; s < to; ++s) roll.set(s, static_cast<std::size_t>(pitch - range.lo), true);
  };
  for (int t : tones) put(t, 0, kStepsPerBar);
  static constexpr std::array<std::array<int, 4>, 4> contours{{{0, 1, 2, 1}, {2, 1, 0, 1}, {0, 2, 1, 2}, {1, 1, 2, 0}}};
  const auto& c = contours[static_cast<std::size_t>(variant) % contours.size()];
  for (std::size_t beat = 0; beat < 4; ++beat) {
    put(tones[static_cast<std::size_t>(c[beat])] + 12, beat * 4, beat * 4 + 3);
  }
  return to_frames(roll).front();
}

/// `count` distinct bars cycling through chords and contours.
inline std::vector<BarFrame> pattern_bank(std::size_t count, PitchRange range = {}) {
  std::vector<BarFrame> bank;
  for (std::size_t k = 0; k < count; ++k) {
    bank.push_back(chord_bar(kChords[k % kChords.size()], static_cast<int>(k / kChords.size()), range));
  }
  return bank;
}

/// A song of `bars` bars: a progression drawn from the bank with repeated 4-bar phrases.
inline PianoRoll song(const std::vector<BarFrame>& bank, std::size_t bars, std::uint64_t seed,
                      PitchRange range = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, bank.size() - 1);
  std::array<std::size_t, 4> phrase{};
  for (auto& p : phrase) p = pick(rng);
  std::vector<BarFrame> frames;
  for (std::size_t b = 0; b < bars; ++b) {
    if (b % 8 == 4 && b + 4 <= bars) {
      for (auto& p : phrase) p = pick(rng);  // new phrase every other 4 bars
    }
    frames.push_back(bank[phrase[b % 4]]);
  }
  return frames_to_pianoroll(frames, range);
}

}  // namespace qbdi::synthetic
