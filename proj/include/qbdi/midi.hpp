// Standard MIDI file (format 0/1) reading into piano rolls, and writing back out.
//
// The grid is metrical: one step is a quarter of the file's ticks-per-quarter
// division, so tempo changes do not move notes between steps. The tempo only
// matters when writing (it is stored as a meta event for playback).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "qbdi/errors.hpp"
#include "qbdi/pianoroll.hpp"

namespace qbdi {

struct MidiParseStats {
  std::size_t dropped_notes = 0;  ///< notes outside the pitch range
  std::size_t note_count = 0;     ///< notes written into the roll
  int ticks_per_quarter = 0;
  double tempo_bpm = 120.0;       ///< first tempo event, or the 120 BPM default
};

namespace detail {

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  bool done() const noexcept { return pos_ >= bytes_.size(); }

  [[noreturn]] void fail(const std::string& what) const { throw MidiParseError(what, pos_); }

  std::uint8_t u8() {
    if (done()) fail("unexpected end of data");
    return bytes_[pos_++];
  }
  std::uint8_t peek() const {
    if (done()) fail("unexpected end of data");
    return bytes_[pos_];
  }
  std::uint16_t u16() {
    const std::uint16_t hi = u8();
    return static_cast<std::uint16_t>((hi << 8) | u8());
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | u8();
    return v;
  }
  /// Variable-length quantity, at most 4 bytes.
  std::uint32_t vlq() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      const std::uint8_t b = u8();
      v = (v << 7) | (b & 0x7F);
      if (!(b & 0x80)) return v;
    }
    fail("variable-length quantity longer than 4 bytes");
  }
  std::string tag() {
    std::string t;
    for (int i = 0; i < 4; ++i) t.push_back(static_cast<char>(u8()));
    return t;
  }
  void skip(std::size_t n) {
    if (n > remaining()) fail("chunk or event runs past end of data");
    pos_ += n;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

struct TickNote {
  std::uint64_t on;
  std::uint64_t off;
  int pitch;
};

/// Nearest 16th-note step for a tick; exact halves round down.
inline std::uint64_t quantize_tick(std::uint64_t tick, std::uint64_t ticks_per_quarter) {
  // step = ceil(4*tick/tpq - 1/2) = ceil((8*tick - tpq) / (2*tpq))
  const std::uint64_t num = 8 * tick;
  if (num <= ticks_per_quarter) return 0;
  const std::uint64_t a = num - ticks_per_quarter;
  const std::uint64_t b = 2 * ticks_per_quarter;
  return (a + b - 1) / b;
}

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}
inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>((v >> s) & 0xFF));
}
inline void put_vlq(std::vector<std::uint8_t>& out, std::uint32_t v) {
  std::uint8_t buf[5];
  int n = 0;
  buf[n++] = static_cast<std::uint8_t>(v & 0x7F);
  while ((v >>= 7) != 0) buf[n++] = static_cast<std::uint8_t>((v & 0x7F) | 0x80);
  while (n > 0) out.push_back(buf[--n]);
}

}  // namespace detail

/// Decodes a standard MIDI file into a binary roll. Notes are snapped to the nearest step;
/// a note spanning k steps sets k cells (minimum one). The roll lasts until the last event.
inline PianoRoll parse_midi(std::span<const std::uint8_t> bytes, PitchRange range = {},
                            MidiParseStats* stats = nullptr) {
  detail::ByteReader in(bytes);
  if (in.remaining() < 14) in.fail("file too short for a MIDI header");
  if (in.tag() != "MThd") in.fail("missing MThd header");
  const std::uint32_t header_len = in.u32();
  if (header_len < 6) in.fail("MThd chunk shorter than 6 bytes");
  const std::size_t header_start = in.offset();
  const std::uint16_t format = in.u16();
  const std::uint16_t ntracks = in.u16();
  const std::size_t division_offset = in.offset();
  const std::uint16_t division = in.u16();
  if (format > 1) throw MidiParseError("unsupported MIDI format " + std::to_string(format), header_start);
  if (division & 0x8000) throw MidiParseError("SMPTE time division is not supported", division_offset);
  if (division == 0) throw MidiParseError("ticks-per-quarter division is zero", division_offset);
  in.skip(header_len - 6);

  MidiParseStats local;
  local.ticks_per_quarter = division;
  bool tempo_seen = false;

  std::vector<detail::TickNote> notes;
  std::uint64_t end_tick = 0;
  std::size_t tracks_read = 0;

  while (!in.done() && tracks_read < ntracks) {
    const std::size_t chunk_offset = in.offset();
    if (in.remaining() < 8) in.fail("truncated chunk header");
    const std::string tag = in.tag();
    const std::uint32_t len = in.u32();
    if (len > in.remaining()) throw MidiParseError("chunk '" + tag + "' runs past end of data", chunk_offset);
    if (tag != "MTrk") {
      in.skip(len);
      continue;
    }
    const std::size_t track_end = in.offset() + len;
    ++tracks_read;

    std::uint64_t tick = 0;
    std::uint8_t running = 0;
    std::map<std::pair<int, int>, std::uint64_t> active;  // (channel, pitch) -> onset tick

    auto close = [&](int channel, int pitch, std::uint64_t at) {
      auto it = active.find({channel, pitch});
      if (it == active.end()) return;
      notes.push_back({it->second, at, pitch});
      active.erase(it);
    };

    bool end_of_track = false;
    while (in.offset() < track_end && !end_of_track) {
      tick += in.vlq();
      std::uint8_t status = in.peek();
      if (status & 0x80) {
        in.u8();
      } else {
        if (running == 0) in.fail("data byte without running status");
        status = running;
      }

      if (status == 0xFF) {
        const std::uint8_t type = in.u8();
        const std::uint32_t mlen = in.vlq();
        if (type == 0x51 && mlen == 3) {
          std::uint32_t usec = 0;
          for (int i = 0; i < 3; ++i) usec = (usec << 8) | in.u8();
          if (!tempo_seen && usec > 0) {
            local.tempo_bpm = 60'000'000.0 / usec;
            tempo_seen = true;
          }
        } else {
          in.skip(mlen);
        }
        if (type == 0x2F) end_of_track = true;
        running = 0;
      } else if (status == 0xF0 || status == 0xF7) {
        in.skip(in.vlq());
        running = 0;
      } else if (status >= 0xF0) {
        in.fail("unexpected system message in track");
      } else {
        running = status;
        const int kind = status & 0xF0;
        const int channel = status & 0x0F;
        const std::uint8_t d1 = in.u8();
        const bool two_data = kind != 0xC0 && kind != 0xD0;
        const std::uint8_t d2 = two_data ? in.u8() : 0;
        if ((d1 | d2) & 0x80) in.fail("data byte with high bit set");
        if (kind == 0x90 && d2 > 0) {
          close(channel, d1, tick);
          active[{channel, d1}] = tick;
        } else if (kind == 0x80 || kind == 0x90) {
          close(channel, d1, tick);
        }
      }
    }
    if (in.offset() > track_end) in.fail("event runs past end of track chunk");
    in.skip(track_end - in.offset());
    end_tick = std::max(end_tick, tick);
    for (auto it = active.begin(); it != active.end();) {
      const auto [channel, pitch] = it->first;
      ++it;
      close(channel, pitch, tick);
    }
  }
  if (tracks_read < ntracks) in.fail("expected " + std::to_string(ntracks) + " tracks, found " +
                                     std::to_string(tracks_read));

  std::uint64_t steps = detail::quantize_tick(end_tick, division);
  struct StepNote {
    std::uint64_t begin, end;
    int pitch;
  };
  std::vector<StepNote> placed;
  for (const auto& n : notes) {
    if (!range.contains(n.pitch)) {
      ++local.dropped_notes;
      continue;
    }
    const std::uint64_t begin = detail::quantize_tick(n.on, division);
    const std::uint64_t end = std::max(begin + 1, detail::quantize_tick(n.off, division));
    placed.push_back({begin, end, n.pitch});
    steps = std::max(steps, end);
  }

  PianoRoll roll(static_cast<std::size_t>(steps), range);
  for (const auto& n : placed) {
    for (std::uint64_t s = n.begin; s < n.end; ++s) {
      roll.set(static_cast<std::size_t>(s), static_cast<std::size_t>(n.pitch - range.lo), true);
    }
  }
  local.note_count = placed.size();
  if (stats) *stats = local;
  return roll;
}

inline PianoRoll parse_midi(std::span<const char> bytes, PitchRange range = {},
                            MidiParseStats* stats = nullptr) {
  return parse_midi(std::span<const std::uint8_t>(
                        reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()),
                    range, stats);
}

inline constexpr int kWriteTicksPerQuarter = 480;
inline constexpr std::uint8_t kWriteVelocity = 100;

/// Encodes a roll as a format-0 MIDI file on channel 0. Each maximal run of active
/// cells in a pitch column becomes one note.
inline std::vector<std::uint8_t> pianoroll_to_midi(const PianoRoll& roll, double tempo_bpm = 120.0) {
  if (!(tempo_bpm > 0.0) || !std::isfinite(tempo_bpm)) {
    throw InputError("tempo must be positive, got " + std::to_string(tempo_bpm));
  }
  constexpr std::uint32_t kTicksPerStep = kWriteTicksPerQuarter / 4;

  // (tick, 0 = off / 1 = on, pitch): offs sort before ons at the same tick.
  std::vector<std::tuple<std::uint64_t, int, int>> events;
  const std::size_t pitches = roll.pitch_count();
  for (std::size_t p = 0; p < pitches; ++p) {
    const int pitch = roll.range().lo + static_cast<int>(p);
    std::size_t s = 0;
    while (s < roll.steps()) {
      if (!roll.at(s, p)) {
        ++s;
        continue;
      }
      const std::size_t begin = s;
      while (s < roll.steps() && roll.at(s, p)) ++s;
      events.emplace_back(begin * kTicksPerStep, 1, pitch);
      events.emplace_back(s * kTicksPerStep, 0, pitch);
    }
  }
  std::sort(events.begin(), events.end());

  std::vector<std::uint8_t> track;
  const auto usec = static_cast<std::uint32_t>(
      std::clamp(std::lround(60'000'000.0 / tempo_bpm), 1L, 0xFFFFFFL));
  detail::put_vlq(track, 0);
  track.insert(track.end(), {0xFF, 0x51, 0x03, static_cast<std::uint8_t>(usec >> 16),
                             static_cast<std::uint8_t>((usec >> 8) & 0xFF),
                             static_cast<std::uint8_t>(usec & 0xFF)});
  detail::put_vlq(track, 0);
  track.insert(track.end(), {0xFF, 0x58, 0x04, 0x04, 0x02, 0x18, 0x08});

  std::uint64_t now = 0;
  for (const auto& [tick, on, pitch] : events) {
    detail::put_vlq(track, static_cast<std::uint32_t>(tick - now));
    now = tick;
    track.push_back(on ? 0x90 : 0x80);
    track.push_back(static_cast<std::uint8_t>(pitch));
    track.push_back(on ? kWriteVelocity : 0);
  }
  const std::uint64_t end = roll.steps() * kTicksPerStep;
  detail::put_vlq(track, static_cast<std::uint32_t>(end - now));
  track.insert(track.end(), {0xFF, 0x2F, 0x00});

  std::vector<std::uint8_t> out{'M', 'T', 'h', 'd'};
  detail::put_u32(out, 6);
  detail::put_u16(out, 0);
  detail::put_u16(out, 1);
  detail::put_u16(out, kWriteTicksPerQuarter);
  out.insert(out.end(), {'M', 'T', 'r', 'k'});
  detail::put_u32(out, static_cast<std::uint32_t>(track.size()));
  out.insert(out.end(), track.begin(), track.end());
  return out;
}

}  // namespace qbdi
