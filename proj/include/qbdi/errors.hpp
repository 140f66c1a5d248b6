// Error types shared by the qbdi library and tools.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qbdi {

/// Bad user input: malformed files, inconsistent dimensions, invalid arguments.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed MIDI content. Carries the byte offset where decoding failed.
class MidiParseError : public InputError {
 public:
  MidiParseError(const std::string& what, std::size_t offset)
      : InputError(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Non-finite values appeared during a numeric computation (e.g. training loss).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qbdi
