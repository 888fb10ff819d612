#pragma once

#include <string>

#include "proxnas/config.hpp"
#include "proxnas/search.hpp"

namespace proxnas {

/// Everything needed to continue a run bit-identically: the config text, the
/// optimizer state, the RNG state and the trace so far.
struct Checkpoint {
  static constexpr char kMagic[8] = {'P', 'X', 'N', 'A', 'S', 'C', 'K', 'P'};
  static constexpr std::uint32_t kVersion = 1;

  std::string config_text;
  SearchState state;
};

/// Binary format: 8-byte magic, little-endian u32 version, then the payload.
/// All integers and doubles are encoded explicitly little-endian.
void save_checkpoint(const Checkpoint& cp, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace proxnas
