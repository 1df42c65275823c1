#pragma once

#include <string>
#include <utility>

#include "gtr/encoder.hpp"

namespace gtr {

/// Binary checkpoint: magic "GTRC", u32 version, encoder config, then each
/// named array as (name, rank, dims, f32 payload). Bit-exact round trip.
void save_checkpoint(const ParamSet& params, const EncoderConfig& config, const std::string& path);
std::pair<ParamSet, EncoderConfig> load_checkpoint(const std::string& path);

}  // namespace gtr
