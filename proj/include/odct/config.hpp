#pragma once

#include <filesystem>
#include <string>

#include "odct/synth.hpp"
#include "odct/trackgen.hpp"
#include "odct/trainer.hpp"

namespace odct {

/// Everything a run can be told from the outside, one section per stage.
struct RunConfig {
    SynthSpec synth;
    TrackerConfig trackgen;
    TrainConfig train;
};

/// The shipped defaults (identical to the structs' member initializers).
RunConfig default_config();

/// Reads a JSON config. Absent keys keep their defaults; unknown keys,
/// wrong types and out-of-range values are all collected and reported
/// together in one InputError.
RunConfig load_config(const std::filesystem::path& path);

/// Serialized form of the resolved config (every key explicit).
/// indent < 0 gives the compact one-line form.
std::string config_dump(const RunConfig& cfg, int indent = -1);

void save_config(const RunConfig& cfg, const std::filesystem::path& path);

/// FNV-1a 64-bit digest of the compact serialized config, as 16 hex
/// digits. Stable across runs; changes iff an effective setting changes.
std::string config_digest(const RunConfig& cfg);

/// FNV-1a 64-bit digest of arbitrary bytes (file fingerprints in run
/// manifests).
std::string fnv1a_hex(std::string_view bytes);

}  // namespace odct
