#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "socnav/mlp.hpp"

namespace socnav::nn {

/// Binary checkpoint layout (all integers and floats little-endian):
///
///   char[4]  magic "SNCK"
///   u32      format version (kCheckpointVersion)
///   u32      network count N
///   u64      training episodes
///   u32      curriculum stage
///   u32      K, then K pairs of (u32 length, bytes) key/value strings
///   N times: u32 name length, name bytes, u32 width count W, W x u32 widths,
///            u8 output_relu, u64 parameter count
///   u64      payload byte count (8 x total parameter count)
///   payload: for each network, for each layer: weights row-major (out x in) f64,
///            then bias (out) f64
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMetadata {
    std::uint64_t episodes = 0;
    std::uint32_t curriculum_stage = 0;
    std::map<std::string, std::string> extra;

    bool operator==(const CheckpointMetadata&) const = default;
};

struct NamedMlp {
    std::string name;
    Mlp net;
};

struct Checkpoint {
    std::vector<NamedMlp> nets;
    CheckpointMetadata metadata;

    /// Throws std::out_of_range when no network has this name.
    const Mlp& net(const std::string& name) const;
};

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
/// Throws CheckpointVersionError, TruncatedFileError or ShapeMismatchError.
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace socnav::nn
