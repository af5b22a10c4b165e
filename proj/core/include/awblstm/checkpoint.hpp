#pragma once

#include <string>

#include "awblstm/model.hpp"
#include "awblstm/vocab.hpp"

namespace awblstm {

/// Checkpoint layout: magic "AWBL", little-endian u32 format version,
/// u64 header length, a UTF-8 JSON header (config, vocabulary, tensor
/// manifest with name/shape/offset), the tensor payload as little-endian
/// IEEE-754 doubles, and a closing u64 FNV-1a checksum of the payload bytes.
inline constexpr char kCheckpointMagic[4] = {'A', 'W', 'B', 'L'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct LoadedModel {
    ModelConfig config;
    Vocabulary vocab;
    ModelParams params;
};

void save_checkpoint(const std::string& path, const ModelConfig& config,
                     const Vocabulary& vocab, const ModelParams& params);

/// Verifies magic, version, checksum, and that every manifest tensor matches
/// the shape the config implies; errors are VersionError, IntegrityError, or
/// ValidationError naming the offending tensor.
LoadedModel load_checkpoint(const std::string& path);

}  // namespace awblstm
