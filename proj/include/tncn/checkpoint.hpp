#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "tncn/config.hpp"
#include "tncn/model.hpp"

namespace tncn {

/// Versioned binary model container. Layout: magic "TNCNCKPT", u32 version,
/// u64 header length, JSON header (config echo, feat_dim, id map hash), then
/// each parameter group as (u32 name length, name bytes, u64 count, count
/// little-endian f64). Round-trips bitwise.
void save_checkpoint(const std::filesystem::path& path, TncnModel& model,
                     const RunConfig& config, const std::string& id_map_hash);

struct LoadedCheckpoint {
    std::unique_ptr<TncnModel> model;
    RunConfig config;
    std::string id_map_hash;
    std::size_t feat_dim = 0;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

/// ModelConfig slice of a RunConfig.
ModelConfig model_config_from(const RunConfig& c, std::size_t feat_dim);

} // namespace tncn
