#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "tncn/types.hpp"

namespace tncn {

enum class EvalSetting { Official, Ns };

std::string to_string(EvalSetting s);
EvalSetting eval_setting_from_string(const std::string& s);

/// Full experiment configuration. File format is a flat `key = value` list
/// (# comments allowed); CLI flags override file values.
struct RunConfig {
    EvalSetting setting = EvalSetting::Official;
    std::uint64_t seed = 0;
    int epochs = 10;
    int patience = 3;
    std::size_t batch_size = 200;
    int k_hop_max = 2;
    std::size_t k_recent = 10; // 0 = unlimited
    std::size_t num_neighbors = 10;
    std::size_t mem_dim = 100;
    std::size_t emb_dim = 100;
    std::size_t time_dim = 100;
    std::size_t heads = 2;
    std::size_t head_hidden = 0; // 0 -> emb_dim
    std::vector<std::pair<int, int>> hop_order =
        {{0, 1}, {1, 0}, {1, 1}, {1, 2}, {2, 1}, {2, 2}};
    bool cn_correction = true;
    bool cn_weighted = false;
    double lr = 1e-3;
    std::size_t train_neg = 1;
    std::size_t eval_neg = 20;
    bool record_scores = false;

    void validate() const;

    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);

    /// Parses `key = value` lines; unknown keys are a UsageError.
    static RunConfig from_file(const std::filesystem::path& path);
    static RunConfig from_text(const std::string& text);
    void set_key(const std::string& key, const std::string& value);
};

std::string hop_order_to_string(const std::vector<std::pair<int, int>>& hops);
std::vector<std::pair<int, int>> hop_order_from_string(const std::string& s);

} // namespace tncn
