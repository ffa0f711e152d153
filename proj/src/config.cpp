#include "tncn/config.hpp"

#include <algorithm>
#include <sstream>

#include "tncn/errors.hpp"
#include "tncn/io_util.hpp"

namespace tncn {

std::string to_string(EvalSetting s) {
    return s == EvalSetting::Official ? "official" : "ns";
}

EvalSetting eval_setting_from_string(const std::string& s) {
    if (s == "official") return EvalSetting::Official;
    if (s == "ns") return EvalSetting::Ns;
    throw UsageError("setting must be 'official' or 'ns', got '" + s + "'");
}

std::string hop_order_to_string(const std::vector<std::pair<int, int>>& hops) {
    std::string out;
    for (const auto& [i, j] : hops) {
        if (!out.empty()) out += ',';
        out += std::to_string(i);
        out += std::to_string(j);
    }
    return out.empty() ? "none" : out;
}

std::vector<std::pair<int, int>> hop_order_from_string(const std::string& s) {
    std::vector<std::pair<int, int>> out;
    if (s.empty() || s == "none") return out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok.erase(std::remove_if(tok.begin(), tok.end(), [](char c) { return c == ' '; }), tok.end());
        if (tok.size() != 2 || !std::isdigit(tok[0]) || !std::isdigit(tok[1])) {
            throw UsageError("hop_order token '" + tok + "' must be two digits, e.g. 12");
        }
        out.emplace_back(tok[0] - '0', tok[1] - '0');
    }
    return out;
}

void RunConfig::validate() const {
    if (mem_dim == 0 || emb_dim == 0 || time_dim == 0 || batch_size == 0) {
        throw UsageError("dims and batch_size must be positive");
    }
    if (heads == 0 || emb_dim % heads != 0) {
        throw UsageError("emb_dim must be divisible by heads");
    }
    if (k_hop_max < 1 || k_hop_max > 2) {
        throw UsageError("k_hop_max must be 1 or 2");
    }
    for (const auto& [i, j] : hop_order) {
        if (i < 0 || j < 0 || i > k_hop_max || j > k_hop_max) {
            throw UsageError("hop pair (" + std::to_string(i) + "," + std::to_string(j) +
                             ") outside k_hop_max");
        }
    }
    if (epochs < 1 || patience < 1) throw UsageError("epochs and patience must be >= 1");
    if (lr <= 0) throw UsageError("learning rate must be positive");
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["setting"] = to_string(setting);
    j["seed"] = seed;
    j["epochs"] = epochs;
    j["patience"] = patience;
    j["batch_size"] = batch_size;
    j["k_hop_max"] = k_hop_max;
    j["k_recent"] = k_recent;
    j["num_neighbors"] = num_neighbors;
    j["mem_dim"] = mem_dim;
    j["emb_dim"] = emb_dim;
    j["time_dim"] = time_dim;
    j["heads"] = heads;
    j["head_hidden"] = head_hidden;
    j["hop_order"] = hop_order_to_string(hop_order);
    j["cn_correction"] = cn_correction;
    j["cn_weighted"] = cn_weighted;
    j["lr"] = lr;
    j["train_neg"] = train_neg;
    j["eval_neg"] = eval_neg;
    j["record_scores"] = record_scores;
    return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig c;
    c.setting = eval_setting_from_string(j.at("setting").get<std::string>());
    c.seed = j.at("seed").get<std::uint64_t>();
    c.epochs = j.at("epochs").get<int>();
    c.patience = j.at("patience").get<int>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.k_hop_max = j.at("k_hop_max").get<int>();
    c.k_recent = j.at("k_recent").get<std::size_t>();
    c.num_neighbors = j.at("num_neighbors").get<std::size_t>();
    c.mem_dim = j.at("mem_dim").get<std::size_t>();
    c.emb_dim = j.at("emb_dim").get<std::size_t>();
    c.time_dim = j.at("time_dim").get<std::size_t>();
    c.heads = j.at("heads").get<std::size_t>();
    c.head_hidden = j.at("head_hidden").get<std::size_t>();
    c.hop_order = hop_order_from_string(j.at("hop_order").get<std::string>());
    c.cn_correction = j.at("cn_correction").get<bool>();
    c.cn_weighted = j.at("cn_weighted").get<bool>();
    c.lr = j.at("lr").get<double>();
    c.train_neg = j.at("train_neg").get<std::size_t>();
    c.eval_neg = j.at("eval_neg").get<std::size_t>();
    c.record_scores = j.at("record_scores").get<bool>();
    return c;
}

void RunConfig::set_key(const std::string& key, const std::string& value) {
    auto as_bool = [&]() {
        if (value == "true" || value == "on" || value == "1") return true;
        if (value == "false" || value == "off" || value == "0") return false;
        throw UsageError("boolean key '" + key + "' got '" + value + "'");
    };
    try {
        if (key == "setting") setting = eval_setting_from_string(value);
        else if (key == "seed") seed = std::stoull(value);
        else if (key == "epochs") epochs = std::stoi(value);
        else if (key == "patience") patience = std::stoi(value);
        else if (key == "batch_size") batch_size = std::stoul(value);
        else if (key == "k_hop_max") k_hop_max = std::stoi(value);
        else if (key == "k_recent") k_recent = std::stoul(value);
        else if (key == "num_neighbors") num_neighbors = std::stoul(value);
        else if (key == "mem_dim") mem_dim = std::stoul(value);
        else if (key == "emb_dim") emb_dim = std::stoul(value);
        else if (key == "time_dim") time_dim = std::stoul(value);
        else if (key == "heads") heads = std::stoul(value);
        else if (key == "head_hidden") head_hidden = std::stoul(value);
        else if (key == "hop_order") hop_order = hop_order_from_string(value);
        else if (key == "cn_correction") cn_correction = as_bool();
        else if (key == "cn_weighted") cn_weighted = as_bool();
        else if (key == "lr") lr = std::stod(value);
        else if (key == "train_neg") train_neg = std::stoul(value);
        else if (key == "eval_neg") eval_neg = std::stoul(value);
        else if (key == "record_scores") record_scores = as_bool();
        else throw UsageError("unknown config key '" + key + "'");
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception&) {
        throw UsageError("cannot parse config value '" + value + "' for key '" + key + "'");
    }
}

RunConfig RunConfig::from_text(const std::string& text) {
    RunConfig c;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r\"");
            auto e = s.find_last_not_of(" \t\r\"");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (!trim(line).empty()) throw UsageError("config line without '=': " + line);
            continue;
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw UsageError("config line with empty key: " + line);
        c.set_key(key, value);
    }
    return c;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    return from_text(read_file(path));
}

} // namespace tncn
