#include "tncn/checkpoint.hpp"

#include <cstring>

#include "tncn/errors.hpp"
#include "tncn/io_util.hpp"

namespace tncn {

namespace {

constexpr char kMagic[8] = {'T', 'N', 'C', 'N', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw SchemaError("truncated checkpoint");
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

} // namespace

ModelConfig model_config_from(const RunConfig& c, std::size_t feat_dim) {
    ModelConfig m;
    m.mem_dim = c.mem_dim;
    m.emb_dim = c.emb_dim;
    m.time_dim = c.time_dim;
    m.heads = c.heads;
    m.head_hidden = c.head_hidden;
    m.num_neighbors = c.num_neighbors;
    m.feat_dim = feat_dim;
    m.hop_order = c.hop_order;
    m.cn_weighted = c.cn_weighted;
    return m;
}

void save_checkpoint(const std::filesystem::path& path, TncnModel& model,
                     const RunConfig& config, const std::string& id_map_hash) {
    nlohmann::json header;
    header["config"] = config.to_json();
    header["feat_dim"] = model.config().feat_dim;
    header["id_map_hash"] = id_map_hash;
    std::string header_s = header.dump();

    std::string out;
    out.append(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, kVersion);
    put<std::uint64_t>(out, header_s.size());
    out += header_s;
    for (const auto& p : model.param_views()) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
        out += p.name;
        put<std::uint64_t>(out, p.value->size());
        out.append(reinterpret_cast<const char*>(p.value->data()),
                   p.value->size() * sizeof(double));
    }
    atomic_write_file(path, out);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::string in = read_file(path);
    std::size_t pos = 0;
    if (in.size() < sizeof(kMagic) || std::memcmp(in.data(), kMagic, sizeof(kMagic)) != 0) {
        throw SchemaError("not a checkpoint file: " + path.string());
    }
    pos = sizeof(kMagic);
    auto version = take<std::uint32_t>(in, pos);
    if (version != kVersion) {
        throw SchemaError("unsupported checkpoint version " + std::to_string(version));
    }
    auto header_len = take<std::uint64_t>(in, pos);
    if (pos + header_len > in.size()) throw SchemaError("truncated checkpoint header");
    nlohmann::json header = nlohmann::json::parse(in.substr(pos, header_len));
    pos += header_len;

    LoadedCheckpoint lc;
    lc.config = RunConfig::from_json(header.at("config"));
    lc.feat_dim = header.at("feat_dim").get<std::size_t>();
    lc.id_map_hash = header.at("id_map_hash").get<std::string>();
    lc.model = std::make_unique<TncnModel>(model_config_from(lc.config, lc.feat_dim),
                                           lc.config.seed);

    for (const auto& p : lc.model->param_views()) {
        auto name_len = take<std::uint32_t>(in, pos);
        if (pos + name_len > in.size()) throw SchemaError("truncated checkpoint");
        std::string name = in.substr(pos, name_len);
        pos += name_len;
        if (name != p.name) {
            throw SchemaError("checkpoint group '" + name + "' does not match expected '" +
                              p.name + "'");
        }
        auto count = take<std::uint64_t>(in, pos);
        if (count != p.value->size()) {
            throw SchemaError("checkpoint group '" + name + "' has " + std::to_string(count) +
                              " values, expected " + std::to_string(p.value->size()));
        }
        if (pos + count * sizeof(double) > in.size()) throw SchemaError("truncated checkpoint");
        std::memcpy(p.value->data(), in.data() + pos, count * sizeof(double));
        pos += count * sizeof(double);
    }
    return lc;
}

} // namespace tncn
