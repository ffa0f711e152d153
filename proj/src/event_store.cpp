#include "tncn/event_store.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "tncn/errors.hpp"
#include "tncn/io_util.hpp"

namespace tncn {

namespace {

std::vector<std::string> split_line(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& s, const std::string& what, EventIdx row) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw SchemaError("row " + std::to_string(row) + ": cannot parse " + what + " '" + s + "'");
    }
}

std::string format_number(double v) {
    if (v == static_cast<double>(static_cast<long long>(v)) && std::abs(v) < 1e15) {
        return std::to_string(static_cast<long long>(v));
    }
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

} // namespace

EventLog ingest(const std::vector<RawRecord>& rows) {
    EventLog log;
    if (rows.empty()) return log;

    log.feat_dim = rows.front().feat.size();
    std::unordered_map<std::string, NodeId> ids;
    ids.reserve(rows.size() * 2);

    auto dense = [&](const std::string& raw) {
        auto it = ids.find(raw);
        if (it != ids.end()) return it->second;
        NodeId id = static_cast<NodeId>(log.raw_ids.size());
        ids.emplace(raw, id);
        log.raw_ids.push_back(raw);
        return id;
    };

    Timestamp prev_t = rows.front().t;
    log.events.reserve(rows.size());
    log.features.reserve(rows.size() * log.feat_dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const RawRecord& r = rows[i];
        EventIdx row = static_cast<EventIdx>(i) + 1;
        if (r.feat.size() != log.feat_dim) {
            throw SchemaError("row " + std::to_string(row) + ": feature dimension " +
                              std::to_string(r.feat.size()) + " != " + std::to_string(log.feat_dim));
        }
        if (r.t < prev_t) {
            throw CausalityError("row " + std::to_string(row) + ": timestamp " +
                                 format_number(r.t) + " decreases below " + format_number(prev_t));
        }
        prev_t = r.t;
        Event e;
        e.src = dense(r.src);
        e.dst = dense(r.dst);
        e.t = r.t;
        e.event_idx = static_cast<EventIdx>(i);
        log.events.push_back(e);
        log.features.insert(log.features.end(), r.feat.begin(), r.feat.end());
    }
    log.node_count = static_cast<NodeId>(log.raw_ids.size());
    return log;
}

EventLog ingest_csv_text(const std::string& text) {
    std::vector<RawRecord> rows;
    std::istringstream in(text);
    std::string line;
    bool header_seen = false;
    std::size_t n_cols = 0;
    EventIdx row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto cells = split_line(line, ',');
        if (!header_seen) {
            if (cells.size() < 3 || cells[0] != "src" || cells[1] != "dst" || cells[2] != "t") {
                throw SchemaError("expected CSV header 'src,dst,t[,f0..fD]', got '" + line + "'");
            }
            n_cols = cells.size();
            header_seen = true;
            continue;
        }
        ++row;
        if (cells.size() != n_cols) {
            throw SchemaError("row " + std::to_string(row) + ": expected " + std::to_string(n_cols) +
                              " columns, got " + std::to_string(cells.size()));
        }
        RawRecord r;
        r.src = cells[0];
        r.dst = cells[1];
        r.t = parse_number(cells[2], "timestamp", row);
        for (std::size_t c = 3; c < cells.size(); ++c) {
            r.feat.push_back(parse_number(cells[c], "feature", row));
        }
        rows.push_back(std::move(r));
    }
    return ingest(rows);
}

EventLog ingest_csv_file(const std::filesystem::path& path) {
    return ingest_csv_text(read_file(path));
}

std::string id_map_csv(const EventLog& log) {
    std::string out = "raw_id,dense_id\n";
    for (std::size_t i = 0; i < log.raw_ids.size(); ++i) {
        out += log.raw_ids[i];
        out += ',';
        out += std::to_string(i);
        out += '\n';
    }
    return out;
}

void write_id_map(const EventLog& log, const std::filesystem::path& path) {
    atomic_write_file(path, id_map_csv(log));
}

std::vector<std::string> read_id_map(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::vector<std::string> out;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        auto cells = split_line(line, ',');
        if (cells.size() != 2) throw SchemaError("bad id map line: " + line);
        std::size_t dense = std::stoul(cells[1]);
        if (dense != out.size()) throw SchemaError("id map not in dense order at: " + line);
        out.push_back(cells[0]);
    }
    return out;
}

std::string event_log_csv(const EventLog& log) {
    std::string out = "src,dst,t";
    for (std::size_t f = 0; f < log.feat_dim; ++f) out += ",f" + std::to_string(f);
    out += '\n';
    for (const Event& e : log.events) {
        out += log.raw_ids.empty() ? std::to_string(e.src) : log.raw_ids[static_cast<std::size_t>(e.src)];
        out += ',';
        out += log.raw_ids.empty() ? std::to_string(e.dst) : log.raw_ids[static_cast<std::size_t>(e.dst)];
        out += ',';
        out += format_number(e.t);
        auto fv = log.feat(e.event_idx);
        for (double v : fv) {
            out += ',';
            out += format_number(v);
        }
        out += '\n';
    }
    return out;
}

std::string split_manifest_json(const SplitRanges& s) {
    nlohmann::json j;
    j["train"] = {{"begin", s.train.begin}, {"end", s.train.end}};
    j["val"] = {{"begin", s.val.begin}, {"end", s.val.end}};
    j["test"] = {{"begin", s.test.begin}, {"end", s.test.end}};
    return j.dump(2) + "\n";
}

SplitRanges read_split_manifest(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("bad split manifest " + path.string() + ": " + e.what());
    }
    auto range = [&](const char* name) {
        if (!j.contains(name)) throw SchemaError(std::string("split manifest missing '") + name + "'");
        RowRange r;
        r.begin = j[name]["begin"].get<EventIdx>();
        r.end = j[name]["end"].get<EventIdx>();
        if (r.begin > r.end) throw SchemaError(std::string("split '") + name + "' has begin > end");
        return r;
    };
    SplitRanges s;
    s.train = range("train");
    s.val = range("val");
    s.test = range("test");
    return s;
}

SplitRanges chronological_split(EventIdx n, double train_frac, double val_frac) {
    if (train_frac < 0 || val_frac < 0 || train_frac + val_frac > 1.0) {
        throw UsageError("split fractions must be non-negative and sum to at most 1");
    }
    SplitRanges s;
    EventIdx n_train = static_cast<EventIdx>(std::llround(static_cast<double>(n) * train_frac));
    EventIdx n_val = static_cast<EventIdx>(std::llround(static_cast<double>(n) * val_frac));
    s.train = {0, n_train};
    s.val = {n_train, n_train + n_val};
    s.test = {n_train + n_val, n};
    return s;
}

namespace {

std::uint64_t pair_key(NodeId a, NodeId b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(b));
}

} // namespace

double surprise_index(const EventLog& train, const EventLog& test) {
    if (test.empty()) throw DataError("surprise index undefined for an empty test log");
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(train.size() * 2);
    for (const Event& e : train.events) seen.insert(pair_key(e.src, e.dst));
    EventIdx unseen = 0;
    for (const Event& e : test.events) {
        if (!seen.count(pair_key(e.src, e.dst))) ++unseen;
    }
    return static_cast<double>(unseen) / static_cast<double>(test.size());
}

double surprise_index(const EventLog& log, const RowRange& train, const RowRange& test) {
    return surprise_index(slice(log, train), slice(log, test));
}

EventLog slice(const EventLog& log, const RowRange& range) {
    EventLog out;
    out.feat_dim = log.feat_dim;
    out.node_count = log.node_count;
    out.raw_ids = log.raw_ids;
    for (EventIdx i = range.begin; i < range.end && i < static_cast<EventIdx>(log.size()); ++i) {
        out.events.push_back(log.events[static_cast<std::size_t>(i)]);
        auto fv = log.feat(i);
        out.features.insert(out.features.end(), fv.begin(), fv.end());
    }
    return out;
}

DatasetStats dataset_stats(const EventLog& log, const SplitRanges& splits) {
    DatasetStats st;
    st.node_count = log.node_count;
    st.edge_count = static_cast<EventIdx>(log.size());
    std::set<Timestamp> steps;
    for (const Event& e : log.events) steps.insert(e.t);
    st.unique_steps = steps.size();

    // 2-coloring over the undirected event graph, self-loops break bipartiteness.
    std::vector<std::vector<NodeId>> adj(static_cast<std::size_t>(log.node_count));
    bool self_loop = false;
    for (const Event& e : log.events) {
        if (e.src == e.dst) {
            self_loop = true;
            continue;
        }
        adj[static_cast<std::size_t>(e.src)].push_back(e.dst);
        adj[static_cast<std::size_t>(e.dst)].push_back(e.src);
    }
    std::vector<int> color(static_cast<std::size_t>(log.node_count), -1);
    bool bipartite = !self_loop;
    for (NodeId start = 0; bipartite && start < log.node_count; ++start) {
        if (color[static_cast<std::size_t>(start)] != -1) continue;
        color[static_cast<std::size_t>(start)] = 0;
        std::deque<NodeId> queue{start};
        while (!queue.empty() && bipartite) {
            NodeId u = queue.front();
            queue.pop_front();
            for (NodeId v : adj[static_cast<std::size_t>(u)]) {
                if (color[static_cast<std::size_t>(v)] == -1) {
                    color[static_cast<std::size_t>(v)] = 1 - color[static_cast<std::size_t>(u)];
                    queue.push_back(v);
                } else if (color[static_cast<std::size_t>(v)] == color[static_cast<std::size_t>(u)]) {
                    bipartite = false;
                    break;
                }
            }
        }
    }
    st.is_bipartite = bipartite && log.node_count > 0;

    if (splits.test.size() > 0 && splits.train.size() > 0) {
        st.surprise = surprise_index(log, splits.train, splits.test);
    }
    return st;
}

} // namespace tncn
