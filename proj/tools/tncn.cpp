// tncn - streaming temporal-graph link prediction toolkit.
//
// Subcommands: ingest, stats, synth, train, eval, extract-cn, bench.
// Exit codes: 0 success, 2 usage, 3 data/schema, 4 numerical, 5 I/O.

#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tncn/bench.hpp"
#include "tncn/checkpoint.hpp"
#include "tncn/cn_extractor.hpp"
#include "tncn/config.hpp"
#include "tncn/errors.hpp"
#include "tncn/event_store.hpp"
#include "tncn/io_util.hpp"
#include "tncn/pipeline.hpp"
#include "tncn/synth.hpp"

namespace {

using namespace tncn;

struct DataDir {
    EventLog log;
    SplitRanges splits;
    std::string id_map_hash;
};

DataDir load_data_dir(const std::filesystem::path& dir) {
    DataDir d;
    d.log = ingest_csv_file(dir / "events.csv");
    d.splits = read_split_manifest(dir / "split.json");
    d.id_map_hash = fnv1a_hex(read_file(dir / "id_map.csv"));
    EventIdx n = static_cast<EventIdx>(d.log.size());
    if (d.splits.test.end > n) {
        throw SchemaError("split manifest exceeds event count " + std::to_string(n));
    }
    return d;
}

RunConfig load_config(const std::string& config_path,
                      const std::vector<std::string>& overrides) {
    RunConfig cfg;
    if (!config_path.empty()) cfg = RunConfig::from_file(config_path);
    for (const std::string& kv : overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw UsageError("--set expects key=value, got '" + kv + "'");
        }
        cfg.set_key(kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"TNCN: temporal neural common neighbor link prediction"};
    app.require_subcommand(1);

    // ingest
    auto* ingest_cmd = app.add_subcommand("ingest", "Ingest a CSV event log into a dataset dir");
    std::string in_path, out_dir;
    double train_frac = 0.70, val_frac = 0.15;
    ingest_cmd->add_option("--input", in_path, "CSV with header src,dst,t[,f0..fD]")->required();
    ingest_cmd->add_option("--out", out_dir, "output dataset directory")->required();
    ingest_cmd->add_option("--train-frac", train_frac, "train fraction (default 0.70)");
    ingest_cmd->add_option("--val-frac", val_frac, "validation fraction (default 0.15)");

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "Dataset statistics as JSON");
    std::string stats_data;
    stats_cmd->add_option("--data", stats_data, "dataset directory")->required();

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
    SynthParams sp;
    std::string synth_out;
    synth_cmd->add_option("--kind", sp.kind, "bipartite-triadic | periodic | erdos-temporal");
    synth_cmd->add_option("--nodes", sp.nodes, "node count");
    synth_cmd->add_option("--events", sp.events, "event count");
    synth_cmd->add_option("--seed", sp.seed, "generator seed");
    synth_cmd->add_option("--p", sp.p, "erdos-temporal per-step emission probability");
    synth_cmd->add_option("--period", sp.period, "periodic recurring-pair count");
    synth_cmd->add_option("--k-window", sp.k_window, "generator visibility window");
    synth_cmd->add_option("--out", synth_out, "output dataset directory")->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "Train and evaluate a model");
    std::string train_config, train_data, train_out;
    std::vector<std::string> train_sets;
    train_cmd->add_option("--config", train_config, "key=value config file");
    train_cmd->add_option("--data", train_data, "dataset directory")->required();
    train_cmd->add_option("--out", train_out, "run output directory")->required();
    train_cmd->add_option("--set", train_sets, "override config key=value (repeatable)");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint or baseline");
    std::string eval_ckpt, eval_data, eval_setting, eval_baseline, eval_out, eval_config;
    std::vector<std::string> eval_sets;
    eval_cmd->add_option("--checkpoint", eval_ckpt, "model checkpoint path");
    eval_cmd->add_option("--data", eval_data, "dataset directory")->required();
    eval_cmd->add_option("--setting", eval_setting, "official | ns");
    eval_cmd->add_option("--baseline", eval_baseline,
                         "edgebank_un | edgebank_tw | cn | ra | aa");
    eval_cmd->add_option("--config", eval_config, "config file (baselines)");
    eval_cmd->add_option("--set", eval_sets, "override config key=value (repeatable)");
    eval_cmd->add_option("--out", eval_out, "write metrics JSON here as well");

    // extract-cn
    auto* cn_cmd = app.add_subcommand("extract-cn", "Debug common-neighbor extraction");
    std::string cn_data, cn_pair, cn_hops;
    double cn_time = 0;
    std::size_t cn_k_recent = 10;
    bool cn_raw = false;
    cn_cmd->add_option("--data", cn_data, "dataset directory")->required();
    cn_cmd->add_option("--pair", cn_pair, "u,v (raw ids)")->required();
    cn_cmd->add_option("--hops", cn_hops, "i,j")->required();
    cn_cmd->add_option("--at-time", cn_time, "query time (events strictly before)")->required();
    cn_cmd->add_option("--k-recent", cn_k_recent, "retention window (0 = unlimited)");
    cn_cmd->add_flag("--raw", cn_raw, "emit uncorrected walk-based result");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Throughput report");
    std::string bench_data, bench_config;
    std::vector<std::string> bench_sets;
    std::size_t bench_max_batches = 0;
    bench_cmd->add_option("--data", bench_data, "dataset directory")->required();
    bench_cmd->add_option("--config", bench_config, "config file");
    bench_cmd->add_option("--set", bench_sets, "override config key=value (repeatable)");
    bench_cmd->add_option("--max-batches", bench_max_batches, "limit extraction batches");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (ingest_cmd->parsed()) {
        EventLog log = ingest_csv_file(in_path);
        std::filesystem::path dir(out_dir);
        std::filesystem::create_directories(dir);
        SplitRanges splits = chronological_split(static_cast<EventIdx>(log.size()),
                                                 train_frac, val_frac);
        atomic_write_file(dir / "events.csv", event_log_csv(log));
        write_id_map(log, dir / "id_map.csv");
        atomic_write_file(dir / "split.json", split_manifest_json(splits));
        nlohmann::json j{{"events", log.size()},
                         {"nodes", log.node_count},
                         {"feat_dim", log.feat_dim},
                         {"out", dir.string()}};
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    if (stats_cmd->parsed()) {
        DataDir d = load_data_dir(stats_data);
        DatasetStats st = dataset_stats(d.log, d.splits);
        nlohmann::json j{{"surprise", st.surprise},
                         {"node_count", st.node_count},
                         {"edge_count", st.edge_count},
                         {"unique_steps", st.unique_steps},
                         {"is_bipartite", st.is_bipartite}};
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    if (synth_cmd->parsed()) {
        EventLog log = synth_generate(sp);
        SplitRanges splits = write_dataset(synth_out, log);
        nlohmann::json j{{"kind", sp.kind},
                         {"events", log.size()},
                         {"nodes", log.node_count},
                         {"train", splits.train.size()},
                         {"val", splits.val.size()},
                         {"test", splits.test.size()},
                         {"out", synth_out}};
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    if (train_cmd->parsed()) {
        RunConfig cfg = load_config(train_config, train_sets);
        DataDir d = load_data_dir(train_data);
        ExperimentResult res = run_experiment(d.log, d.splits, cfg, train_out, d.id_map_hash);
        std::cout << res.metrics.dump(2) << "\n";
        return 0;
    }

    if (eval_cmd->parsed()) {
        DataDir d = load_data_dir(eval_data);
        nlohmann::json metrics;
        if (!eval_baseline.empty()) {
            RunConfig cfg = load_config(eval_config, eval_sets);
            BaselineKind kind;
            if (eval_baseline == "edgebank_un") kind = BaselineKind::EdgebankUn;
            else if (eval_baseline == "edgebank_tw") kind = BaselineKind::EdgebankTw;
            else if (eval_baseline == "cn") kind = BaselineKind::Cn;
            else if (eval_baseline == "ra") kind = BaselineKind::Ra;
            else if (eval_baseline == "aa") kind = BaselineKind::Aa;
            else throw UsageError("unknown baseline '" + eval_baseline + "'");
            metrics = run_baseline(d.log, d.splits, cfg, kind).metrics;
        } else {
            if (eval_ckpt.empty()) throw UsageError("eval needs --checkpoint or --baseline");
            LoadedCheckpoint lc = load_checkpoint(eval_ckpt);
            if (lc.id_map_hash != d.id_map_hash) {
                throw DataError("checkpoint id map hash " + lc.id_map_hash +
                                " does not match dataset " + d.id_map_hash);
            }
            RunConfig cfg = lc.config;
            if (!eval_setting.empty()) cfg.setting = eval_setting_from_string(eval_setting);
            for (const std::string& kv : eval_sets) {
                auto eq = kv.find('=');
                if (eq == std::string::npos) throw UsageError("--set expects key=value");
                cfg.set_key(kv.substr(0, eq), kv.substr(eq + 1));
            }
            cfg.validate();
            Runner runner(d.log, d.splits, cfg);
            runner.swap_model(std::move(lc.model));
            runner.reset_state();
            runner.replay_updates(d.splits.train);
            runner.replay_updates(d.splits.val);
            EvalReport test = runner.evaluate_stream(d.splits.test, 2);
            metrics = {{"setting", to_string(cfg.setting)},
                       {"seed", cfg.seed},
                       {"test_mrr", test.mrr},
                       {"events", test.events_processed},
                       {"memory_updates", test.memory_updates},
                       {"config", cfg.to_json()},
                       {"id_map_hash", d.id_map_hash}};
        }
        std::cout << metrics.dump(2) << "\n";
        if (!eval_out.empty()) atomic_write_file(eval_out, metrics.dump(2) + "\n");
        return 0;
    }

    if (cn_cmd->parsed()) {
        DataDir d = load_data_dir(cn_data);
        auto comma = cn_pair.find(',');
        if (comma == std::string::npos) throw UsageError("--pair expects u,v");
        std::string raw_u = cn_pair.substr(0, comma);
        std::string raw_v = cn_pair.substr(comma + 1);
        auto find_id = [&](const std::string& raw) -> NodeId {
            for (std::size_t i = 0; i < d.log.raw_ids.size(); ++i) {
                if (d.log.raw_ids[i] == raw) return static_cast<NodeId>(i);
            }
            throw DataError("unknown node id '" + raw + "'");
        };
        NodeId u = find_id(raw_u);
        NodeId v = find_id(raw_v);
        comma = cn_hops.find(',');
        if (comma == std::string::npos) throw UsageError("--hops expects i,j");
        int hi = std::stoi(cn_hops.substr(0, comma));
        int hj = std::stoi(cn_hops.substr(comma + 1));

        NeighborDictionary dict(d.log.node_count, cn_k_recent);
        for (const Event& e : d.log.events) {
            if (!(e.t < cn_time)) break;
            dict.update_one(e);
        }
        auto [index, adj] = build_local_adjacency(dict, {{u, v}}, 2);
        AdjacencyPowers powers = khop_powers(adj, 2);
        CnVector cv = cn_raw ? raw_cn(powers, index, u, v, hi, hj)
                             : corrected_cn(powers, index, u, v, hi, hj);
        nlohmann::json cns = nlohmann::json::array();
        for (const auto& [node, w] : cv.to_global(index)) {
            cns.push_back({{"node", node}, {"weight", w}});
        }
        nlohmann::json j{{"pair", {u, v}}, {"hops", {hi, hj}}, {"cns", cns}};
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    if (bench_cmd->parsed()) {
        RunConfig cfg = load_config(bench_config, bench_sets);
        DataDir d = load_data_dir(bench_data);
        nlohmann::json rep = bench_report(d.log, cfg, bench_max_batches);
        std::cout << rep.dump(2) << "\n";
        return 0;
    }

    return 2;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const tncn::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const tncn::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const tncn::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 5;
    } catch (const tncn::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
