/*
 * Copyright 2026 The MultiQueue Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "multiqueue/bench.hpp"
#include "multiqueue/graph.hpp"
#include "multiqueue/quality.hpp"
#include "multiqueue/sssp.hpp"

using namespace multiqueue;

namespace {

struct QueueFlags {
    std::size_t threads = 1;
    std::size_t factor = 4;
    std::size_t stickiness = 1;
    std::size_t buffer_size = kDefaultBufferSize;
    std::string heap = "dary8";
    std::uint64_t seed = 1;
    bool yield = false;
};

void add_queue_flags(CLI::App* app, QueueFlags& f) {
    app->add_option("--threads,-p", f.threads, "worker threads p")->check(CLI::PositiveNumber);
    app->add_option("--factor,-c", f.factor, "queues per thread c")->check(CLI::PositiveNumber);
    app->add_option("--stickiness,-s", f.stickiness, "stickiness s")->check(CLI::PositiveNumber);
    app->add_option("--buffer-size,-b", f.buffer_size, "insertion/deletion buffer size b")
        ->check(CLI::Range(1, 256));
    app->add_option("--heap", f.heap, "main queue: dary8 or merging16")
        ->check(CLI::IsMember({"dary8", "merging16"}));
    app->add_option("--seed", f.seed, "RNG seed");
}

void add_yield_flag(CLI::App* app, QueueFlags& f) {
    app->add_flag("--yield", f.yield,
                  "yield after every operation (for hosts with fewer cores than threads)");
}

BenchConfig to_bench(QueueFlags const& f) {
    BenchConfig c;
    c.threads = f.threads;
    c.factor = f.factor;
    c.stickiness = f.stickiness;
    c.buffer_size = f.buffer_size;
    c.heap = parse_heap_kind(f.heap);
    c.seed = f.seed;
    c.yield_between_ops = f.yield;
    return c;
}

std::ofstream open_out(std::string const& path) {
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    return os;
}

void print_summary(std::ostream& os, char const* name, Summary const& s) {
    os << name << ": count=" << s.count << " mean=" << s.mean << " p50=" << s.p50
       << " p99=" << s.p99 << " max=" << s.max << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MultiQueue relaxed priority queue benchmarks"};
    app.require_subcommand(1);

    QueueFlags tflags;
    std::uint64_t t_prefill = 1'000'000;
    double t_duration = 3.0;
    std::uint64_t t_ops = 0;
    std::size_t t_runs = 5;
    std::string t_out = "throughput";
    auto* throughput = app.add_subcommand("throughput", "50/50 insert/deleteMin throughput");
    add_queue_flags(throughput, tflags);
    add_yield_flag(throughput, tflags);
    throughput->add_option("--prefill", t_prefill, "elements inserted before measuring");
    auto* t_dur_opt = throughput->add_option("--duration", t_duration, "seconds per run");
    throughput->add_option("--ops", t_ops, "total operations per run instead of a duration")
        ->excludes(t_dur_opt);
    throughput->add_option("--runs", t_runs, "runs to average")->check(CLI::PositiveNumber);
    throughput->add_option("--out", t_out, "output prefix for <out>.csv and <out>_meta.json");

    QueueFlags qflags;
    std::uint64_t q_prefill = 1'000'000;
    std::uint64_t q_deletes = 1'000'000;
    std::string q_out = "quality";
    std::string q_log;
    auto* quality = app.add_subcommand("quality", "rank error and delay measurement");
    add_queue_flags(quality, qflags);
    add_yield_flag(quality, qflags);
    quality->add_option("--prefill", q_prefill, "elements inserted before measuring");
    quality->add_option("--ops,--deletes", q_deletes, "deleteMin calls to measure")
        ->check(CLI::PositiveNumber);
    quality->add_option("--out", q_out, "output prefix for the CSV files and metadata");
    quality->add_option("--log-out", q_log, "also write the merged operation log here");

    std::string r_log;
    std::string r_out = "replay";
    auto* replay_cmd = app.add_subcommand("replay", "score an operation log file");
    replay_cmd->add_option("--log", r_log, "log file")->required();
    replay_cmd->add_option("--out", r_out, "output prefix for the CSV files");

    QueueFlags sflags;
    std::string s_graph;
    std::string s_format = "dimacs";
    std::uint32_t s_source = 0;
    std::string s_out = "sssp.csv";
    bool s_check = false;
    auto* sssp = app.add_subcommand("sssp", "parallel single-source shortest paths");
    add_queue_flags(sssp, sflags);
    sssp->add_option("--graph", s_graph, "graph file")->required();
    sssp->add_option("--format", s_format, "dimacs or edges")
        ->check(CLI::IsMember({"dimacs", "edges"}));
    sssp->add_option("--source", s_source, "source node (0-based)");
    sssp->add_option("--out", s_out, "CSV output path");
    sssp->add_flag("--check", s_check, "verify against sequential Dijkstra");

    CLI11_PARSE(app, argc, argv);

    try {
        if (throughput->parsed()) {
            BenchConfig cfg = to_bench(tflags);
            cfg.prefill = t_prefill;
            cfg.duration_s = t_duration;
            if (t_ops > 0) {
                cfg.ops = t_ops;
            }
            cfg.runs = t_runs;
            ThroughputResult result = run_throughput(cfg);
            auto os = open_out(t_out + ".csv");
            os << "run,threads,factor,stickiness,buffer_size,heap,ops,seconds,mops\n";
            for (std::size_t r = 0; r < result.runs.size(); ++r) {
                auto const& run = result.runs[r];
                os << r << ',' << cfg.threads << ',' << cfg.factor << ',' << cfg.stickiness << ','
                   << cfg.buffer_size << ',' << to_string(cfg.heap) << ',' << run.total_ops()
                   << ',' << run.seconds << ',' << run.mops() << '\n';
            }
            write_metadata_json(t_out + "_meta.json", cfg, "throughput");
            std::cout << "mean throughput: " << result.mean_mops() << " MOps/s over "
                      << result.runs.size() << " runs\n";
        } else if (quality->parsed()) {
            BenchConfig cfg = to_bench(qflags);
            cfg.prefill = q_prefill;
            cfg.deletes = q_deletes;
            QualityRun run = run_quality(cfg, !q_log.empty());
            write_quality_csv(run.report, q_out);
            write_metadata_json(q_out + "_meta.json", cfg, "quality");
            if (!q_log.empty()) {
                auto os = open_out(q_log);
                write_log(os, run.merged_log);
            }
            print_summary(std::cout, "rank error", run.report.rank_error_summary());
            print_summary(std::cout, "delay", run.report.delay_summary());
            std::cout << "expected (uniform model): "
                      << expected_rank_error(cfg.factor, cfg.threads) << '\n';
        } else if (replay_cmd->parsed()) {
            std::ifstream is(r_log);
            if (!is) {
                throw std::runtime_error("cannot open log " + r_log);
            }
            std::vector<LogRecord> records = read_log(is);
            QualityReport report = replay(records);
            write_quality_csv(report, r_out);
            print_summary(std::cout, "rank error", report.rank_error_summary());
            print_summary(std::cout, "delay", report.delay_summary());
        } else if (sssp->parsed()) {
            Graph g = load_graph(s_graph, parse_graph_format(s_format));
            SsspConfig cfg;
            cfg.threads = sflags.threads;
            cfg.factor = sflags.factor;
            cfg.stickiness = sflags.stickiness;
            cfg.buffer_size = sflags.buffer_size;
            cfg.heap = parse_heap_kind(sflags.heap);
            cfg.seed = sflags.seed;
            cfg.pin_threads = true;
            SsspResult result = parallel_sssp(g, s_source, cfg);
            if (s_check && result.distances != sequential_dijkstra(g, s_source)) {
                std::cerr << "error: distances differ from sequential Dijkstra\n";
                return 2;
            }
            auto os = open_out(s_out);
            os << "threads,time_ms,processed_nodes,reachable_nodes,overhead_ratio\n";
            os << cfg.threads << ',' << result.time_ms << ',' << result.processed_nodes << ','
               << result.reachable_nodes << ',' << result.overhead_ratio() << '\n';
            std::cout << "nodes=" << g.node_count() << " edges=" << g.edge_count()
                      << " time_ms=" << result.time_ms << " processed=" << result.processed_nodes
                      << " reachable=" << result.reachable_nodes << '\n';
        }
    } catch (std::exception const& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
