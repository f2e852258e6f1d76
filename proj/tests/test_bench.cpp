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
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>
#include <vector>

#include "json.hpp"
#include "multiqueue/bench.hpp"

using namespace multiqueue;

namespace {

BenchConfig small_config(std::size_t p, std::size_t c, std::size_t s = 1) {
    BenchConfig cfg;
    cfg.threads = p;
    cfg.factor = c;
    cfg.stickiness = s;
    cfg.prefill = 20'000;
    cfg.deletes = 20'000;
    cfg.runs = 1;
    cfg.spq_capacity = 1 << 14;
    cfg.pin_threads = false;
    cfg.yield_between_ops = std::thread::hardware_concurrency() < p;
    return cfg;
}

MultiQueueConfig queue_config(std::size_t p, std::size_t c) {
    MultiQueueConfig qc;
    qc.threads = p;
    qc.factor = c;
    qc.spq_capacity = 1 << 20;
    return qc;
}

}  // namespace

TEST(Prefill, ZeroLeavesQueueEmpty) {
    MultiQueue<DaryHeap> mq(queue_config(1, 2));
    auto h = mq.get_handle(0);
    prefill(mq, h, 0, 1);
    EXPECT_EQ(mq.size_quiescent(), 0u);
}

TEST(Prefill, InsertsExactlyNElements) {
    MultiQueue<DaryHeap> mq(queue_config(1, 4));
    auto h = mq.get_handle(0);
    prefill(mq, h, 100, 1);
    auto drained = mq.drain_quiescent();
    ASSERT_EQ(drained.size(), 100u);
    std::vector<Value> ids;
    for (auto const& e : drained) {
        ids.push_back(e.value);
    }
    std::sort(ids.begin(), ids.end());
    for (Value i = 0; i < 100; ++i) {
        EXPECT_EQ(ids[i], i);
    }
}

TEST(Prefill, IsDeterministicForASeed) {
    auto keys = [](std::uint64_t seed) {
        MultiQueue<DaryHeap> mq(queue_config(1, 1));
        auto h = mq.get_handle(0);
        prefill(mq, h, 1000, seed);
        std::vector<Key> out;
        while (auto e = mq.delete_min(h)) {
            out.push_back(e->key);
        }
        return out;
    };
    EXPECT_EQ(keys(9), keys(9));
    EXPECT_NE(keys(9), keys(10));
}

TEST(Prefill, KeysAreUniformOverTheKeyRange) {
    MultiQueue<DaryHeap> mq(queue_config(1, 1));
    auto h = mq.get_handle(0);
    constexpr std::size_t n = 1'000'000;
    prefill(mq, h, n, 42);
    std::vector<Key> keys;
    keys.reserve(n);
    while (auto e = mq.delete_min(h)) {
        keys.push_back(e->key);
    }
    ASSERT_EQ(keys.size(), n);
    ASSERT_TRUE(std::is_sorted(keys.begin(), keys.end()));
    // Kolmogorov-Smirnov distance against the uniform CDF on [0, 2^32).
    double d = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double const cdf = (static_cast<double>(keys[i]) + 1.0) / 4294967296.0;
        d = std::max({d, std::abs(cdf - static_cast<double>(i) / n),
                      std::abs(static_cast<double>(i + 1) / n - cdf)});
    }
    EXPECT_LT(d, 0.01);
}

TEST(BenchConfig, RejectsInvalidValues) {
    BenchConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.threads = 0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = BenchConfig{};
    cfg.buffer_size = 300;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = BenchConfig{};
    cfg.duration_s = 0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg.ops = 10;
    EXPECT_NO_THROW(cfg.validate());
    cfg.ops = 0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(BenchConfig, DocumentedDefaults) {
    BenchConfig cfg;
    EXPECT_EQ(cfg.prefill, 1'000'000u);
    EXPECT_DOUBLE_EQ(cfg.duration_s, 3.0);
    EXPECT_EQ(cfg.runs, 5u);
    EXPECT_EQ(cfg.buffer_size, 16u);
    EXPECT_EQ(cfg.stickiness, 1u);
}

TEST(Throughput, SingleThreadCountsAddUp) {
    auto cfg = small_config(1, 4);
    cfg.ops = 100'000;
    cfg.runs = 2;
    auto result = run_throughput(cfg);
    ASSERT_EQ(result.runs.size(), 2u);
    for (auto const& run : result.runs) {
        EXPECT_EQ(run.total_ops(), 100'000u);
        EXPECT_GT(run.mops(), 0.0);
        EXPECT_DOUBLE_EQ(run.mops(), 100'000.0 / (1e6 * run.seconds));
        EXPECT_EQ(run.attempts.operations, 100'000u);
        auto const& t = run.per_thread[0];
        EXPECT_GT(t.inserts, 40'000u);
        EXPECT_GT(t.deletes, 40'000u);
    }
    EXPECT_NEAR(result.mean_mops(), (result.runs[0].mops() + result.runs[1].mops()) / 2, 1e-9);
}

TEST(Throughput, SameSeedSingleThreadIsDeterministic) {
    auto cfg = small_config(1, 2);
    cfg.ops = 50'000;
    auto a = run_throughput(cfg);
    auto b = run_throughput(cfg);
    EXPECT_EQ(a.runs[0].per_thread, b.runs[0].per_thread);
}

TEST(Throughput, DurationModeStopsAndSplitsOps) {
    auto cfg = small_config(2, 2);
    cfg.duration_s = 0.2;
    auto result = run_throughput(cfg);
    auto const& run = result.runs[0];
    EXPECT_GE(run.seconds, 0.2);
    EXPECT_LT(run.seconds, 5.0);
    std::uint64_t sum = 0;
    for (auto const& t : run.per_thread) {
        sum += t.total();
    }
    EXPECT_EQ(sum, run.total_ops());
    EXPECT_GT(sum, 0u);
}

TEST(Throughput, MergingHeapRuns) {
    auto cfg = small_config(2, 2);
    cfg.heap = HeapKind::Merging16;
    cfg.ops = 20'000;
    EXPECT_EQ(run_throughput(cfg).runs[0].total_ops(), 20'000u);
}

TEST(Quality, SingleQueueIsExact) {
    auto cfg = small_config(1, 1);
    auto run = run_quality(cfg);
    EXPECT_EQ(run.report.rank_errors.size(), 20'000u);
    for (auto e : run.report.rank_errors) {
        ASSERT_EQ(e, 0u);
    }
    for (auto d : run.report.delays) {
        ASSERT_EQ(d, 0u);
    }
}

TEST(Quality, ReplayConsumesEveryLoggedRecord) {
    auto cfg = small_config(4, 2);
    auto run = run_quality(cfg, true);
    std::uint64_t ops = 0;
    std::uint64_t deletes = 0;
    std::uint64_t inserts = 0;
    for (auto const& t : run.per_thread) {
        ops += t.total();
        deletes += t.deletes + t.failed_deletes;
        inserts += t.inserts;
    }
    EXPECT_EQ(deletes, cfg.deletes);
    EXPECT_EQ(run.logged_records, cfg.prefill + ops);
    EXPECT_EQ(run.merged_log.size(), run.logged_records);
    EXPECT_EQ(run.report.rank_errors.size(), deletes);
    EXPECT_EQ(run.report.inserts, cfg.prefill + inserts);
    EXPECT_TRUE(std::is_sorted(run.merged_log.begin(), run.merged_log.end(),
                               [](LogRecord const& a, LogRecord const& b) {
                                   return a.timestamp < b.timestamp;
                               }));
}

TEST(Quality, MeanRankErrorNearModelAtFourThreads) {
    auto cfg = small_config(4, 2);
    cfg.prefill = 100'000;
    cfg.deletes = 100'000;
    auto run = run_quality(cfg);
    double const model = expected_rank_error(2, 4);
    double const mean = run.report.rank_error_summary().mean;
    EXPECT_GE(mean, 0.5 * model);
    EXPECT_LE(mean, 3.0 * model);
}

TEST(Quality, TwoQueuesSingleThreadStaysBelowThreeTimesModel) {
    auto cfg = small_config(1, 2);
    cfg.prefill = 100'000;
    cfg.deletes = 100'000;
    auto run = run_quality(cfg);
    double const mean = run.report.rank_error_summary().mean;
    EXPECT_GT(mean, 0.0);
    EXPECT_LE(mean, 3.0 * expected_rank_error(2, 1));
}

TEST(Quality, StickinessIncreasesRankError) {
    auto loose = small_config(4, 4, 1);
    auto sticky = small_config(4, 4, 8);
    double const a = run_quality(loose).report.rank_error_summary().mean;
    double const b = run_quality(sticky).report.rank_error_summary().mean;
    EXPECT_GT(b, a);
}

TEST(Quality, RejectsRunsThatOverflowElementIds) {
    auto cfg = small_config(1, 2);
    cfg.deletes = 2'000'000'000;
    EXPECT_THROW(run_quality(cfg), std::invalid_argument);
}

TEST(Metadata, JsonSidecarRecordsConfig) {
    auto path = std::filesystem::temp_directory_path() / "mq_meta_test.json";
    auto cfg = small_config(3, 5, 2);
    cfg.ops = 1234;
    write_metadata_json(path.string(), cfg, "throughput");
    std::ifstream is(path);
    auto j = nlohmann::json::parse(is);
    EXPECT_EQ(j["command"], "throughput");
    EXPECT_EQ(j["threads"], 3);
    EXPECT_EQ(j["factor"], 5);
    EXPECT_EQ(j["stickiness"], 2);
    EXPECT_EQ(j["buffer_size"], 16);
    EXPECT_EQ(j["heap"], "dary8");
    EXPECT_EQ(j["ops"], 1234);
    EXPECT_TRUE(j.contains("git_revision"));
    EXPECT_TRUE(j.contains("host"));
    EXPECT_TRUE(j.contains("seed"));
    std::filesystem::remove(path);
}

TEST(HeapKind, ParsesNames) {
    EXPECT_EQ(parse_heap_kind("dary8"), HeapKind::Dary8);
    EXPECT_EQ(parse_heap_kind("merging16"), HeapKind::Merging16);
    EXPECT_THROW(parse_heap_kind("fib"), std::invalid_argument);
    EXPECT_EQ(std::string(to_string(HeapKind::Merging16)), "merging16");
}
