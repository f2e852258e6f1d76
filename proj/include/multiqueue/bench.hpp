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
#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "multiqueue/heap_kind.hpp"
#include "multiqueue/log_record.hpp"
#include "multiqueue/multiqueue.hpp"
#include "multiqueue/quality.hpp"

namespace multiqueue {

struct BenchConfig {
    std::size_t threads = 1;
    std::size_t factor = 4;
    std::size_t stickiness = 1;
    std::size_t buffer_size = kDefaultBufferSize;
    HeapKind heap = HeapKind::Dary8;
    std::uint64_t prefill = 1'000'000;
    // Throughput runs stop after `duration_s` seconds unless `ops` is set, in
    // which case each thread performs its share of exactly `ops` operations.
    double duration_s = 3.0;
    std::optional<std::uint64_t> ops;
    std::size_t runs = 5;
    // Quality runs stop once this many deleteMin calls were made in total.
    std::uint64_t deletes = 1'000'000;
    std::uint64_t seed = 1;
    std::size_t spq_capacity = std::size_t{1} << 20;
    bool pin_threads = true;
    // Yield the processor after every operation. On hosts with fewer hardware
    // threads than workers this keeps a descheduled worker from holding a
    // queue lock for a whole time slice.
    bool yield_between_ops = false;

    /// Throws std::invalid_argument for zero counts or out-of-range values.
    void validate() const;
    MultiQueueConfig queue_config() const;
};

/// Operation counts of one workload thread.
struct ThreadCounts {
    std::uint64_t inserts = 0;
    std::uint64_t deletes = 0;
    std::uint64_t failed_deletes = 0;

    std::uint64_t total() const noexcept { return inserts + deletes + failed_deletes; }
    friend bool operator==(ThreadCounts const&, ThreadCounts const&) = default;
};

struct ThroughputRun {
    double seconds = 0.0;
    std::vector<ThreadCounts> per_thread;
    AttemptStats attempts;

    std::uint64_t total_ops() const noexcept;
    /// Million operations per second.
    double mops() const noexcept;
};

struct ThroughputResult {
    std::vector<ThroughputRun> runs;
    double mean_mops() const noexcept;
};

struct QualityRun {
    QualityReport report;
    std::vector<ThreadCounts> per_thread;
    AttemptStats attempts;
    std::size_t logged_records = 0;
    std::vector<LogRecord> merged_log;  // only filled when requested
};

ThroughputResult run_throughput(BenchConfig const& config);
QualityRun run_quality(BenchConfig const& config, bool keep_log = false);

/// Uniform keys over the whole 32-bit range.
inline Key draw_key(std::mt19937_64& rng) {
    return static_cast<Key>(rng() >> 32);
}

/// Inserts n uniformly keyed elements through one handle; values are
/// first_id, first_id + 1, ... Deterministic for a given seed.
template <SequentialQueue Heap>
void prefill(MultiQueue<Heap>& mq, typename MultiQueue<Heap>::Handle& h, std::uint64_t n,
             std::uint64_t seed, std::uint64_t first_id = 0) {
    std::mt19937_64 rng(seed);
    for (std::uint64_t i = 0; i < n; ++i) {
        mq.insert(h, Element{draw_key(rng), static_cast<Value>(first_id + i)});
    }
}

/// Pins the calling thread to hardware thread `slot` modulo the number of
/// hardware threads. Returns false when the platform refused.
bool pin_current_thread(std::size_t slot);

/// Writes run metadata (every config field, git revision, host) as JSON.
void write_metadata_json(std::string const& path, BenchConfig const& config,
                         std::string const& command);

}  // namespace multiqueue
