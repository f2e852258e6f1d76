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
#include "multiqueue/bench.hpp"

#include <pthread.h>
#include <sched.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <fstream>
#include <iostream>
#include <mutex>
#include <stdexcept>

#include "json.hpp"

#ifndef MULTIQUEUE_GIT_REVISION
#define MULTIQUEUE_GIT_REVISION "unknown"
#endif

namespace multiqueue {

void BenchConfig::validate() const {
    if (threads == 0 || factor == 0 || stickiness == 0 || runs == 0 || deletes == 0) {
        throw std::invalid_argument("threads, factor, stickiness, runs and deletes must be positive");
    }
    if (buffer_size == 0 || buffer_size > kMaxBufferSize) {
        throw std::invalid_argument("buffer size must be in [1, 256]");
    }
    if (!ops && !(duration_s > 0.0)) {
        throw std::invalid_argument("duration must be positive when no op count is given");
    }
    if (ops && *ops == 0) {
        throw std::invalid_argument("op count must be positive");
    }
}

MultiQueueConfig BenchConfig::queue_config() const {
    MultiQueueConfig c;
    c.threads = threads;
    c.factor = factor;
    c.buffer_size = buffer_size;
    c.stickiness = stickiness;
    c.seed = seed;
    c.spq_capacity = spq_capacity;
    return c;
}

std::uint64_t ThroughputRun::total_ops() const noexcept {
    std::uint64_t n = 0;
    for (auto const& t : per_thread) {
        n += t.total();
    }
    return n;
}

double ThroughputRun::mops() const noexcept {
    return seconds > 0.0 ? static_cast<double>(total_ops()) / (1e6 * seconds) : 0.0;
}

double ThroughputResult::mean_mops() const noexcept {
    if (runs.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (auto const& r : runs) {
        sum += r.mops();
    }
    return sum / static_cast<double>(runs.size());
}

bool pin_current_thread(std::size_t slot) {
    unsigned const hw = std::max(1U, std::thread::hardware_concurrency());
    cpu_set_t set;
    CPU_ZERO(&set);
    CPU_SET(static_cast<int>(slot % hw), &set);
    return pthread_setaffinity_np(pthread_self(), sizeof(set), &set) == 0;
}

namespace {

constexpr std::uint64_t kWorkloadStream = 0x6a09e667f3bcc909ULL;
constexpr std::uint64_t kPrefillStream = 0xbb67ae8584caa73bULL;

struct Limits {
    std::uint64_t ops = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t deletes = std::numeric_limits<std::uint64_t>::max();
};

// Each step flips a fair coin between inserting a fresh uniform key and
// calling delete_min. Values are unique ids first_id + k * stride.
template <class Heap>
ThreadCounts workload(MultiQueue<Heap>& mq, typename MultiQueue<Heap>::Handle& h,
                      std::uint64_t seed, std::uint64_t first_id, std::uint64_t stride,
                      Limits limits, bool yield_between_ops, std::atomic<bool> const& stop) {
    std::mt19937_64 rng = make_thread_rng(seed ^ kWorkloadStream, h.thread_id());
    ThreadCounts counts;
    std::uint64_t next_id = first_id;
    while (counts.total() < limits.ops && counts.deletes + counts.failed_deletes < limits.deletes &&
           !stop.load(std::memory_order_relaxed)) {
        std::uint64_t const bits = rng();
        if (bits & 1U) {
            mq.insert(h, Element{static_cast<Key>(bits >> 32), static_cast<Value>(next_id)});
            next_id += stride;
            ++counts.inserts;
        } else if (mq.delete_min(h)) {
            ++counts.deletes;
        } else {
            ++counts.failed_deletes;
        }
        if (yield_between_ops) {
            std::this_thread::yield();
        }
    }
    return counts;
}

std::once_flag pin_warning;

// Runs body(t) on config.threads pinned threads released together; returns
// the elapsed wall time in seconds. If a duration is given, `stop` is raised
// after it.
template <class Body>
double run_threads(BenchConfig const& config, std::optional<double> duration,
                   std::atomic<bool>& stop, Body&& body) {
    std::atomic<std::size_t> ready{0};
    std::atomic<bool> go{false};
    std::vector<std::thread> workers;
    workers.reserve(config.threads);
    for (std::size_t t = 0; t < config.threads; ++t) {
        workers.emplace_back([&, t] {
            if (config.pin_threads && !pin_current_thread(t)) {
                std::call_once(pin_warning, [] {
                    std::cerr << "warning: thread pinning failed; running unpinned\n";
                });
            }
            ready.fetch_add(1);
            while (!go.load(std::memory_order_acquire)) {
                std::this_thread::yield();
            }
            body(t);
        });
    }
    while (ready.load() < config.threads) {
        std::this_thread::yield();
    }
    auto const start = std::chrono::steady_clock::now();
    go.store(true, std::memory_order_release);
    if (duration) {
        std::this_thread::sleep_for(std::chrono::duration<double>(*duration));
        stop.store(true);
    }
    for (auto& w : workers) {
        w.join();
    }
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

template <class Heap>
ThroughputRun throughput_once(BenchConfig const& config, std::uint64_t seed) {
    MultiQueueConfig qc = config.queue_config();
    qc.seed = seed;
    MultiQueue<Heap> mq(qc);
    std::vector<typename MultiQueue<Heap>::Handle> handles;
    handles.reserve(config.threads);
    for (std::size_t t = 0; t < config.threads; ++t) {
        handles.push_back(mq.get_handle(t));
    }
    prefill(mq, handles[0], config.prefill, seed ^ kPrefillStream);
    handles[0].reset_stats();

    ThroughputRun run;
    run.per_thread.resize(config.threads);
    std::atomic<bool> stop{false};
    std::optional<double> duration;
    if (!config.ops) {
        duration = config.duration_s;
    }
    run.seconds = run_threads(config, duration, stop, [&](std::size_t t) {
        Limits limits;
        if (config.ops) {
            limits.ops = *config.ops / config.threads + (t == 0 ? *config.ops % config.threads : 0);
        }
        run.per_thread[t] = workload(mq, handles[t], seed, config.prefill + t, config.threads,
                                     limits, config.yield_between_ops, stop);
    });
    for (auto const& h : handles) {
        AttemptStats const& s = h.stats();
        run.attempts.operations += s.operations;
        run.attempts.attempts += s.attempts;
        run.attempts.max_attempts = std::max(run.attempts.max_attempts, s.max_attempts);
    }
    return run;
}

template <class Heap>
QualityRun quality_once(BenchConfig const& config, bool keep_log) {
    MultiQueue<Heap> mq(config.queue_config());
    std::vector<typename MultiQueue<Heap>::Handle> handles;
    handles.reserve(config.threads);
    for (std::size_t t = 0; t < config.threads; ++t) {
        handles.push_back(mq.get_handle(t));
    }

    std::vector<std::uint64_t> share(config.threads, config.deletes / config.threads);
    share[0] += config.deletes % config.threads;

    OperationLog prefill_log(config.prefill);
    handles[0].attach_log(&prefill_log);
    prefill(mq, handles[0], config.prefill, config.seed ^ kPrefillStream);
    handles[0].reset_stats();

    std::vector<OperationLog> logs;
    logs.reserve(config.threads);
    for (std::size_t t = 0; t < config.threads; ++t) {
        // Inserts and deletes are equally likely, so three times the delete
        // share leaves a wide margin.
        logs.emplace_back(3 * share[t] + 1024);
        handles[t].attach_log(&logs[t]);
    }

    QualityRun run;
    run.per_thread.resize(config.threads);
    std::atomic<bool> stop{false};
    std::vector<std::exception_ptr> errors(config.threads);
    run_threads(config, std::nullopt, stop, [&](std::size_t t) {
        Limits limits;
        limits.deletes = share[t];
        try {
            run.per_thread[t] = workload(mq, handles[t], config.seed, config.prefill + t,
                                         config.threads, limits, config.yield_between_ops,
                                         stop);
        } catch (...) {
            errors[t] = std::current_exception();
            stop.store(true);
        }
    });
    for (auto const& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    for (auto& h : handles) {
        h.attach_log(nullptr);
        AttemptStats const& s = h.stats();
        run.attempts.operations += s.operations;
        run.attempts.attempts += s.attempts;
        run.attempts.max_attempts = std::max(run.attempts.max_attempts, s.max_attempts);
    }

    std::vector<std::vector<LogRecord>> raw;
    raw.reserve(config.threads + 1);
    raw.push_back(prefill_log.take());
    for (auto& log : logs) {
        raw.push_back(log.take());
    }
    std::vector<LogRecord> merged = merge_logs(raw);
    run.logged_records = merged.size();
    run.report = replay(merged);
    if (keep_log) {
        run.merged_log = std::move(merged);
    }
    return run;
}

}  // namespace

ThroughputResult run_throughput(BenchConfig const& config) {
    config.validate();
    ThroughputResult result;
    for (std::size_t r = 0; r < config.runs; ++r) {
        result.runs.push_back(with_heap(config.heap, [&]<class Heap>() {
            return throughput_once<Heap>(config, config.seed + r);
        }));
    }
    return result;
}

QualityRun run_quality(BenchConfig const& config, bool keep_log) {
    config.validate();
    // Element values double as replay ids and must stay unique in 32 bits.
    std::uint64_t const max_ids = config.prefill + 3 * config.deletes + 1024 * config.threads;
    if (max_ids > std::numeric_limits<Value>::max()) {
        throw std::invalid_argument("quality run too large for 32-bit element ids");
    }
    return with_heap(config.heap, [&]<class Heap>() { return quality_once<Heap>(config, keep_log); });
}

void write_metadata_json(std::string const& path, BenchConfig const& config,
                         std::string const& command) {
    char host[256] = {};
    if (gethostname(host, sizeof(host) - 1) != 0) {
        host[0] = '\0';
    }
    nlohmann::json j;
    j["command"] = command;
    j["threads"] = config.threads;
    j["factor"] = config.factor;
    j["stickiness"] = config.stickiness;
    j["buffer_size"] = config.buffer_size;
    j["heap"] = std::string(to_string(config.heap));
    j["prefill"] = config.prefill;
    if (config.ops) {
        j["ops"] = *config.ops;
    } else {
        j["duration_s"] = config.duration_s;
    }
    j["runs"] = config.runs;
    j["deletes"] = config.deletes;
    j["seed"] = config.seed;
    j["yield_between_ops"] = config.yield_between_ops;
    j["key_distribution"] = "uniform [0, 2^32-1]";
    j["workload"] = "50/50 insert/deleteMin";
    j["git_revision"] = MULTIQUEUE_GIT_REVISION;
    j["host"] = std::string(host);
    j["hardware_threads"] = std::thread::hardware_concurrency();
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    os << j.dump(2) << '\n';
}

}  // namespace multiqueue
