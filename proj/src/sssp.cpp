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
#include "multiqueue/sssp.hpp"

#include <chrono>
#include <functional>
#include <queue>
#include <stdexcept>
#include <thread>
#include <utility>

#include "multiqueue/bench.hpp"

namespace multiqueue {

std::vector<std::uint64_t> sequential_dijkstra(Graph const& g, NodeId source) {
    if (source >= g.node_count()) {
        throw std::invalid_argument("source node out of range");
    }
    std::vector<std::uint64_t> dist(g.node_count(), kUnreachable);
    using Entry = std::pair<std::uint64_t, NodeId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
    dist[source] = 0;
    pq.emplace(0, source);
    while (!pq.empty()) {
        auto [d, v] = pq.top();
        pq.pop();
        if (d > dist[v]) {
            continue;
        }
        for (Arc const& a : g.neighbors(v)) {
            std::uint64_t nd = d + a.weight;
            if (nd < dist[a.target]) {
                dist[a.target] = nd;
                pq.emplace(nd, a.target);
            }
        }
    }
    return dist;
}

namespace {

template <class Heap>
SsspResult run_parallel(Graph const& g, NodeId source, SsspConfig const& config) {
    MultiQueueConfig qc;
    qc.threads = config.threads;
    qc.factor = config.factor;
    qc.stickiness = config.stickiness;
    qc.buffer_size = config.buffer_size;
    qc.seed = config.seed;
    qc.spq_capacity = config.spq_capacity;
    MultiQueue<Heap> mq(qc);
    using Handle = typename MultiQueue<Heap>::Handle;

    std::size_t const n = g.node_count();
    auto dist = std::make_unique<std::atomic<std::uint64_t>[]>(n);
    for (std::size_t v = 0; v < n; ++v) {
        dist[v].store(kUnreachable, std::memory_order_relaxed);
    }

    std::vector<Handle> handles;
    handles.reserve(config.threads);
    for (std::size_t t = 0; t < config.threads; ++t) {
        handles.push_back(mq.get_handle(t));
    }

    TerminationDetector detector(config.threads);
    std::atomic<bool> overflow{false};
    std::vector<std::uint64_t> processed(config.threads, 0);

    dist[source].store(0);
    mq.insert(handles[0], Element{0, source});
    detector.note_insert();

    auto worker = [&](std::size_t t) {
        if (config.pin_threads) {
            pin_current_thread(t);
        }
        Handle& h = handles[t];
        std::uint64_t local_processed = 0;
        while (!detector.done() && !overflow.load(std::memory_order_relaxed)) {
            detector.go_active(t);
            if (auto e = mq.delete_min(h)) {
                std::uint64_t const d = e->key;
                NodeId const v = e->value;
                if (d > dist[v].load(std::memory_order_relaxed)) {
                    continue;
                }
                ++local_processed;
                for (Arc const& a : g.neighbors(v)) {
                    std::uint64_t const nd = d + a.weight;
                    std::uint64_t cur = dist[a.target].load(std::memory_order_relaxed);
                    while (nd < cur) {
                        if (dist[a.target].compare_exchange_weak(cur, nd,
                                                                 std::memory_order_relaxed)) {
                            if (nd > std::numeric_limits<Key>::max()) {
                                overflow.store(true);
                                break;
                            }
                            if (config.before_insert) {
                                config.before_insert(t);
                            }
                            mq.insert(h, Element{static_cast<Key>(nd), a.target});
                            detector.note_insert();
                            break;
                        }
                    }
                }
                continue;
            }
            std::uint64_t const epoch = detector.epoch();
            if (!emptiness_check(mq, t)) {
                continue;
            }
            detector.confirm(t, epoch);
            while (!detector.done() && !overflow.load(std::memory_order_relaxed)) {
                if (detector.try_finish(epoch) || detector.epoch() != epoch) {
                    break;
                }
                std::this_thread::yield();
            }
        }
        processed[t] = local_processed;
    };

    auto const start = std::chrono::steady_clock::now();
    std::vector<std::thread> workers;
    workers.reserve(config.threads);
    for (std::size_t t = 0; t < config.threads; ++t) {
        workers.emplace_back(worker, t);
    }
    for (auto& w : workers) {
        w.join();
    }
    auto const stop = std::chrono::steady_clock::now();
    if (overflow.load()) {
        throw std::overflow_error("shortest path distance exceeds the 32-bit key range");
    }

    SsspResult result;
    result.time_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    result.distances.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        result.distances[v] = dist[v].load();
        if (result.distances[v] != kUnreachable) {
            ++result.reachable_nodes;
        }
    }
    for (auto p : processed) {
        result.processed_nodes += p;
    }
    result.left_in_queue = mq.size_quiescent();
    return result;
}

}  // namespace

SsspResult parallel_sssp(Graph const& g, NodeId source, SsspConfig const& config) {
    if (source >= g.node_count()) {
        throw std::invalid_argument("source node out of range");
    }
    if (config.threads == 0) {
        throw std::invalid_argument("need at least one thread");
    }
    return with_heap(config.heap,
                     [&]<class Heap>() { return run_parallel<Heap>(g, source, config); });
}

}  // namespace multiqueue
