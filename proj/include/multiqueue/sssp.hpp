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

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "multiqueue/graph.hpp"
#include "multiqueue/heap_kind.hpp"
#include "multiqueue/multiqueue.hpp"

namespace multiqueue {

inline constexpr std::uint64_t kUnreachable = std::numeric_limits<std::uint64_t>::max();

/// Textbook Dijkstra with a binary heap; ground truth for the parallel run.
std::vector<std::uint64_t> sequential_dijkstra(Graph const& g, NodeId source);

/// True iff the `factor` queues designated to `thread`, namely
/// [thread * factor, (thread + 1) * factor), all looked empty when read.
template <SequentialQueue Heap>
bool emptiness_check(MultiQueue<Heap> const& mq, std::size_t thread) {
    std::size_t const c = mq.config().factor;
    for (std::size_t i = thread * c; i < (thread + 1) * c; ++i) {
        if (!mq.looks_empty(i)) {
            return false;
        }
    }
    return true;
}

/// Cooperative termination for workers draining a MultiQueue.
///
/// Every completed insertion bumps a global epoch. A thread that failed to
/// find work reads the epoch, checks its designated queues, and if they are
/// empty records a confirmation for that epoch and stops taking work until
/// the epoch moves. The run is over once every thread holds a confirmation
/// for the current epoch: no queue received an element after its owner saw
/// it empty, and no thread is still processing an element.
class TerminationDetector {
   public:
    explicit TerminationDetector(std::size_t threads) : slots_(threads) {}

    /// Call after an insert has completed (after unlock).
    void note_insert() noexcept { epoch_.fetch_add(1); }

    /// Call before trying to take work; withdraws any confirmation.
    void go_active(std::size_t thread) noexcept { slots_[thread].confirmed.store(kNone); }

    std::uint64_t epoch() const noexcept { return epoch_.load(); }

    /// Records that `thread` saw its designated queues empty after reading
    /// `epoch`.
    void confirm(std::size_t thread, std::uint64_t epoch) noexcept {
        slots_[thread].confirmed.store(epoch);
    }

    /// Declares the run finished if all threads confirmed `epoch` and it is
    /// still current.
    bool try_finish(std::uint64_t epoch) noexcept {
        if (epoch_.load() != epoch) {
            return false;
        }
        for (auto const& s : slots_) {
            if (s.confirmed.load() != epoch) {
                return false;
            }
        }
        if (epoch_.load() != epoch) {
            return false;
        }
        done_.store(true);
        return true;
    }

    bool done() const noexcept { return done_.load(std::memory_order_acquire); }

   private:
    static constexpr std::uint64_t kNone = std::numeric_limits<std::uint64_t>::max();

    struct alignas(64) Slot {
        std::atomic<std::uint64_t> confirmed{kNone};
    };

    alignas(64) std::atomic<std::uint64_t> epoch_{0};
    alignas(64) std::atomic<bool> done_{false};
    std::vector<Slot> slots_;
};

struct SsspConfig {
    std::size_t threads = 1;
    std::size_t factor = 4;
    std::size_t stickiness = 1;
    std::size_t buffer_size = kDefaultBufferSize;
    HeapKind heap = HeapKind::Dary8;
    std::uint64_t seed = 1;
    std::size_t spq_capacity = std::size_t{1} << 16;
    bool pin_threads = false;
    // Called by a worker between improving a distance and inserting the
    // improved entry; used to inject delays in tests.
    std::function<void(std::size_t thread)> before_insert;
};

struct SsspResult {
    std::vector<std::uint64_t> distances;
    std::uint64_t processed_nodes = 0;  // non-stale entries taken and relaxed
    std::uint64_t reachable_nodes = 0;
    std::size_t left_in_queue = 0;  // elements found in the queue after termination
    double time_ms = 0.0;

    double overhead_ratio() const noexcept {
        return reachable_nodes == 0 ? 0.0
                                    : static_cast<double>(processed_nodes) /
                                          static_cast<double>(reachable_nodes);
    }
};

/// Label-correcting Dijkstra driven by a MultiQueue. Workers skip entries
/// whose key exceeds the node's current distance, relax the rest with an
/// atomic min, and insert every improvement. Throws std::overflow_error if a
/// distance does not fit a 32-bit key.
SsspResult parallel_sssp(Graph const& g, NodeId source, SsspConfig const& config);

}  // namespace multiqueue
