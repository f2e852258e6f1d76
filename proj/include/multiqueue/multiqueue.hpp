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

#include <algorithm>
#include <array>
#include <atomic>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <new>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "multiqueue/buffered_spq.hpp"
#include "multiqueue/element.hpp"
#include "multiqueue/log_record.hpp"

namespace multiqueue {

#ifdef MULTIQUEUE_PAGE_PADDING
inline constexpr std::size_t kEntryAlignment = 4096;
#else
inline constexpr std::size_t kEntryAlignment = 64;
#endif

struct MultiQueueConfig {
    std::size_t threads = 1;
    std::size_t factor = 4;
    std::size_t buffer_size = kDefaultBufferSize;
    std::size_t stickiness = 1;
    std::uint64_t seed = 1;
    // Elements reserved per main queue at construction.
    std::size_t spq_capacity = std::size_t{1} << 20;
};

/// Which of a thread's three sticky slots a queue choice is for.
enum class Role : std::uint8_t { Insert = 0, Delete1 = 1, Delete2 = 2 };

/// Per-thread lock acquisition statistics.
struct AttemptStats {
    std::uint64_t operations = 0;
    std::uint64_t attempts = 0;
    std::uint64_t max_attempts = 0;

    void record(std::uint64_t n) noexcept {
        ++operations;
        attempts += n;
        max_attempts = std::max(max_attempts, n);
    }
    double mean() const noexcept {
        return operations == 0 ? 0.0 : static_cast<double>(attempts) / static_cast<double>(operations);
    }
};

/// Derives the generator a thread handle uses; exposed so tests can replay
/// queue choices independently.
inline std::mt19937_64 make_thread_rng(std::uint64_t seed, std::size_t thread_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(thread_id)};
    return std::mt19937_64(seq);
}

/// Relaxed concurrent priority queue built from c * p lock-protected
/// buffered sequential queues.
///
/// insert locks a random unlocked queue. delete_min looks at the cached
/// minima of two random queues and deletes from the one with the smaller
/// key. Locks are only ever tried, never waited on. With stickiness s > 1 a
/// thread reuses its previous choices for up to s operations, or until a
/// lock attempt on them fails.
///
/// A failed delete_min (nullopt) only means the chosen queue was empty.
template <SequentialQueue Heap>
class MultiQueue {
   public:
    using HeapFactory = std::function<Heap()>;

    struct alignas(kEntryAlignment) QueueEntry {
        QueueEntry(std::size_t buffer_size, Heap heap) : spq(buffer_size, std::move(heap)) {}

        std::atomic<bool> locked{false};
        // Minimum key of the deletion buffer, written under the lock just
        // before release and read without it.
        std::atomic<WideKey> cached_min{kNoKey};
        std::uint64_t last_stamp = 0;
        BufferedSpq<Heap> spq;
    };
    static_assert(sizeof(QueueEntry) % kEntryAlignment == 0);

    class alignas(64) Handle {
       public:
        Handle(Handle&& other) noexcept
            : mq_(std::exchange(other.mq_, nullptr)),
              id_(other.id_),
              rng_(other.rng_),
              pick_(other.pick_),
              slots_(other.slots_),
              stats_(other.stats_),
              log_(other.log_),
              last_stamp_(other.last_stamp_) {}
        Handle& operator=(Handle&&) = delete;
        Handle(Handle const&) = delete;
        Handle& operator=(Handle const&) = delete;
        ~Handle() {
            if (mq_ != nullptr) {
                mq_->handle_taken_[id_].store(false, std::memory_order_release);
            }
        }

        std::size_t thread_id() const noexcept { return id_; }

        /// Returns the sticky index for the role while its use count is below
        /// s, otherwise draws a uniform index and restarts the count.
        std::size_t pick(Role role) {
            Slot& slot = slots_[static_cast<std::size_t>(role)];
            if (slot.uses < mq_->config_.stickiness) {
                ++slot.uses;
                return slot.index;
            }
            slot.index = pick_(rng_);
            slot.uses = 1;
            return slot.index;
        }

        /// Forces the next pick for the role to draw a fresh index.
        void drop_sticky(Role role) noexcept {
            slots_[static_cast<std::size_t>(role)].uses = mq_->config_.stickiness;
        }

        void attach_log(OperationLog* log) noexcept { log_ = log; }
        AttemptStats const& stats() const noexcept { return stats_; }
        void reset_stats() noexcept { stats_ = {}; }

       private:
        friend class MultiQueue;

        struct Slot {
            std::size_t index = 0;
            std::size_t uses = ~std::size_t{0};
        };

        Handle(MultiQueue& mq, std::size_t id)
            : mq_(&mq),
              id_(id),
              rng_(make_thread_rng(mq.config_.seed, id)),
              pick_(0, mq.num_queues() - 1) {}

        void log(QueueEntry& entry, OpKind kind, Element e) {
            if (log_ == nullptr) {
                return;
            }
            // Stamps are strictly increasing per queue so that a delete always
            // replays after the insert of the same element.
            std::uint64_t stamp = std::max({clock_now_ns(), entry.last_stamp + 1, last_stamp_});
            entry.last_stamp = stamp;
            last_stamp_ = stamp;
            log_->append(LogRecord{stamp, static_cast<std::uint32_t>(id_), kind,
                                   kind == OpKind::DeleteFail ? Key{0} : e.key,
                                   kind == OpKind::DeleteFail ? 0 : e.value});
        }

        MultiQueue* mq_;
        std::size_t id_;
        std::mt19937_64 rng_;
        std::uniform_int_distribution<std::size_t> pick_;
        std::array<Slot, 3> slots_{};
        AttemptStats stats_;
        OperationLog* log_ = nullptr;
        std::uint64_t last_stamp_ = 0;
    };

    explicit MultiQueue(MultiQueueConfig const& config)
        : MultiQueue(config, [cap = config.spq_capacity] { return Heap(cap); }) {}

    MultiQueue(MultiQueueConfig const& config, HeapFactory const& make_heap)
        : config_(validate_config(config)),
          num_queues_(config.threads * config.factor),
          handle_taken_(config.threads) {
        entries_ = alloc_.allocate(num_queues_);
        std::size_t built = 0;
        try {
            for (; built < num_queues_; ++built) {
                std::construct_at(entries_ + built, config_.buffer_size, make_heap());
            }
        } catch (...) {
            std::destroy_n(entries_, built);
            alloc_.deallocate(entries_, num_queues_);
            throw;
        }
    }

    MultiQueue(MultiQueue const&) = delete;
    MultiQueue& operator=(MultiQueue const&) = delete;

    ~MultiQueue() {
        std::destroy_n(entries_, num_queues_);
        alloc_.deallocate(entries_, num_queues_);
    }

    MultiQueueConfig const& config() const noexcept { return config_; }
    std::size_t num_queues() const noexcept { return num_queues_; }

    /// One handle per thread id; asking for a live one again throws.
    Handle get_handle(std::size_t thread_id) {
        if (thread_id >= config_.threads) {
            throw std::out_of_range("thread id out of range");
        }
        if (handle_taken_[thread_id].exchange(true, std::memory_order_acq_rel)) {
            throw std::logic_error("handle for this thread id is already in use");
        }
        return Handle(*this, thread_id);
    }

    void insert(Handle& h, Element e) {
        std::uint64_t attempts = 1;
        std::size_t i = h.pick(Role::Insert);
        while (!try_lock(i)) {
            h.drop_sticky(Role::Insert);
            i = h.pick(Role::Insert);
            ++attempts;
        }
        QueueEntry& entry = entries_[i];
        entry.spq.insert(e);
        entry.cached_min.store(widen(entry.spq.min()), std::memory_order_relaxed);
        h.log(entry, OpKind::Insert, e);
        unlock(i);
        h.stats_.record(attempts);
    }

    std::optional<Element> delete_min(Handle& h) {
        std::uint64_t attempts = 1;
        std::size_t i = h.pick(Role::Delete1);
        std::size_t j = h.pick(Role::Delete2);
        for (;;) {
            if (cached_min(i) > cached_min(j)) {
                std::swap(i, j);
            }
            if (try_lock(i)) {
                break;
            }
            h.drop_sticky(Role::Delete1);
            h.drop_sticky(Role::Delete2);
            i = h.pick(Role::Delete1);
            j = h.pick(Role::Delete2);
            ++attempts;
        }
        QueueEntry& entry = entries_[i];
        std::optional<Element> e = entry.spq.delete_min();
        entry.cached_min.store(widen(entry.spq.min()), std::memory_order_relaxed);
        h.log(entry, e ? OpKind::DeleteSuccess : OpKind::DeleteFail, e.value_or(Element{}));
        unlock(i);
        h.stats_.record(attempts);
        return e;
    }

    /// Never blocks; false when another thread holds the lock.
    bool try_lock(std::size_t i) noexcept {
        std::atomic<bool>& flag = entries_[i].locked;
        return !flag.load(std::memory_order_relaxed) &&
               !flag.exchange(true, std::memory_order_acquire);
    }

    void unlock(std::size_t i) noexcept {
        assert(entries_[i].locked.load(std::memory_order_relaxed) && "unlock without hold");
        entries_[i].locked.store(false, std::memory_order_release);
    }

    /// Possibly stale minimum of queue i; kNoKey when it looked empty.
    WideKey cached_min(std::size_t i) const noexcept {
        return entries_[i].cached_min.load(std::memory_order_relaxed);
    }

    /// Emptiness hint with acquire ordering, for termination detection.
    bool looks_empty(std::size_t i) const noexcept {
        return entries_[i].cached_min.load(std::memory_order_acquire) == kNoKey;
    }

    // The members below read queue contents without locking and must only
    // be called while no other thread uses the queue.

    QueueEntry const& entry(std::size_t i) const noexcept { return entries_[i]; }

    std::size_t size_quiescent() const noexcept {
        std::size_t n = 0;
        for (std::size_t i = 0; i < num_queues_; ++i) {
            n += entries_[i].spq.size();
        }
        return n;
    }

    bool validate_quiescent() const {
        for (std::size_t i = 0; i < num_queues_; ++i) {
            QueueEntry const& e = entries_[i];
            if (e.locked.load() || !e.spq.validate() ||
                e.cached_min.load() != widen(e.spq.min())) {
                return false;
            }
        }
        return true;
    }

    /// Removes and returns every element, queue by queue.
    std::vector<Element> drain_quiescent() {
        std::vector<Element> out;
        out.reserve(size_quiescent());
        for (std::size_t i = 0; i < num_queues_; ++i) {
            QueueEntry& e = entries_[i];
            while (auto x = e.spq.delete_min()) {
                out.push_back(*x);
            }
            e.cached_min.store(kNoKey);
        }
        return out;
    }

   private:
    static MultiQueueConfig const& validate_config(MultiQueueConfig const& c) {
        if (c.threads == 0 || c.factor == 0) {
            throw std::invalid_argument("need at least one thread and a queue factor >= 1");
        }
        if (c.buffer_size == 0 || c.buffer_size > kMaxBufferSize) {
            throw std::invalid_argument("buffer size must be in [1, 256]");
        }
        if (c.stickiness == 0) {
            throw std::invalid_argument("stickiness must be >= 1");
        }
        return c;
    }

    MultiQueueConfig config_;
    std::size_t num_queues_;
    std::allocator<QueueEntry> alloc_;
    QueueEntry* entries_ = nullptr;
    std::vector<std::atomic<bool>> handle_taken_;
};

}  // namespace multiqueue
