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
#include <iosfwd>
#include <map>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "multiqueue/element.hpp"
#include "multiqueue/log_record.hpp"

namespace multiqueue {

/// Order-statistic treap over live elements keyed by (key, elem_id), with
/// lazy delay counters.
///
/// Every node carries `add`, a counter that applies to its whole subtree, and
/// `self`, which applies to the node's own element only. The delay of an
/// element is its `self` plus the sum of `add` over the root-to-node path.
/// Inserting starts a node at delay zero by giving it `add` equal to minus
/// the path sum above it; rotations first push the counters of the two
/// rotated nodes down into their children so no path sum changes.
class StatTree {
   public:
    explicit StatTree(std::uint64_t seed = 0x9e3779b97f4a7c15ULL);

    std::size_t size() const noexcept { return size_of(root_); }
    bool empty() const noexcept { return root_ == kNil; }

    /// Throws std::invalid_argument on a duplicate (key, id).
    void insert(Key key, std::uint64_t id);

    /// Removes (key, id) and returns its delay. Throws std::out_of_range when
    /// absent.
    std::int64_t erase(Key key, std::uint64_t id);

    bool contains(Key key, std::uint64_t id) const noexcept;

    /// Number of live elements whose key is strictly smaller than `key`.
    std::size_t count_less(Key key) const noexcept;

    /// Adds one to the delay of each of the r smallest live elements in
    /// (key, id) order. Requires r <= size().
    void add_delay_prefix(std::size_t r);

    /// Delay of a live element. Throws std::out_of_range when absent.
    std::int64_t delay(Key key, std::uint64_t id) const;

    struct Entry {
        Key key;
        std::uint64_t id;
        std::int64_t delay;
    };
    /// In-order listing of all live elements with their delays.
    std::vector<Entry> entries() const;

    /// Checks search order, heap priorities and subtree sizes.
    bool validate() const;

   private:
    using Index = std::int32_t;
    static constexpr Index kNil = -1;

    struct Node {
        Key key;
        std::uint64_t id;
        std::uint32_t priority;
        Index left;
        Index right;
        std::uint32_t size;
        std::int64_t add;
        std::int64_t self;
    };

    static bool less(Key ka, std::uint64_t ia, Key kb, std::uint64_t ib) noexcept {
        return ka < kb || (ka == kb && ia < ib);
    }

    std::size_t size_of(Index n) const noexcept { return n == kNil ? 0 : nodes_[n].size; }
    void update(Index n) noexcept;
    void push_down(Index n) noexcept;
    Index rotate_right(Index n) noexcept;
    Index rotate_left(Index n) noexcept;
    Index insert_at(Index n, Index fresh, std::int64_t path_sum);
    Index erase_at(Index n, Key key, std::uint64_t id, std::int64_t path_sum, std::int64_t& out);
    Index remove_node(Index n);
    Index allocate(Key key, std::uint64_t id);
    bool validate_at(Index n, std::uint32_t& size_out) const;

    std::vector<Node> nodes_;
    std::vector<Index> free_;
    Index root_ = kNil;
    std::mt19937 rng_;
};

/// Ascending value -> occurrence count.
using Histogram = std::map<std::uint64_t, std::uint64_t>;

struct Summary {
    std::size_t count = 0;
    double mean = 0.0;
    std::uint64_t max = 0;
    std::uint64_t p50 = 0;
    std::uint64_t p90 = 0;
    std::uint64_t p99 = 0;
    std::uint64_t p999 = 0;
};

Summary summarize(std::span<std::uint64_t const> values);
Histogram histogram(std::span<std::uint64_t const> values);

/// Fraction of values that are >= k. A rank error of e corresponds to rank
/// e + 1, so this is the empirical P(rank > k).
double fraction_at_least(std::span<std::uint64_t const> values, std::uint64_t k);

struct QualityReport {
    // One entry per delete in replay order, failed deletes included.
    std::vector<std::uint64_t> rank_errors;
    // Final delay of each successfully deleted element, in deletion order.
    std::vector<std::uint64_t> delays;
    // Delay accumulated by elements still present at the end of the log.
    std::vector<std::uint64_t> surviving_delays;
    std::size_t inserts = 0;
    std::size_t successful_deletes = 0;
    std::size_t failed_deletes = 0;

    Summary rank_error_summary() const { return summarize(rank_errors); }
    Summary delay_summary() const { return summarize(delays); }
};

/// k-way merge of per-thread logs by timestamp, ties broken by thread id.
/// Throws std::invalid_argument if an input is not timestamp-sorted.
std::vector<LogRecord> merge_logs(std::span<std::vector<LogRecord> const> logs);

/// Sequentially replays a global operation sequence and scores every delete.
///
/// A successful delete of x scores the number of live elements with a
/// strictly smaller key and adds one delay to each of them. A failed delete
/// scores the current number of live elements and delays nobody. Throws
/// std::runtime_error on a corrupt log.
QualityReport replay(std::span<LogRecord const> sequence);

/// Text log format, one record per line after a version header:
///   # multiqueue-log v1
///   <timestamp> <thread> <I|D|F> <key> <elem_id>
void write_log(std::ostream& os, std::span<LogRecord const> records);
std::vector<LogRecord> read_log(std::istream& is);

/// Writes <prefix>_summary.csv (metric,percentile,value),
/// <prefix>_rank_errors.csv (rank_error,count) and <prefix>_delays.csv
/// (delay,count).
void write_quality_csv(QualityReport const& report, std::string const& prefix);

// Closed forms for the rank distribution of two-choice deletion from c * p
// queues holding uniformly distributed elements. All throw
// std::invalid_argument unless c * p >= 2.

/// P(rank = i) = (1 - 2/(cp))^(i-1) * 2/(cp), for i >= 1.
double rank_pmf(std::uint64_t i, std::size_t c, std::size_t p);
/// P(rank > k) = (1 - 2/(cp))^k.
double rank_tail(std::uint64_t k, std::size_t c, std::size_t p);
/// cp / 2.
double expected_rank_error(std::size_t c, std::size_t p);
/// cp / 2; delays are geometric with success probability 2/(cp).
double expected_delay(std::size_t c, std::size_t p);

}  // namespace multiqueue
