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

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "multiqueue/element.hpp"

namespace multiqueue {

enum class OpKind : std::uint8_t { Insert, DeleteSuccess, DeleteFail };

struct LogRecord {
    std::uint64_t timestamp = 0;  // nanoseconds, comparable across threads
    std::uint32_t thread = 0;
    OpKind kind = OpKind::Insert;
    Key key = 0;  // unused for DeleteFail
    std::uint64_t elem_id = 0;

    friend bool operator==(LogRecord const&, LogRecord const&) = default;
};

/// Preallocated append-only per-thread log. Appending past the reserved
/// capacity is an error rather than a reallocation, which would stall the
/// logging thread in the middle of a measurement.
class OperationLog {
   public:
    explicit OperationLog(std::size_t capacity) { records_.reserve(capacity); }

    void append(LogRecord const& r) {
        if (records_.size() == records_.capacity()) {
            throw std::length_error("operation log capacity exceeded (" +
                                    std::to_string(records_.capacity()) +
                                    " records); raise the log capacity");
        }
        records_.push_back(r);
    }

    std::size_t size() const noexcept { return records_.size(); }
    std::size_t capacity() const noexcept { return records_.capacity(); }
    std::vector<LogRecord> const& records() const noexcept { return records_; }
    std::vector<LogRecord> take() noexcept { return std::move(records_); }

   private:
    std::vector<LogRecord> records_;
};

inline std::uint64_t clock_now_ns() noexcept {
    return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(
                                          std::chrono::steady_clock::now().time_since_epoch())
                                          .count());
}

}  // namespace multiqueue
