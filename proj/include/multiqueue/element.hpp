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

#include <compare>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace multiqueue {

using Key = std::uint32_t;
using Value = std::uint32_t;

/// Key-value pair; a smaller key means higher priority.
struct Element {
    Key key = 0;
    Value value = 0;

    friend constexpr bool operator==(Element const&, Element const&) = default;
};

/// Orders elements by key only, the order every queue in this library uses.
struct KeyLess {
    constexpr bool operator()(Element const& a, Element const& b) const noexcept {
        return a.key < b.key;
    }
};

/// A key widened to 64 bits so that "no minimum" is representable without
/// stealing a value from the 32-bit key range.
using WideKey = std::uint64_t;
inline constexpr WideKey kNoKey = ~WideKey{0};

constexpr WideKey widen(std::optional<Element> const& e) noexcept {
    return e ? WideKey{e->key} : kNoKey;
}

/// The operations a main queue must offer to sit behind the buffers.
template <class Q>
concept SequentialQueue = requires(Q q, Q const cq, Element e, std::span<Element const> batch,
                                   std::size_t k, std::vector<Element>& out) {
    { q.insert(e) } -> std::same_as<void>;
    { q.delete_min() } -> std::same_as<std::optional<Element>>;
    { q.bulk_insert(batch) } -> std::same_as<void>;
    { q.extract_k_smallest(k, out) } -> std::same_as<void>;
    { cq.top() } -> std::same_as<std::optional<Element>>;
    { cq.size() } -> std::convertible_to<std::size_t>;
    { cq.empty() } -> std::convertible_to<bool>;
    { cq.validate() } -> std::convertible_to<bool>;
};

}  // namespace multiqueue
