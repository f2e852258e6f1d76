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

#include <cassert>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "multiqueue/element.hpp"

namespace multiqueue {

/// Implicit d-ary min-heap over a dense array.
///
/// Capacity is reserved up front so that the array rarely has to grow while
/// the owning queue is locked; when it does, std::vector doubles it.
class DaryHeap {
   public:
    static constexpr std::size_t kDefaultArity = 8;
    static constexpr std::size_t kDefaultCapacity = std::size_t{1} << 20;

    explicit DaryHeap(std::size_t capacity = kDefaultCapacity, std::size_t arity = kDefaultArity)
        : arity_(arity) {
        if (arity_ < 2) {
            throw std::invalid_argument("d-ary heap needs arity >= 2");
        }
        slots_.reserve(capacity);
    }

    std::size_t arity() const noexcept { return arity_; }
    std::size_t size() const noexcept { return slots_.size(); }
    bool empty() const noexcept { return slots_.empty(); }
    std::size_t capacity() const noexcept { return slots_.capacity(); }

    std::optional<Element> top() const noexcept {
        if (slots_.empty()) {
            return std::nullopt;
        }
        return slots_.front();
    }

    void insert(Element e) {
        slots_.push_back(e);
        sift_up(slots_.size() - 1);
    }

    void bulk_insert(std::span<Element const> batch) {
        for (Element const& e : batch) {
            insert(e);
        }
    }

    std::optional<Element> delete_min() {
        if (slots_.empty()) {
            return std::nullopt;
        }
        Element result = slots_.front();
        Element last = slots_.back();
        slots_.pop_back();
        if (!slots_.empty()) {
            sift_down_hole(0, last);
        }
        return result;
    }

    /// Appends up to k smallest elements to out in ascending order.
    void extract_k_smallest(std::size_t k, std::vector<Element>& out) {
        while (k-- > 0 && !slots_.empty()) {
            out.push_back(*delete_min());
        }
    }

    bool validate() const noexcept {
        for (std::size_t i = 1; i < slots_.size(); ++i) {
            if (slots_[i].key < slots_[parent(i)].key) {
                return false;
            }
        }
        return true;
    }

    std::span<Element const> raw() const noexcept { return slots_; }

   private:
    std::size_t parent(std::size_t i) const noexcept { return (i - 1) / arity_; }
    std::size_t first_child(std::size_t i) const noexcept { return i * arity_ + 1; }

    void sift_up(std::size_t i) {
        Element e = slots_[i];
        while (i > 0) {
            std::size_t p = parent(i);
            if (!(e.key < slots_[p].key)) {
                break;
            }
            slots_[i] = slots_[p];
            i = p;
        }
        slots_[i] = e;
    }

    // Moves the hole at i down to where e fits and stores e there.
    void sift_down_hole(std::size_t i, Element e) {
        std::size_t const n = slots_.size();
        for (;;) {
            std::size_t first = first_child(i);
            if (first >= n) {
                break;
            }
            std::size_t last = first + arity_ < n ? first + arity_ : n;
            std::size_t best = first;
            for (std::size_t c = first + 1; c < last; ++c) {
                if (slots_[c].key < slots_[best].key) {
                    best = c;
                }
            }
            if (!(slots_[best].key < e.key)) {
                break;
            }
            slots_[i] = slots_[best];
            i = best;
        }
        slots_[i] = e;
    }

    std::size_t arity_;
    std::vector<Element> slots_;
};

}  // namespace multiqueue
