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
#include <cassert>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "multiqueue/element.hpp"

namespace multiqueue {

inline constexpr std::size_t kMaxBufferSize = 256;
inline constexpr std::size_t kDefaultBufferSize = 16;

/// Sorted ring buffer of at most `capacity` elements.
///
/// Storage is a fixed power-of-two ring, so the logical capacity can be any
/// value up to kMaxBufferSize without changing the index arithmetic.
class DeletionBuffer {
    static constexpr std::size_t kMask = kMaxBufferSize - 1;
    static_assert((kMaxBufferSize & kMask) == 0);

   public:
    explicit DeletionBuffer(std::size_t capacity) : capacity_(capacity) {}

    std::size_t capacity() const noexcept { return capacity_; }
    std::size_t size() const noexcept { return size_; }
    bool empty() const noexcept { return size_ == 0; }
    bool full() const noexcept { return size_ == capacity_; }

    Element const& operator[](std::size_t i) const noexcept { return ring_[(head_ + i) & kMask]; }
    Element const& front() const noexcept { return (*this)[0]; }
    Element const& back() const noexcept { return (*this)[size_ - 1]; }

    Element pop_front() noexcept {
        assert(size_ > 0);
        Element e = ring_[head_];
        head_ = (head_ + 1) & kMask;
        --size_;
        return e;
    }

    Element pop_back() noexcept {
        assert(size_ > 0);
        --size_;
        return ring_[(head_ + size_) & kMask];
    }

    /// Inserts at the sorted position, shifting whichever side is shorter.
    void insert(Element e) noexcept {
        assert(size_ < capacity_);
        std::size_t lo = 0;
        std::size_t hi = size_;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (e.key < (*this)[mid].key) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        if (lo < size_ / 2) {
            head_ = (head_ - 1) & kMask;
            for (std::size_t i = 0; i < lo; ++i) {
                at(i) = at(i + 1);
            }
        } else {
            for (std::size_t i = size_; i > lo; --i) {
                at(i) = at(i - 1);
            }
        }
        at(lo) = e;
        ++size_;
    }

    std::vector<Element> to_vector() const {
        std::vector<Element> out;
        out.reserve(size_);
        for (std::size_t i = 0; i < size_; ++i) {
            out.push_back((*this)[i]);
        }
        return out;
    }

    bool is_sorted() const noexcept {
        for (std::size_t i = 1; i < size_; ++i) {
            if ((*this)[i].key < (*this)[i - 1].key) {
                return false;
            }
        }
        return true;
    }

   private:
    Element& at(std::size_t i) noexcept { return ring_[(head_ + i) & kMask]; }

    std::size_t capacity_;
    std::size_t head_ = 0;
    std::size_t size_ = 0;
    std::array<Element, kMaxBufferSize> ring_{};
};

/// Unsorted fixed array preceded by its size.
class InsertionBuffer {
   public:
    explicit InsertionBuffer(std::size_t capacity) : capacity_(capacity) {}

    std::size_t capacity() const noexcept { return capacity_; }
    std::size_t size() const noexcept { return size_; }
    bool empty() const noexcept { return size_ == 0; }
    bool full() const noexcept { return size_ == capacity_; }

    void push(Element e) noexcept {
        assert(size_ < capacity_);
        slots_[size_++] = e;
    }

    Element& operator[](std::size_t i) noexcept { return slots_[i]; }
    Element const& operator[](std::size_t i) const noexcept { return slots_[i]; }

    /// Removes slot i by moving the last element into it.
    void remove(std::size_t i) noexcept {
        assert(i < size_);
        slots_[i] = slots_[--size_];
    }

    void clear() noexcept { size_ = 0; }

    std::span<Element const> elements() const noexcept { return {slots_.data(), size_}; }

   private:
    std::size_t capacity_;
    std::size_t size_ = 0;
    std::array<Element, kMaxBufferSize> slots_{};
};

/// A main queue M fronted by an insertion buffer I and a sorted deletion
/// buffer D.
///
/// D always holds the smallest elements of D u I u M, so the minimum is D's
/// first element, and D is empty only when the whole queue is. All traffic
/// between the buffers and M happens in batches of at most b elements.
/// Not thread safe; the owning MultiQueue entry lock guards every call.
template <SequentialQueue Heap>
class BufferedSpq {
   public:
    explicit BufferedSpq(std::size_t buffer_size = kDefaultBufferSize, Heap main = Heap())
        : deletion_(check_buffer_size(buffer_size)),
          insertion_(buffer_size),
          main_(std::move(main)) {
        refill_scratch_.reserve(buffer_size);
    }

    /// Builds a queue with the given buffer and main queue contents, without
    /// checking that they satisfy the buffer invariants. Meant for tests.
    static BufferedSpq with_contents(std::size_t buffer_size, Heap main,
                                     std::span<Element const> insertion,
                                     std::span<Element const> deletion = {}) {
        if (insertion.size() > buffer_size || deletion.size() > buffer_size) {
            throw std::invalid_argument("buffer contents exceed capacity");
        }
        BufferedSpq spq(buffer_size, std::move(main));
        for (Element const& e : insertion) {
            spq.insertion_.push(e);
        }
        for (Element const& e : deletion) {
            spq.deletion_.insert(e);
        }
        return spq;
    }

    std::size_t buffer_size() const noexcept { return deletion_.capacity(); }
    std::size_t size() const noexcept { return deletion_.size() + insertion_.size() + main_.size(); }
    bool empty() const noexcept { return size() == 0; }

    std::optional<Element> min() const noexcept {
        if (deletion_.empty()) {
            return std::nullopt;
        }
        return deletion_.front();
    }

    void insert(Element e) {
        if (deletion_.empty() || e.key < deletion_.back().key) {
            if (!deletion_.full()) {
                deletion_.insert(e);
                return;
            }
            Element displaced = deletion_.pop_back();
            deletion_.insert(e);
            e = displaced;
        }
        if (insertion_.full()) {
            flush_insertion_buffer();
        }
        insertion_.push(e);
    }

    /// Returns nullopt when D is empty, which means this queue is empty.
    std::optional<Element> delete_min() {
        if (deletion_.empty()) {
            return std::nullopt;
        }
        Element e = deletion_.pop_front();
        if (deletion_.empty()) {
            refill_deletion_buffer();
        }
        return e;
    }

    /// Refills an empty D with the smallest elements of M u I: first a batch
    /// from M, then I is scanned and any element smaller than max D is
    /// swapped in.
    void refill_deletion_buffer() {
        assert(deletion_.empty());
        refill_scratch_.clear();
        main_.extract_k_smallest(deletion_.capacity(), refill_scratch_);
        for (Element const& e : refill_scratch_) {
            deletion_.insert(e);
        }
        for (std::size_t i = 0; i < insertion_.size();) {
            if (!deletion_.full()) {
                deletion_.insert(insertion_[i]);
                insertion_.remove(i);
                continue;
            }
            if (insertion_[i].key < deletion_.back().key) {
                Element displaced = deletion_.pop_back();
                deletion_.insert(insertion_[i]);
                insertion_[i] = displaced;
            }
            ++i;
        }
    }

    void flush_insertion_buffer() {
        main_.bulk_insert(insertion_.elements());
        insertion_.clear();
    }

    DeletionBuffer const& deletion_buffer() const noexcept { return deletion_; }
    InsertionBuffer const& insertion_buffer() const noexcept { return insertion_; }
    Heap const& main_queue() const noexcept { return main_; }

    /// Full structural check: capacities, D sorted, D nonempty whenever the
    /// queue is, and max D no larger than anything in I or M.
    bool validate() const {
        if (deletion_.size() > deletion_.capacity() || insertion_.size() > insertion_.capacity()) {
            return false;
        }
        if (!deletion_.is_sorted() || !main_.validate()) {
            return false;
        }
        if (deletion_.empty()) {
            return insertion_.empty() && main_.empty();
        }
        Key const max_d = deletion_.back().key;
        for (Element const& e : insertion_.elements()) {
            if (e.key < max_d) {
                return false;
            }
        }
        if (auto m = main_.top(); m && m->key < max_d) {
            return false;
        }
        return true;
    }

   private:
    static std::size_t check_buffer_size(std::size_t b) {
        if (b == 0 || b > kMaxBufferSize) {
            throw std::invalid_argument("buffer size must be in [1, 256]");
        }
        return b;
    }

    DeletionBuffer deletion_;
    InsertionBuffer insertion_;
    Heap main_;
    std::vector<Element> refill_scratch_;
};

}  // namespace multiqueue
