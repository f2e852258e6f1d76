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
#include <cassert>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "multiqueue/element.hpp"

namespace multiqueue {

/// Merges two sorted runs and splits the result so that `low` receives the
/// |low| smallest elements and `high` the rest, both sorted. `scratch` is
/// reused storage.
inline void merge_split(std::span<Element> low, std::span<Element> high,
                        std::vector<Element>& scratch) {
    if (low.empty() || high.empty() || low.back().key <= high.front().key) {
        return;
    }
    scratch.clear();
    std::merge(low.begin(), low.end(), high.begin(), high.end(), std::back_inserter(scratch),
               KeyLess{});
    std::copy_n(scratch.begin(), low.size(), low.begin());
    std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(low.size()), scratch.end(),
              high.begin());
}

/// Value-returning form of merge_split.
inline std::pair<std::vector<Element>, std::vector<Element>> merge_split(
    std::span<Element const> a, std::span<Element const> b) {
    std::vector<Element> low(a.begin(), a.end());
    std::vector<Element> high(b.begin(), b.end());
    std::vector<Element> scratch;
    merge_split(std::span<Element>(low), std::span<Element>(high), scratch);
    return {std::move(low), std::move(high)};
}

/// Binary heap whose nodes are sorted runs of `node_width` elements.
///
/// Nodes are stored back to back in one array: node i occupies
/// [i * k, (i + 1) * k). Every node except the last is full, and every element
/// of a node is no smaller than every element of its parent. Compare-and-swap
/// in sift operations becomes merge-and-split of whole runs.
class MergingHeap {
   public:
    static constexpr std::size_t kDefaultNodeWidth = 16;
    static constexpr std::size_t kDefaultCapacity = std::size_t{1} << 20;

    explicit MergingHeap(std::size_t capacity = kDefaultCapacity,
                         std::size_t node_width = kDefaultNodeWidth)
        : k_(node_width) {
        if (k_ == 0) {
            throw std::invalid_argument("merging heap needs node width >= 1");
        }
        data_.reserve(capacity);
        scratch_.reserve(3 * k_);
        spill_.reserve(3 * k_);
        batch_.reserve(k_);
    }

    std::size_t node_width() const noexcept { return k_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }
    std::size_t node_count() const noexcept { return (data_.size() + k_ - 1) / k_; }

    std::optional<Element> top() const noexcept {
        if (data_.empty()) {
            return std::nullopt;
        }
        return data_.front();
    }

    void insert(Element e) {
        data_.push_back(e);
        // Keep the last run sorted by walking e backwards into place.
        std::size_t const start = (data_.size() - 1) / k_ * k_;
        for (std::size_t i = data_.size() - 1; i > start && e.key < data_[i - 1].key; --i) {
            std::swap(data_[i], data_[i - 1]);
        }
        sift_up(node_count() - 1);
    }

    void bulk_insert(std::span<Element const> batch) {
        batch_.assign(batch.begin(), batch.end());
        std::sort(batch_.begin(), batch_.end(), KeyLess{});
        std::size_t pos = 0;
        while (pos < batch_.size()) {
            std::size_t const fill = data_.size() % k_;
            std::size_t const take = std::min(k_ - fill, batch_.size() - pos);
            auto const old_size = static_cast<std::ptrdiff_t>(data_.size());
            data_.insert(data_.end(), batch_.begin() + static_cast<std::ptrdiff_t>(pos),
                         batch_.begin() + static_cast<std::ptrdiff_t>(pos + take));
            if (fill != 0) {
                std::inplace_merge(data_.begin() + (old_size - static_cast<std::ptrdiff_t>(fill)),
                                   data_.begin() + old_size, data_.end(), KeyLess{});
            }
            pos += take;
            sift_up(node_count() - 1);
        }
    }

    std::optional<Element> delete_min() {
        if (data_.empty()) {
            return std::nullopt;
        }
        Element result = data_.front();
        if (data_.size() <= k_) {
            data_.erase(data_.begin());
            return result;
        }
        // Close the gap in the root and back-fill it with the largest element
        // of the last node.
        std::copy(data_.begin() + 1, data_.begin() + static_cast<std::ptrdiff_t>(k_),
                  data_.begin());
        Element filler = data_.back();
        data_.pop_back();
        std::size_t i = k_ - 1;
        for (; i > 0 && filler.key < data_[i - 1].key; --i) {
            data_[i] = data_[i - 1];
        }
        data_[i] = filler;
        sift_down(0);
        return result;
    }

    /// Appends up to k smallest elements to out in ascending order. Whole root
    /// runs are removed at once while at least a full run is still wanted.
    void extract_k_smallest(std::size_t k, std::vector<Element>& out) {
        while (k > 0 && !data_.empty()) {
            std::size_t const root_size = std::min(k_, data_.size());
            if (k >= root_size) {
                out.insert(out.end(), data_.begin(),
                           data_.begin() + static_cast<std::ptrdiff_t>(root_size));
                remove_root_node();
                k -= root_size;
            } else {
                out.push_back(*delete_min());
                --k;
            }
        }
    }

    bool validate() const noexcept {
        std::size_t const n = node_count();
        for (std::size_t i = 0; i < n; ++i) {
            auto run = node(i);
            if (!std::is_sorted(run.begin(), run.end(), KeyLess{})) {
                return false;
            }
            if (i + 1 < n && run.size() != k_) {
                return false;
            }
            if (i > 0 && run.front().key < node((i - 1) / 2).back().key) {
                return false;
            }
        }
        return true;
    }

    std::span<Element const> node(std::size_t i) const noexcept {
        std::size_t const begin = i * k_;
        std::size_t const end = std::min(begin + k_, data_.size());
        return std::span<Element const>(data_).subspan(begin, end - begin);
    }

   private:
    std::span<Element> node_mut(std::size_t i) noexcept {
        std::size_t const begin = i * k_;
        std::size_t const end = std::min(begin + k_, data_.size());
        return std::span<Element>(data_).subspan(begin, end - begin);
    }

    bool has_node(std::size_t i) const noexcept { return i * k_ < data_.size(); }

    void sift_up(std::size_t i) {
        while (i > 0) {
            std::size_t const p = (i - 1) / 2;
            auto parent = node_mut(p);
            auto child = node_mut(i);
            if (parent.back().key <= child.front().key) {
                break;
            }
            merge_split(parent, child, scratch_);
            i = p;
        }
    }

    void sift_down(std::size_t i) {
        for (;;) {
            std::size_t const l = 2 * i + 1;
            std::size_t const r = l + 1;
            if (!has_node(l)) {
                return;
            }
            auto cur = node_mut(i);
            auto left = node_mut(l);
            if (!has_node(r)) {
                if (cur.back().key <= left.front().key) {
                    return;
                }
                merge_split(cur, left, scratch_);
                i = l;
                continue;
            }
            auto right = node_mut(r);
            if (cur.back().key <= left.front().key && cur.back().key <= right.front().key) {
                return;
            }
            bool const left_is_big = right.back().key <= left.back().key;
            std::size_t const big_index = left_is_big ? l : r;
            auto big = left_is_big ? left : right;
            auto small = left_is_big ? right : left;

            // children = merge(left, right); the node keeps the |cur|
            // smallest of cur u children, taking `taken` of them from the
            // children.
            scratch_.clear();
            std::merge(left.begin(), left.end(), right.begin(), right.end(),
                       std::back_inserter(scratch_), KeyLess{});
            std::size_t kept = 0;
            std::size_t taken = 0;
            while (kept + taken < cur.size()) {
                if (taken < scratch_.size() && scratch_[taken].key < cur[kept].key) {
                    ++taken;
                } else {
                    ++kept;
                }
            }
            auto const children = std::span<Element const>(scratch_);
            auto const cur_rest = std::span<Element const>(cur).subspan(kept);
            auto const child_rest = children.subspan(taken);

            spill_.clear();
            std::merge(cur.begin(), cur.begin() + static_cast<std::ptrdiff_t>(kept),
                       children.begin(), children.begin() + static_cast<std::ptrdiff_t>(taken),
                       std::back_inserter(spill_), KeyLess{});
            if (has_node(2 * big_index + 1)) {
                // Both children are full here. The big child takes the
                // largest former child elements, all no larger than its old
                // maximum, so its subtree stays valid; displaced elements of
                // the node go to the small child, which descends.
                auto const big_part = child_rest.subspan(child_rest.size() - big.size());
                auto const small_part = child_rest.first(child_rest.size() - big.size());
                std::merge(cur_rest.begin(), cur_rest.end(), small_part.begin(), small_part.end(),
                           std::back_inserter(spill_), KeyLess{});
                spill_.insert(spill_.end(), big_part.begin(), big_part.end());
            } else {
                // A childless big node may take anything.
                std::merge(cur_rest.begin(), cur_rest.end(), child_rest.begin(), child_rest.end(),
                           std::back_inserter(spill_), KeyLess{});
            }
            auto it = std::copy_n(spill_.begin(), cur.size(), cur.begin()) - cur.begin();
            auto src = spill_.begin() + it;
            std::copy_n(src, small.size(), small.begin());
            std::copy_n(src + static_cast<std::ptrdiff_t>(small.size()), big.size(), big.begin());
            i = left_is_big ? r : l;
        }
    }

    void remove_root_node() {
        std::size_t const n = node_count();
        if (n == 1) {
            data_.clear();
            return;
        }
        std::size_t const last_begin = (n - 1) * k_;
        std::size_t const m = data_.size() - last_begin;
        if (n == 2) {
            std::copy(data_.begin() + static_cast<std::ptrdiff_t>(last_begin), data_.end(),
                      data_.begin());
            data_.resize(m);
            return;
        }
        // New root: the last node plus the k - m largest elements of the
        // second-to-last node, which then becomes the partial frontier node.
        std::size_t const prev_begin = (n - 2) * k_;
        auto const tail = data_.begin() + static_cast<std::ptrdiff_t>(prev_begin + m);
        auto const last = data_.begin() + static_cast<std::ptrdiff_t>(last_begin);
        scratch_.clear();
        std::merge(tail, last, last, data_.end(), std::back_inserter(scratch_), KeyLess{});
        std::copy(scratch_.begin(), scratch_.end(), data_.begin());
        data_.resize(prev_begin + m);
        sift_down(0);
    }

    std::size_t k_;
    std::vector<Element> data_;
    std::vector<Element> scratch_;
    std::vector<Element> spill_;
    std::vector<Element> batch_;
};

}  // namespace multiqueue
