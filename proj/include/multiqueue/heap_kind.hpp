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

#include <stdexcept>
#include <string>
#include <string_view>

#include "multiqueue/dary_heap.hpp"
#include "multiqueue/merging_heap.hpp"

namespace multiqueue {

/// Main queue used inside each MultiQueue entry.
enum class HeapKind { Dary8, Merging16 };

inline HeapKind parse_heap_kind(std::string_view name) {
    if (name == "dary8") {
        return HeapKind::Dary8;
    }
    if (name == "merging16") {
        return HeapKind::Merging16;
    }
    throw std::invalid_argument("unknown heap kind '" + std::string(name) +
                                "' (expected dary8 or merging16)");
}

inline std::string_view to_string(HeapKind kind) {
    return kind == HeapKind::Dary8 ? "dary8" : "merging16";
}

/// Calls f.template operator()<Heap>() with the heap type for `kind`.
template <class F>
decltype(auto) with_heap(HeapKind kind, F&& f) {
    switch (kind) {
        case HeapKind::Merging16:
            return f.template operator()<MergingHeap>();
        case HeapKind::Dary8:
            break;
    }
    return f.template operator()<DaryHeap>();
}

}  // namespace multiqueue
