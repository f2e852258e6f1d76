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
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace multiqueue {

using NodeId = std::uint32_t;
using Weight = std::uint32_t;

struct Arc {
    NodeId target;
    Weight weight;
    friend bool operator==(Arc const&, Arc const&) = default;
};

struct Edge {
    NodeId source;
    NodeId target;
    Weight weight;
};

/// Directed graph in compressed adjacency form.
class Graph {
   public:
    Graph() : offsets_{0} {}

    /// Builds the adjacency arrays; arcs of a node keep their input order.
    /// Throws std::invalid_argument if an endpoint is >= node_count.
    static Graph from_edges(std::size_t node_count, std::span<Edge const> edges);

    std::size_t node_count() const noexcept { return offsets_.size() - 1; }
    std::size_t edge_count() const noexcept { return arcs_.size(); }

    std::span<Arc const> neighbors(NodeId v) const noexcept {
        return std::span<Arc const>(arcs_).subspan(offsets_[v], offsets_[v + 1] - offsets_[v]);
    }

    std::vector<std::uint64_t> const& offsets() const noexcept { return offsets_; }
    std::vector<Arc> const& arcs() const noexcept { return arcs_; }

    friend bool operator==(Graph const&, Graph const&) = default;

   private:
    std::vector<std::uint64_t> offsets_;
    std::vector<Arc> arcs_;
};

enum class GraphFormat {
    // "c" comments, "p sp <n> <m>" header, "a <u> <v> <w>" arcs, 1-based ids.
    Dimacs,
    // "#" comments, "<n> <m>" header, then "<u> <v> <w>" lines, 0-based ids.
    EdgeList,
};

GraphFormat parse_graph_format(std::string_view name);

/// Throws std::runtime_error naming the offending line on malformed input.
Graph read_graph(std::istream& is, GraphFormat format);
Graph load_graph(std::string const& path, GraphFormat format);
void write_graph(std::ostream& os, Graph const& g, GraphFormat format);

}  // namespace multiqueue
