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
#include "multiqueue/graph.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>

namespace multiqueue {

Graph Graph::from_edges(std::size_t node_count, std::span<Edge const> edges) {
    if (node_count >= std::numeric_limits<NodeId>::max()) {
        throw std::invalid_argument("too many nodes for 32-bit ids");
    }
    Graph g;
    g.offsets_.assign(node_count + 1, 0);
    for (Edge const& e : edges) {
        if (e.source >= node_count || e.target >= node_count) {
            throw std::invalid_argument("edge endpoint out of range");
        }
        ++g.offsets_[e.source + 1];
    }
    for (std::size_t v = 0; v < node_count; ++v) {
        g.offsets_[v + 1] += g.offsets_[v];
    }
    g.arcs_.resize(edges.size());
    std::vector<std::uint64_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
    for (Edge const& e : edges) {
        g.arcs_[fill[e.source]++] = Arc{e.target, e.weight};
    }
    return g;
}

GraphFormat parse_graph_format(std::string_view name) {
    if (name == "dimacs") {
        return GraphFormat::Dimacs;
    }
    if (name == "edges") {
        return GraphFormat::EdgeList;
    }
    throw std::invalid_argument("unknown graph format '" + std::string(name) +
                                "' (expected dimacs or edges)");
}

namespace {

class LineError : public std::runtime_error {
   public:
    LineError(std::size_t line, std::string const& what)
        : std::runtime_error("graph line " + std::to_string(line) + ": " + what) {}
};

// Whitespace tokenizer over one line.
class Fields {
   public:
    explicit Fields(std::string_view line) : rest_(line) {}

    std::optional<std::string_view> next() {
        std::size_t b = rest_.find_first_not_of(" \t\r");
        if (b == std::string_view::npos) {
            rest_ = {};
            return std::nullopt;
        }
        std::size_t e = rest_.find_first_of(" \t\r", b);
        std::string_view tok = rest_.substr(b, e == std::string_view::npos ? e : e - b);
        rest_ = e == std::string_view::npos ? std::string_view{} : rest_.substr(e);
        return tok;
    }

    template <class T>
    std::optional<T> number() {
        auto tok = next();
        if (!tok) {
            return std::nullopt;
        }
        T value{};
        auto [ptr, ec] = std::from_chars(tok->data(), tok->data() + tok->size(), value);
        if (ec != std::errc{} || ptr != tok->data() + tok->size()) {
            return std::nullopt;
        }
        return value;
    }

    bool done() { return !next().has_value(); }

   private:
    std::string_view rest_;
};

Graph read_dimacs(std::istream& is) {
    std::string line;
    std::size_t lineno = 0;
    std::optional<std::uint64_t> n;
    std::uint64_t m = 0;
    std::vector<Edge> edges;
    while (std::getline(is, line)) {
        ++lineno;
        Fields f(line);
        auto tag = f.next();
        if (!tag || *tag == "c") {
            continue;
        }
        if (*tag == "p") {
            if (n) {
                throw LineError(lineno, "duplicate problem line");
            }
            auto kind = f.next();
            auto nodes = f.number<std::uint64_t>();
            auto arcs = f.number<std::uint64_t>();
            if (!kind || *kind != "sp" || !nodes || !arcs || !f.done()) {
                throw LineError(lineno, "expected 'p sp <nodes> <arcs>'");
            }
            n = *nodes;
            m = *arcs;
            edges.reserve(m);
            continue;
        }
        if (*tag == "a") {
            if (!n) {
                throw LineError(lineno, "arc before problem line");
            }
            auto u = f.number<std::uint64_t>();
            auto v = f.number<std::uint64_t>();
            auto w = f.number<Weight>();
            if (!u || !v || !w || !f.done()) {
                throw LineError(lineno, "expected 'a <from> <to> <weight>'");
            }
            if (*u == 0 || *v == 0 || *u > *n || *v > *n) {
                throw LineError(lineno, "node id out of range 1.." + std::to_string(*n));
            }
            edges.push_back(Edge{static_cast<NodeId>(*u - 1), static_cast<NodeId>(*v - 1), *w});
            continue;
        }
        throw LineError(lineno, "unknown line type '" + std::string(*tag) + "'");
    }
    if (!n) {
        throw std::runtime_error("graph: missing 'p sp' problem line");
    }
    if (edges.size() != m) {
        throw std::runtime_error("graph: problem line announces " + std::to_string(m) +
                                 " arcs but " + std::to_string(edges.size()) + " were read");
    }
    return Graph::from_edges(*n, edges);
}

Graph read_edge_list(std::istream& is) {
    std::string line;
    std::size_t lineno = 0;
    std::optional<std::uint64_t> n;
    std::uint64_t m = 0;
    std::vector<Edge> edges;
    while (std::getline(is, line)) {
        ++lineno;
        Fields probe(line);
        auto first = probe.next();
        if (!first || first->front() == '#') {
            continue;
        }
        Fields f(line);
        if (!n) {
            auto nodes = f.number<std::uint64_t>();
            auto count = f.number<std::uint64_t>();
            if (!nodes || !count || !f.done()) {
                throw LineError(lineno, "expected header '<nodes> <edges>'");
            }
            n = *nodes;
            m = *count;
            edges.reserve(m);
            continue;
        }
        auto u = f.number<std::uint64_t>();
        auto v = f.number<std::uint64_t>();
        auto w = f.number<Weight>();
        if (!u || !v || !w || !f.done()) {
            throw LineError(lineno, "expected '<from> <to> <weight>'");
        }
        if (*u >= *n || *v >= *n) {
            throw LineError(lineno, "node id out of range 0.." + std::to_string(*n - 1));
        }
        edges.push_back(Edge{static_cast<NodeId>(*u), static_cast<NodeId>(*v), *w});
    }
    if (!n) {
        throw std::runtime_error("graph: missing '<nodes> <edges>' header");
    }
    if (edges.size() != m) {
        throw std::runtime_error("graph: header announces " + std::to_string(m) + " edges but " +
                                 std::to_string(edges.size()) + " were read");
    }
    return Graph::from_edges(*n, edges);
}

}  // namespace

Graph read_graph(std::istream& is, GraphFormat format) {
    return format == GraphFormat::Dimacs ? read_dimacs(is) : read_edge_list(is);
}

Graph load_graph(std::string const& path, GraphFormat format) {
    std::ifstream is(path);
    if (!is) {
        throw std::runtime_error("cannot open graph file " + path);
    }
    return read_graph(is, format);
}

void write_graph(std::ostream& os, Graph const& g, GraphFormat format) {
    bool const dimacs = format == GraphFormat::Dimacs;
    if (dimacs) {
        os << "p sp " << g.node_count() << ' ' << g.edge_count() << '\n';
    } else {
        os << g.node_count() << ' ' << g.edge_count() << '\n';
    }
    std::uint64_t const base = dimacs ? 1 : 0;
    for (std::size_t v = 0; v < g.node_count(); ++v) {
        for (Arc const& a : g.neighbors(static_cast<NodeId>(v))) {
            if (dimacs) {
                os << "a ";
            }
            os << v + base << ' ' << a.target + base << ' ' << a.weight << '\n';
        }
    }
}

}  // namespace multiqueue
