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
#include "multiqueue/quality.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <tuple>

namespace multiqueue {

StatTree::StatTree(std::uint64_t seed) : rng_(static_cast<std::uint32_t>(seed ^ (seed >> 32))) {}

void StatTree::update(Index n) noexcept {
    Node& node = nodes_[n];
    node.size = static_cast<std::uint32_t>(1 + size_of(node.left) + size_of(node.right));
}

void StatTree::push_down(Index n) noexcept {
    Node& node = nodes_[n];
    if (node.add == 0) {
        return;
    }
    node.self += node.add;
    if (node.left != kNil) {
        nodes_[node.left].add += node.add;
    }
    if (node.right != kNil) {
        nodes_[node.right].add += node.add;
    }
    node.add = 0;
}

StatTree::Index StatTree::rotate_right(Index n) noexcept {
    Index x = nodes_[n].left;
    push_down(n);
    push_down(x);
    nodes_[n].left = nodes_[x].right;
    nodes_[x].right = n;
    update(n);
    update(x);
    return x;
}

StatTree::Index StatTree::rotate_left(Index n) noexcept {
    Index x = nodes_[n].right;
    push_down(n);
    push_down(x);
    nodes_[n].right = nodes_[x].left;
    nodes_[x].left = n;
    update(n);
    update(x);
    return x;
}

StatTree::Index StatTree::allocate(Key key, std::uint64_t id) {
    Node node{key, id, static_cast<std::uint32_t>(rng_()), kNil, kNil, 1, 0, 0};
    if (!free_.empty()) {
        Index n = free_.back();
        free_.pop_back();
        nodes_[n] = node;
        return n;
    }
    nodes_.push_back(node);
    return static_cast<Index>(nodes_.size() - 1);
}

StatTree::Index StatTree::insert_at(Index n, Index fresh, std::int64_t path_sum) {
    if (n == kNil) {
        nodes_[fresh].add = -path_sum;
        return fresh;
    }
    std::int64_t const below = path_sum + nodes_[n].add;
    Node const& f = nodes_[fresh];
    if (less(f.key, f.id, nodes_[n].key, nodes_[n].id)) {
        Index child = insert_at(nodes_[n].left, fresh, below);
        nodes_[n].left = child;
        update(n);
        if (nodes_[child].priority > nodes_[n].priority) {
            n = rotate_right(n);
        }
    } else {
        Index child = insert_at(nodes_[n].right, fresh, below);
        nodes_[n].right = child;
        update(n);
        if (nodes_[child].priority > nodes_[n].priority) {
            n = rotate_left(n);
        }
    }
    return n;
}

void StatTree::insert(Key key, std::uint64_t id) {
    if (contains(key, id)) {
        throw std::invalid_argument("duplicate element in stat tree");
    }
    Index fresh = allocate(key, id);
    root_ = insert_at(root_, fresh, 0);
}

StatTree::Index StatTree::remove_node(Index n) {
    Index l = nodes_[n].left;
    Index r = nodes_[n].right;
    if (l == kNil && r == kNil) {
        free_.push_back(n);
        return kNil;
    }
    if (l == kNil || (r != kNil && nodes_[r].priority > nodes_[l].priority)) {
        Index top = rotate_left(n);
        nodes_[top].left = remove_node(n);
        update(top);
        return top;
    }
    Index top = rotate_right(n);
    nodes_[top].right = remove_node(n);
    update(top);
    return top;
}

StatTree::Index StatTree::erase_at(Index n, Key key, std::uint64_t id, std::int64_t path_sum,
                                   std::int64_t& out) {
    if (n == kNil) {
        throw std::out_of_range("element not in stat tree");
    }
    std::int64_t const here = path_sum + nodes_[n].add;
    if (nodes_[n].key == key && nodes_[n].id == id) {
        out = here + nodes_[n].self;
        return remove_node(n);
    }
    if (less(key, id, nodes_[n].key, nodes_[n].id)) {
        nodes_[n].left = erase_at(nodes_[n].left, key, id, here, out);
    } else {
        nodes_[n].right = erase_at(nodes_[n].right, key, id, here, out);
    }
    update(n);
    return n;
}

std::int64_t StatTree::erase(Key key, std::uint64_t id) {
    std::int64_t d = 0;
    root_ = erase_at(root_, key, id, 0, d);
    return d;
}

bool StatTree::contains(Key key, std::uint64_t id) const noexcept {
    Index n = root_;
    while (n != kNil) {
        Node const& node = nodes_[n];
        if (node.key == key && node.id == id) {
            return true;
        }
        n = less(key, id, node.key, node.id) ? node.left : node.right;
    }
    return false;
}

std::size_t StatTree::count_less(Key key) const noexcept {
    std::size_t count = 0;
    Index n = root_;
    while (n != kNil) {
        Node const& node = nodes_[n];
        if (node.key < key) {
            count += size_of(node.left) + 1;
            n = node.right;
        } else {
            n = node.left;
        }
    }
    return count;
}

void StatTree::add_delay_prefix(std::size_t r) {
    if (r > size()) {
        throw std::invalid_argument("delay prefix longer than tree");
    }
    Index n = root_;
    while (n != kNil && r > 0) {
        Node& node = nodes_[n];
        std::size_t const left = size_of(node.left);
        if (r <= left) {
            n = node.left;
            continue;
        }
        if (node.left != kNil) {
            nodes_[node.left].add += 1;
        }
        node.self += 1;
        r -= left + 1;
        n = node.right;
    }
}

std::int64_t StatTree::delay(Key key, std::uint64_t id) const {
    std::int64_t sum = 0;
    Index n = root_;
    while (n != kNil) {
        Node const& node = nodes_[n];
        sum += node.add;
        if (node.key == key && node.id == id) {
            return sum + node.self;
        }
        n = less(key, id, node.key, node.id) ? node.left : node.right;
    }
    throw std::out_of_range("element not in stat tree");
}

std::vector<StatTree::Entry> StatTree::entries() const {
    std::vector<Entry> out;
    out.reserve(size());
    // Iterative in-order walk carrying the path sum of the ancestors.
    std::vector<std::pair<Index, std::int64_t>> stack;
    Index n = root_;
    std::int64_t sum = 0;
    while (n != kNil || !stack.empty()) {
        while (n != kNil) {
            sum += nodes_[n].add;
            stack.emplace_back(n, sum);
            n = nodes_[n].left;
        }
        auto [top, top_sum] = stack.back();
        stack.pop_back();
        Node const& node = nodes_[top];
        out.push_back(Entry{node.key, node.id, top_sum + node.self});
        n = node.right;
        sum = top_sum;
    }
    return out;
}

bool StatTree::validate_at(Index n, std::uint32_t& size_out) const {
    if (n == kNil) {
        size_out = 0;
        return true;
    }
    Node const& node = nodes_[n];
    std::uint32_t ls = 0;
    std::uint32_t rs = 0;
    if (!validate_at(node.left, ls) || !validate_at(node.right, rs)) {
        return false;
    }
    for (Index c : {node.left, node.right}) {
        if (c != kNil && nodes_[c].priority > node.priority) {
            return false;
        }
    }
    if (node.left != kNil &&
        !less(nodes_[node.left].key, nodes_[node.left].id, node.key, node.id)) {
        return false;
    }
    if (node.right != kNil &&
        !less(node.key, node.id, nodes_[node.right].key, nodes_[node.right].id)) {
        return false;
    }
    size_out = ls + rs + 1;
    return node.size == size_out;
}

bool StatTree::validate() const {
    std::uint32_t s = 0;
    if (!validate_at(root_, s)) {
        return false;
    }
    auto all = entries();
    return std::is_sorted(all.begin(), all.end(), [](Entry const& a, Entry const& b) {
        return less(a.key, a.id, b.key, b.id);
    });
}

Summary summarize(std::span<std::uint64_t const> values) {
    Summary s;
    s.count = values.size();
    if (values.empty()) {
        return s;
    }
    std::vector<std::uint64_t> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    long double total = 0;
    for (auto v : sorted) {
        total += static_cast<long double>(v);
    }
    s.mean = static_cast<double>(total / static_cast<long double>(sorted.size()));
    s.max = sorted.back();
    // Nearest-rank percentiles.
    auto pct = [&](double q) {
        auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
        return sorted[idx == 0 ? 0 : idx - 1];
    };
    s.p50 = pct(0.5);
    s.p90 = pct(0.9);
    s.p99 = pct(0.99);
    s.p999 = pct(0.999);
    return s;
}

Histogram histogram(std::span<std::uint64_t const> values) {
    Histogram h;
    for (auto v : values) {
        ++h[v];
    }
    return h;
}

double fraction_at_least(std::span<std::uint64_t const> values, std::uint64_t k) {
    if (values.empty()) {
        return 0.0;
    }
    auto n = std::count_if(values.begin(), values.end(), [k](std::uint64_t v) { return v >= k; });
    return static_cast<double>(n) / static_cast<double>(values.size());
}

std::vector<LogRecord> merge_logs(std::span<std::vector<LogRecord> const> logs) {
    std::size_t total = 0;
    for (auto const& log : logs) {
        for (std::size_t i = 1; i < log.size(); ++i) {
            if (log[i].timestamp < log[i - 1].timestamp) {
                throw std::invalid_argument("per-thread log is not sorted by timestamp");
            }
        }
        total += log.size();
    }
    // (timestamp, thread, log index, position)
    using Head = std::tuple<std::uint64_t, std::uint32_t, std::size_t, std::size_t>;
    std::priority_queue<Head, std::vector<Head>, std::greater<>> heads;
    for (std::size_t l = 0; l < logs.size(); ++l) {
        if (!logs[l].empty()) {
            heads.emplace(logs[l][0].timestamp, logs[l][0].thread, l, 0);
        }
    }
    std::vector<LogRecord> out;
    out.reserve(total);
    while (!heads.empty()) {
        auto [ts, thread, l, pos] = heads.top();
        heads.pop();
        out.push_back(logs[l][pos]);
        if (pos + 1 < logs[l].size()) {
            LogRecord const& next = logs[l][pos + 1];
            heads.emplace(next.timestamp, next.thread, l, pos + 1);
        }
    }
    return out;
}

QualityReport replay(std::span<LogRecord const> sequence) {
    QualityReport report;
    StatTree tree;
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        LogRecord const& r = sequence[i];
        switch (r.kind) {
            case OpKind::Insert:
                if (tree.contains(r.key, r.elem_id)) {
                    throw std::runtime_error("corrupt log: element " + std::to_string(r.elem_id) +
                                             " inserted twice (record " + std::to_string(i) + ")");
                }
                tree.insert(r.key, r.elem_id);
                ++report.inserts;
                break;
            case OpKind::DeleteSuccess: {
                if (!tree.contains(r.key, r.elem_id)) {
                    throw std::runtime_error("corrupt log: delete of unknown element " +
                                             std::to_string(r.elem_id) + " (record " +
                                             std::to_string(i) + ")");
                }
                std::size_t const smaller = tree.count_less(r.key);
                report.rank_errors.push_back(smaller);
                tree.add_delay_prefix(smaller);
                report.delays.push_back(static_cast<std::uint64_t>(tree.erase(r.key, r.elem_id)));
                ++report.successful_deletes;
                break;
            }
            case OpKind::DeleteFail:
                report.rank_errors.push_back(tree.size());
                ++report.failed_deletes;
                break;
        }
    }
    for (auto const& e : tree.entries()) {
        report.surviving_delays.push_back(static_cast<std::uint64_t>(e.delay));
    }
    return report;
}

namespace {

constexpr char const* kLogHeader = "# multiqueue-log v1";

char kind_char(OpKind k) {
    switch (k) {
        case OpKind::Insert:
            return 'I';
        case OpKind::DeleteSuccess:
            return 'D';
        case OpKind::DeleteFail:
            return 'F';
    }
    return '?';
}

}  // namespace

void write_log(std::ostream& os, std::span<LogRecord const> records) {
    os << kLogHeader << '\n' << "# timestamp thread kind key elem_id\n";
    for (LogRecord const& r : records) {
        os << r.timestamp << ' ' << r.thread << ' ' << kind_char(r.kind) << ' ' << r.key << ' '
           << r.elem_id << '\n';
    }
}

std::vector<LogRecord> read_log(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kLogHeader) {
        throw std::runtime_error("log line 1: expected header '" + std::string(kLogHeader) + "'");
    }
    std::vector<LogRecord> out;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::istringstream fields(line);
        LogRecord r;
        char kind = 0;
        if (!(fields >> r.timestamp >> r.thread >> kind >> r.key >> r.elem_id)) {
            throw std::runtime_error("log line " + std::to_string(lineno) + ": malformed record");
        }
        switch (kind) {
            case 'I':
                r.kind = OpKind::Insert;
                break;
            case 'D':
                r.kind = OpKind::DeleteSuccess;
                break;
            case 'F':
                r.kind = OpKind::DeleteFail;
                break;
            default:
                throw std::runtime_error("log line " + std::to_string(lineno) +
                                         ": unknown operation kind");
        }
        out.push_back(r);
    }
    return out;
}

namespace {

std::ofstream open_csv(std::string const& path) {
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    return os;
}

void write_summary_rows(std::ostream& os, char const* metric, Summary const& s) {
    os << metric << ",count," << s.count << '\n';
    os << metric << ",mean," << s.mean << '\n';
    os << metric << ",50," << s.p50 << '\n';
    os << metric << ",90," << s.p90 << '\n';
    os << metric << ",99," << s.p99 << '\n';
    os << metric << ",99.9," << s.p999 << '\n';
    os << metric << ",100," << s.max << '\n';
}

void write_histogram(std::string const& path, char const* column, Histogram const& h) {
    auto os = open_csv(path);
    os << column << ",count\n";
    for (auto const& [value, count] : h) {
        os << value << ',' << count << '\n';
    }
}

}  // namespace

void write_quality_csv(QualityReport const& report, std::string const& prefix) {
    {
        auto os = open_csv(prefix + "_summary.csv");
        os << "metric,percentile,value\n";
        write_summary_rows(os, "rank_error", report.rank_error_summary());
        write_summary_rows(os, "delay", report.delay_summary());
        write_summary_rows(os, "surviving_delay", summarize(report.surviving_delays));
    }
    write_histogram(prefix + "_rank_errors.csv", "rank_error", histogram(report.rank_errors));
    write_histogram(prefix + "_delays.csv", "delay", histogram(report.delays));
}

namespace {

double two_choice_success(std::size_t c, std::size_t p) {
    double const queues = static_cast<double>(c) * static_cast<double>(p);
    if (!(queues >= 2.0)) {
        throw std::invalid_argument("rank distribution needs c * p >= 2");
    }
    return 2.0 / queues;
}

}  // namespace

double rank_pmf(std::uint64_t i, std::size_t c, std::size_t p) {
    double const q = two_choice_success(c, p);
    if (i == 0) {
        throw std::invalid_argument("ranks start at 1");
    }
    return std::pow(1.0 - q, static_cast<double>(i - 1)) * q;
}

double rank_tail(std::uint64_t k, std::size_t c, std::size_t p) {
    double const q = two_choice_success(c, p);
    return std::pow(1.0 - q, static_cast<double>(k));
}

double expected_rank_error(std::size_t c, std::size_t p) {
    return 1.0 / two_choice_success(c, p);
}

double expected_delay(std::size_t c, std::size_t p) { return 1.0 / two_choice_success(c, p); }

}  // namespace multiqueue
