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
// Acceptance suite. Runs every criterion at its stated tolerance and prints
// one PASS / FAIL / SKIP line per criterion. Exits nonzero if any criterion
// fails.
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mq_checks.hpp"
#include "multiqueue/bench.hpp"
#include "multiqueue/quality.hpp"
#include "multiqueue/sssp.hpp"
#include "oracles.hpp"
#include "spq_properties.hpp"

using namespace multiqueue;
using namespace multiqueue::testing;

namespace {

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
    Verdict verdict;
    std::string detail;
};

Outcome pass_if(bool ok, std::string detail) {
    return {ok ? Verdict::Pass : Verdict::Fail, std::move(detail)};
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(char const* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), format, args...);
    return buf;
}

bool oversubscribed(std::size_t threads) { return std::thread::hardware_concurrency() < threads; }

BenchConfig quality_config(std::size_t c, std::size_t p, std::size_t s, std::uint64_t seed) {
    BenchConfig cfg;
    cfg.threads = p;
    cfg.factor = c;
    cfg.stickiness = s;
    cfg.prefill = 100'000;
    cfg.deletes = 100'000;
    cfg.seed = seed;
    cfg.spq_capacity = 1 << 16;
    cfg.pin_threads = !oversubscribed(p);
    cfg.yield_between_ops = oversubscribed(p);
    return cfg;
}

double mean_of(std::vector<std::uint64_t> const& v) { return summarize(v).mean; }

// Quality runs shared by criteria 3, 4 and 5.
struct QualityCache {
    std::map<std::pair<std::size_t, std::size_t>, QualityReport> reports;
    std::map<std::pair<std::size_t, std::size_t>, double> seconds;

    QualityReport const& get(std::size_t c, std::size_t p) {
        auto key = std::make_pair(c, p);
        if (!reports.contains(key)) {
            auto start = Clock::now();
            reports[key] = run_quality(quality_config(c, p, 1, 1)).report;
            seconds[key] = seconds_since(start);
        }
        return reports[key];
    }
};

QualityCache quality_cache;

std::string mode_note(std::size_t p) {
    return oversubscribed(p) ? " [host has " + std::to_string(std::thread::hardware_concurrency()) +
                                   " hw threads: workers yield between ops]"
                             : "";
}

Outcome sequential_exactness() {
    auto start = Clock::now();
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        if (auto msg = check_sequential_exactness<DaryHeap>(seed, 100'000); !msg.empty()) {
            return {Verdict::Fail, "dary8 seed " + std::to_string(seed) + ": " + msg};
        }
        if (auto msg = check_sequential_exactness<MergingHeap>(seed, 100'000); !msg.empty()) {
            return {Verdict::Fail, "merging16 seed " + std::to_string(seed) + ": " + msg};
        }
    }
    BenchConfig cfg = quality_config(1, 1, 1, 7);
    cfg.prefill = 0;
    cfg.deletes = 50'000;
    auto report = run_quality(cfg).report;
    auto const max_error = summarize(report.rank_errors).max;
    double const t = seconds_since(start);
    return pass_if(max_error == 0 && t < 5.0,
                   fmt("6 scripts of 1e5 ops match multiset; logged run max rank error %llu; "
                       "%.2f s (limit 5 s)",
                       static_cast<unsigned long long>(max_error), t));
}

Outcome replay_oracle() {
    auto start = Clock::now();
    std::mt19937_64 rng(2024);
    std::size_t ops_total = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t const ops = 1 + rng() % 10'000;
        ops_total += ops;
        auto log = random_log(rng, ops, 1 + static_cast<Key>(rng() % 5000));
        NaiveReplay naive(log);
        auto report = replay(log);
        if (report.rank_errors != naive.rank_errors || report.delays != naive.delays ||
            report.surviving_delays != naive.surviving) {
            return {Verdict::Fail, "log " + std::to_string(trial) + " differs from naive oracle"};
        }
    }
    double const t = seconds_since(start);
    return pass_if(t < 30.0, fmt("100 logs (%zu ops) match naive oracle exactly; %.2f s (limit 30 s)",
                                 ops_total, t));
}

Outcome expected_rank_error_check() {
    std::string detail;
    bool ok = true;
    for (auto [c, p] : {std::pair<std::size_t, std::size_t>{2, 4}, {2, 8}, {4, 8}}) {
        auto const& r = quality_cache.get(c, p);
        double const model = expected_rank_error(c, p);
        double const mean = mean_of(r.rank_errors);
        double const t = quality_cache.seconds[{c, p}];
        bool const in = mean >= 0.5 * model && mean <= 3.0 * model && t < 60.0;
        ok = ok && in;
        detail += fmt("(c=%zu,p=%zu) mean %.2f vs cp/2=%.0f ratio %.2f %.1fs; ", c, p, mean, model,
                      mean / model, t);
    }
    return pass_if(ok, detail + "band [0.5, 3]" + mode_note(8));
}

Outcome rank_delay_symmetry() {
    std::string detail;
    bool ok = true;
    for (auto [c, p] : {std::pair<std::size_t, std::size_t>{2, 4}, {2, 8}, {4, 8}}) {
        auto const& r = quality_cache.get(c, p);
        double const rank = mean_of(r.rank_errors);
        double const delay = mean_of(r.delays);
        double const rel = std::abs(delay - rank) / rank;
        ok = ok && rel < 0.25;
        detail += fmt("(c=%zu,p=%zu) delay %.2f rank %.2f rel %.3f; ", c, p, delay, rank, rel);
    }
    return pass_if(ok, detail + "limit 0.25");
}

Outcome tail_shape() {
    auto const& r = quality_cache.get(2, 8);
    double const empirical = fraction_at_least(r.rank_errors, 16);
    double const model = rank_tail(16, 2, 8);
    double const gap = std::abs(empirical - model);
    return pass_if(gap <= 0.15, fmt("P(rank >= 16) empirical %.4f vs (1-2/16)^16 = %.4f, gap %.4f "
                                    "(limit 0.15)",
                                    empirical, model, gap) +
                                    mode_note(8));
}

Outcome stickiness_trend() {
    int monotone_seeds = 0;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        std::vector<double> means;
        for (std::size_t s : {1u, 4u, 8u}) {
            auto cfg = quality_config(4, 8, s, seed);
            means.push_back(mean_of(run_quality(cfg).report.rank_errors));
        }
        bool const monotone = means[0] <= means[1] && means[1] <= means[2];
        monotone_seeds += monotone ? 1 : 0;
        detail += fmt("seed %llu: %.1f/%.1f/%.1f%s; ", static_cast<unsigned long long>(seed),
                      means[0], means[1], means[2], monotone ? "" : " (not monotone)");
    }
    return pass_if(monotone_seeds >= 2, detail + fmt("%d of 3 seeds nondecreasing", monotone_seeds) +
                                            mode_note(8));
}

Outcome buffered_spq_suite() {
    std::mt19937_64 rng(77);
    std::size_t ops_total = 0;
    for (int script = 0; script < 10'000; ++script) {
        std::size_t const b = script % 4 == 0 ? 1 + rng() % 256 : 1 + rng() % 32;
        std::size_t const ops = 1 + rng() % 400;
        ops_total += ops;
        std::string msg = script % 2 == 0
                              ? check_buffered_script(rng, b, ops, DaryHeap(512, 8))
                              : check_buffered_script(rng, b, ops, MergingHeap(512, 16));
        if (msg.empty()) {
            msg = script % 2 == 0 ? check_refill_equivalence(rng, b, DaryHeap(2048, 8))
                                  : check_refill_equivalence(rng, b, MergingHeap(2048, 16));
        }
        if (!msg.empty()) {
            return {Verdict::Fail, fmt("script %d (b=%zu): ", script, b) + msg};
        }
    }
    return {Verdict::Pass, fmt("10000 scripts (%zu ops) and 10000 refill comparisons, "
                               "0 violations",
                               ops_total)};
}

Outcome merging_equivalence() {
    std::mt19937_64 rng(88);
    for (int script = 0; script < 1000; ++script) {
        if (auto msg = check_merging_vs_dary(rng, 10'000, 16); !msg.empty()) {
            return {Verdict::Fail, fmt("script %d: ", script) + msg};
        }
    }
    return {Verdict::Pass, "1000 scripts of 1e4 ops: k=16 merging heap matches 8-ary heap"};
}

Outcome wait_freedom() {
    std::string detail;
    bool ok = true;
    for (std::size_t c : {2u, 4u}) {
        auto out = run_tagged_stress(8, c, 500'000, 90 + c);
        double const bound = static_cast<double>(c) / static_cast<double>(c - 1) + 0.5;
        bool const fine = out.max_attempts <= 50 && out.mean_attempts() <= bound &&
                          out.operations == 1'000'000;
        ok = ok && fine;
        detail += fmt("c=%zu: %llu ops, max attempts %llu (limit 50), mean %.4f (limit %.3f); ", c,
                      static_cast<unsigned long long>(out.operations),
                      static_cast<unsigned long long>(out.max_attempts), out.mean_attempts(),
                      bound);
    }
    return pass_if(ok, detail + "p=8");
}

Outcome conservation() {
    auto out = run_tagged_stress(8, 4, 1'000'000, 100);
    auto merging = run_tagged_stress<MergingHeap>(8, 2, 1'000'000, 101, 4);
    bool const ok =
        out.lost == 0 && out.duplicated == 0 && merging.lost == 0 && merging.duplicated == 0;
    return pass_if(ok, fmt("p=8, 1e6 tags (dary8, c=4): lost %llu dup %llu; "
                           "1e6 tags (merging16, c=2, s=4): lost %llu dup %llu",
                           static_cast<unsigned long long>(out.lost),
                           static_cast<unsigned long long>(out.duplicated),
                           static_cast<unsigned long long>(merging.lost),
                           static_cast<unsigned long long>(merging.duplicated)));
}

Outcome sssp_correctness() {
    std::mt19937_64 rng(111);
    std::vector<std::pair<std::string, Graph>> graphs;
    for (int i = 0; i < 20; ++i) {
        std::size_t const n = i < 5 ? 10'000 : 100 + rng() % 5000;
        graphs.emplace_back("random" + std::to_string(i), random_graph(rng, n, 1 + rng() % 6, i % 4 != 3));
    }
    graphs.emplace_back("path", path_graph(2000));
    graphs.emplace_back("star", star_graph(2000));
    graphs.emplace_back("grid", grid_graph(60, 60));

    struct Setting {
        std::size_t c;
        std::size_t s;
        HeapKind heap;
    };
    std::vector<Setting> const settings{{1, 1, HeapKind::Dary8},
                                        {2, 1, HeapKind::Dary8},
                                        {4, 1, HeapKind::Merging16},
                                        {2, 4, HeapKind::Merging16},
                                        {4, 8, HeapKind::Dary8}};
    std::size_t runs = 0;
    double worst_overhead = 0;
    for (auto const& [name, g] : graphs) {
        auto const expected = sequential_dijkstra(g, 0);
        for (std::size_t p : {1u, 2u, 4u, 8u}) {
            for (auto const& st : settings) {
                SsspConfig cfg;
                cfg.threads = p;
                cfg.factor = st.c;
                cfg.stickiness = st.s;
                cfg.heap = st.heap;
                cfg.seed = runs + 1;
                auto r = parallel_sssp(g, 0, cfg);
                ++runs;
                if (r.distances != expected) {
                    return {Verdict::Fail, fmt("%s p=%zu c=%zu s=%zu: distances differ", name.c_str(),
                                               p, st.c, st.s)};
                }
                worst_overhead = std::max(worst_overhead, r.overhead_ratio());
            }
        }
    }

    std::size_t trials = 0;
    for (; trials < 1000; ++trials) {
        auto g = random_graph(rng, 50 + rng() % 200, 1 + rng() % 3, true);
        auto const expected = sequential_dijkstra(g, 0);
        SsspConfig cfg;
        cfg.threads = 2 + trials % 7;
        cfg.factor = 1 + trials % 4;
        cfg.stickiness = 1 + trials % 3;
        cfg.seed = trials;
        cfg.spq_capacity = 1 << 10;
        std::uint64_t const stall_every = 3 + trials % 11;
        std::atomic<std::uint64_t> calls{0};
        cfg.before_insert = [&calls, stall_every](std::size_t) {
            if (calls.fetch_add(1) % stall_every == 0) {
                std::this_thread::sleep_for(std::chrono::microseconds(50));
            }
        };
        auto r = parallel_sssp(g, 0, cfg);
        if (r.distances != expected || r.left_in_queue != 0) {
            return {Verdict::Fail, fmt("fault-injection trial %zu exited early", trials)};
        }
    }
    return {Verdict::Pass, fmt("%zu runs on %zu graphs equal Dijkstra (worst overhead ratio %.3f); "
                               "%zu delayed-insert trials never exited early",
                               runs, graphs.size(), worst_overhead, trials)};
}

Outcome throughput_sanity() {
    auto measure = [](std::size_t p, std::size_t b) {
        BenchConfig cfg;
        cfg.threads = p;
        cfg.factor = 4;
        cfg.buffer_size = b;
        cfg.prefill = 1'000'000;
        cfg.duration_s = 1.0;
        cfg.runs = 3;
        cfg.pin_threads = !oversubscribed(p);
        return run_throughput(cfg).mean_mops();
    };
    double const buffered4 = measure(4, 16);
    double const unbuffered4 = measure(4, 1);
    bool const buffering_ok = buffered4 > unbuffered4;
    std::string detail = fmt("p=4: b=16 %.2f MOps/s vs b=1 %.2f MOps/s", buffered4, unbuffered4);
    unsigned const hw = std::thread::hardware_concurrency();
    if (hw < 4) {
        if (!buffering_ok) {
            return {Verdict::Fail, detail};
        }
        return {Verdict::Skip, detail + fmt("; scaling p=4 vs p=1 skipped: host has %u hw threads "
                                            "(needs >= 4); buffering check passed",
                                            hw)};
    }
    double const buffered1 = measure(1, 16);
    return pass_if(buffering_ok && buffered4 > buffered1,
                   detail + fmt("; p=1 b=16 %.2f MOps/s", buffered1));
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        char const* name;
        std::function<Outcome()> run;
    };
    std::vector<Criterion> const criteria{
        {1, "sequential exactness", sequential_exactness},
        {2, "replay oracle equivalence", replay_oracle},
        {3, "expected rank error", expected_rank_error_check},
        {4, "rank/delay symmetry", rank_delay_symmetry},
        {5, "tail shape", tail_shape},
        {6, "stickiness degradation trend", stickiness_trend},
        {7, "buffered SPQ invariant suite", buffered_spq_suite},
        {8, "merging heap equivalence", merging_equivalence},
        {9, "wait-freedom proxy", wait_freedom},
        {10, "conservation under contention", conservation},
        {11, "SSSP correctness", sssp_correctness},
        {12, "throughput sanity", throughput_sanity},
    };
    int failures = 0;
    for (auto const& c : criteria) {
        Outcome out;
        auto start = Clock::now();
        try {
            out = c.run();
        } catch (std::exception const& e) {
            out = {Verdict::Fail, std::string("exception: ") + e.what()};
        }
        char const* tag = out.verdict == Verdict::Pass ? "PASS"
                          : out.verdict == Verdict::Skip ? "SKIP"
                                                         : "FAIL";
        failures += out.verdict == Verdict::Fail ? 1 : 0;
        std::printf("[%s] %2d %s: %s (%.1f s)\n", tag, c.id, c.name, out.detail.c_str(),
                    seconds_since(start));
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
