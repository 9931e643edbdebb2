#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "figlearn/learn.hpp"
#include "figlearn/sbm.hpp"

namespace figlearn {

/// One grid cell: an SBM recipe paired with a generating filter. The cell's
/// seed field is ignored; run seeds come from the master seed.
struct BenchmarkCell {
    SbmSpec sbm;
    ReferenceFilter filter;
};

struct BenchmarkConfig {
    std::uint64_t master_seed = 0;
    int repeats = 1;
    std::size_t num_signals = 500;
    std::vector<BenchmarkCell> cells;
    LearnConfig learn;
    int jobs = 1;

    void validate() const {
        if (repeats < 1) throw validation_error("BenchmarkConfig: repeats must be >= 1");
        if (num_signals < 2) throw validation_error("BenchmarkConfig: need at least 2 signals");
        if (cells.empty()) throw validation_error("BenchmarkConfig: no grid cells");
        if (jobs < 1) throw validation_error("BenchmarkConfig: jobs must be >= 1");
        learn.validate();
        for (const auto& c : cells) c.sbm.validate();
    }
};

struct BenchmarkRow {
    std::size_t cell_index = 0;
    std::size_t n = 0;
    double p_in = 0.0, p_out = 0.0;
    std::size_t clusters = 2;
    std::string filter_spec;
    int repeat = 0;
    std::uint64_t seed = 0;
    EdgeMetrics metrics;
    double final_loss = 0.0;
    int rounds_run = 0;
    double wall_time_s = 0.0;
    std::string status = "ok";
};

struct BenchmarkAggregate {
    std::string filter_spec;
    int runs_ok = 0;
    int runs_failed = 0;
    double f1 = 0.0, precision = 0.0, recall = 0.0, accuracy = 0.0;
    double final_loss = 0.0;
};

/// Run seed for (cell, repeat): master * 1e6 + cell_index * 1e3 + repeat.
/// Within a run, the graph / signal / fit sub-seeds are the first three
/// outputs of SplitMix64(run_seed), in that order.
inline std::uint64_t benchmark_run_seed(std::uint64_t master, std::size_t cell_index,
                                        int repeat) {
    return master * 1000000ULL + static_cast<std::uint64_t>(cell_index) * 1000ULL +
           static_cast<std::uint64_t>(repeat);
}

inline BenchmarkRow run_benchmark_cell(const BenchmarkConfig& cfg, std::size_t cell_index,
                                       int repeat) {
    const BenchmarkCell& cell = cfg.cells[cell_index];
    BenchmarkRow row;
    row.cell_index = cell_index;
    row.n = cell.sbm.n;
    row.p_in = cell.sbm.p_within;
    row.p_out = cell.sbm.p_between;
    row.clusters = cell.sbm.num_clusters;
    row.filter_spec = cell.filter.spec_string();
    row.repeat = repeat;
    row.seed = benchmark_run_seed(cfg.master_seed, cell_index, repeat);

    const auto start = std::chrono::steady_clock::now();
    try {
        SplitMix64 sub(row.seed);
        const std::uint64_t graph_seed = sub.next();
        const std::uint64_t signal_seed = sub.next();
        const std::uint64_t fit_seed = sub.next();

        SbmSpec sbm = cell.sbm;
        sbm.seed = graph_seed;
        const UpperTriWeights truth = generate_sbm(sbm);
        const GraphLaplacian lap = weights_to_laplacian(truth);
        const SignalMatrix signals = generate_signals(lap, cell.filter, cfg.num_signals,
                                                      signal_seed);

        LearnConfig learn = cfg.learn;
        learn.seed = fit_seed;
        const LearnedModel model = fit(signals, learn);

        const UpperTriWeights learned = binarize(logits_to_weights(model.logits), 0.5);
        row.metrics = edge_metrics(truth, learned);
        row.final_loss = model.loss_trace.back();
        row.rounds_run = model.rounds_run;
    } catch (const std::exception& ex) {
        row.status = std::string("error: ") + ex.what();
    }
    row.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return row;
}

/// All (cell, repeat) runs in deterministic row order. Runs are independent
/// (each owns its RNG streams), so jobs > 1 distributes them over threads
/// without changing any result.
inline std::vector<BenchmarkRow> run_benchmark(const BenchmarkConfig& cfg) {
    cfg.validate();
    const std::size_t total = cfg.cells.size() * static_cast<std::size_t>(cfg.repeats);
    std::vector<BenchmarkRow> rows(total);

    const auto run_index = [&](std::size_t idx) {
        const std::size_t cell_index = idx / cfg.repeats;
        const int repeat = static_cast<int>(idx % cfg.repeats);
        rows[idx] = run_benchmark_cell(cfg, cell_index, repeat);
    };

    if (cfg.jobs <= 1) {
        for (std::size_t idx = 0; idx < total; ++idx) run_index(idx);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const int workers = std::min<int>(cfg.jobs, static_cast<int>(total));
        pool.reserve(workers);
        for (int t = 0; t < workers; ++t)
            pool.emplace_back([&]() {
                for (std::size_t idx = next.fetch_add(1); idx < total; idx = next.fetch_add(1))
                    run_index(idx);
            });
        for (auto& th : pool) th.join();
    }
    return rows;
}

/// Per-filter means over successful runs; failures are counted, not averaged.
inline std::vector<BenchmarkAggregate> aggregate_benchmark(const std::vector<BenchmarkRow>& rows) {
    std::vector<BenchmarkAggregate> aggs;
    for (const auto& row : rows) {
        BenchmarkAggregate* agg = nullptr;
        for (auto& a : aggs)
            if (a.filter_spec == row.filter_spec) agg = &a;
        if (!agg) {
            aggs.push_back(BenchmarkAggregate{row.filter_spec});
            agg = &aggs.back();
        }
        if (row.status != "ok") {
            agg->runs_failed += 1;
            continue;
        }
        agg->runs_ok += 1;
        agg->f1 += row.metrics.f1;
        agg->precision += row.metrics.precision;
        agg->recall += row.metrics.recall;
        agg->accuracy += row.metrics.accuracy;
        agg->final_loss += row.final_loss;
    }
    for (auto& a : aggs) {
        if (a.runs_ok == 0) continue;
        a.f1 /= a.runs_ok;
        a.precision /= a.runs_ok;
        a.recall /= a.runs_ok;
        a.accuracy /= a.runs_ok;
        a.final_loss /= a.runs_ok;
    }
    return aggs;
}

}  // namespace figlearn
