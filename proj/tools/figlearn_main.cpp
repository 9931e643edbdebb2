// Command-line surface: learn / infer / generate / benchmark / eval.
// Exit codes: 0 success, 2 input or validation failure, 3 numerical failure.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "figlearn/figlearn.hpp"

namespace {

using namespace figlearn;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("FIGLEARN_SEED"); env && *env) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw validation_error(std::string("FIGLEARN_SEED is not a valid seed: '") + env +
                                   "'");
        }
    }
    return 0;
}

std::vector<std::string> learn_comment_lines(const LearnConfig& cfg) {
    return {"seed=" + std::to_string(cfg.seed) + " rounds=" + std::to_string(cfg.rounds) +
            " filter_steps=" + std::to_string(cfg.filter_steps) +
            " graph_steps=" + std::to_string(cfg.graph_steps) +
            " lr_filter=" + format_double(cfg.lr_filter) +
            " lr_graph=" + format_double(cfg.lr_graph) +
            " stop_rel_tol=" + format_double(cfg.stop_rel_tol)};
}

int run_learn(const std::string& signals_path, const std::string& out_path,
              std::string trace_path, LearnConfig cfg,
              const std::optional<std::uint64_t>& seed_flag,
              const std::optional<std::string>& known_graph_path,
              const std::optional<std::string>& known_filter_spec) {
    cfg.seed = resolve_seed(seed_flag);
    if (trace_path.empty()) trace_path = out_path + ".trace.csv";

    const SignalsData data = read_signals_csv(signals_path);
    if (data.has_missing)
        throw validation_error(signals_path +
                               ": contains NA entries; learning requires complete signals "
                               "(use 'figlearn infer' for missing values)");
    if (data.values.rows() < 2)
        throw validation_error(signals_path + ": need at least 2 observations");

    FitOptions opts;
    if (known_graph_path && known_filter_spec)
        throw validation_error("--known-graph and --known-filter are mutually exclusive");
    if (known_graph_path) {
        const UpperTriWeights w = read_graph_csv(*known_graph_path);
        if (w.n != data.values.cols())
            throw validation_error("--known-graph: graph has " + std::to_string(w.n) +
                                   " nodes but signals have " +
                                   std::to_string(data.values.cols()) + " columns");
        opts.known_graph = weights_to_laplacian(w);
    }
    if (known_filter_spec) opts.known_filter = parse_filter_spec(*known_filter_spec);

    const GaussianModel target = sample_stats(data.values);
    const LearnedModel model = fit(target, data.values.cols(), cfg, opts);
    write_model_json(out_path, model, cfg);
    write_trace_csv(trace_path, model.loss_trace, learn_comment_lines(cfg));

    const UpperTriWeights bin = binarize(logits_to_weights(model.logits), 0.5);
    std::size_t edges = 0;
    for (double w : bin.w) edges += w >= 0.5;
    // ||mean||^2 is the constant part of the distance; it never enters a
    // gradient but belongs in the report.
    std::cout << "final_loss=" << format_double(model.loss_trace.back())
              << " mean_term=" << format_double(squared_norm(target.mean))
              << " rounds_run=" << model.rounds_run << " edges(threshold=0.5)=" << edges
              << "\n";
    std::cout << "model=" << out_path << " trace=" << trace_path << "\n";

    if (known_graph_path) {
        // Convenience readout for filter-recovery runs: h at the known
        // graph's eigenvalues.
        const EigenDecomposition eig = sym_eig(opts.known_graph->m);
        const std::vector<double> hvals = model.filter.eval(eig.eigenvalues);
        std::cout << "filter(lambda):";
        for (std::size_t k = 0; k < hvals.size(); ++k)
            std::cout << " " << format_double(eig.eigenvalues[k]) << ":"
                      << format_double(hvals[k]);
        std::cout << "\n";
    }
    return 0;
}

int run_infer(const std::string& model_path, const std::string& obs_path,
              const std::string& out_path, InferenceConfig cfg,
              const std::optional<std::uint64_t>& seed_flag,
              const std::optional<std::string>& truth_path) {
    cfg.seed = resolve_seed(seed_flag);
    const StoredModel stored = read_model_json(model_path);
    const SignalsData obs = read_signals_csv(obs_path);
    if (obs.ids.size() != stored.model.n)
        throw validation_error(obs_path + ": has " + std::to_string(obs.ids.size()) +
                               " node columns but model '" + model_path + "' expects " +
                               std::to_string(stored.model.n));

    std::optional<SignalsData> truth;
    if (truth_path) {
        truth = read_signals_csv(*truth_path);
        if (truth->ids != obs.ids)
            throw validation_error(*truth_path +
                                   ": node identifiers do not match the observation file");
        if (truth->values.rows() != obs.values.rows())
            throw validation_error(*truth_path + ": row count does not match observations");
        if (truth->has_missing)
            throw validation_error(*truth_path + ": ground-truth file contains NA entries");
    }

    // The relaxed learned graph is used as-is; binarization is only for
    // edge-recovery evaluation.
    const GraphLaplacian lap = stored.model.laplacian();
    const Matrix h_of_l = stored.model.reference
                              ? filter_matrix(lap, *stored.model.reference)
                              : filter_matrix(lap, stored.model.filter);

    std::vector<CompletedRow> rows;
    SplitMix64 row_seeds(cfg.seed);
    double fit_mse_sum = 0.0, hidden_mse_sum = 0.0;
    std::size_t ok_rows = 0, hidden_rows = 0;
    for (std::size_t r = 0; r < obs.values.rows(); ++r) {
        CompletedRow row;
        row.inferred_mask.assign(obs.ids.size(), '0');
        for (std::size_t j = 0; j < obs.ids.size(); ++j)
            if (!obs.mask[r][j]) row.inferred_mask[j] = '1';

        const PartialSignal partial = obs.partial_row(r);
        if (partial.observed_count() == 0) {
            row.status = "all_missing";
            rows.push_back(std::move(row));
            continue;
        }
        InferenceConfig row_cfg = cfg;
        row_cfg.seed = row_seeds.next();
        const InferenceResult res = infer_missing(h_of_l, partial, row_cfg);
        row.values = res.completed;
        row.fit_mse = res.fit_mse;
        fit_mse_sum += res.fit_mse;
        ++ok_rows;

        if (truth) {
            double sq = 0.0;
            std::size_t hidden = 0;
            for (std::size_t j = 0; j < obs.ids.size(); ++j) {
                if (obs.mask[r][j]) continue;
                const double d = res.completed[j] - truth->values(r, j);
                sq += d * d;
                ++hidden;
            }
            if (hidden > 0) {
                row.hidden_mse = sq / static_cast<double>(hidden);
                row.has_hidden_mse = true;
                hidden_mse_sum += row.hidden_mse;
                ++hidden_rows;
            }
        }
        rows.push_back(std::move(row));
    }

    const std::vector<std::string> comments = {
        "model=" + model_path + " steps=" + std::to_string(cfg.steps) +
        " lr=" + format_double(cfg.learning_rate) + " seed=" + std::to_string(cfg.seed)};
    write_completed_csv(out_path, obs.ids, rows, truth.has_value(), comments);

    std::cout << "rows=" << rows.size() << " inferred=" << ok_rows;
    if (ok_rows > 0)
        std::cout << " mean_fit_mse=" << format_double(fit_mse_sum / ok_rows);
    if (hidden_rows > 0)
        std::cout << " mean_hidden_mse=" << format_double(hidden_mse_sum / hidden_rows);
    std::cout << "\nout=" << out_path << "\n";
    return 0;
}

int run_generate(std::size_t nodes, std::size_t clusters, double p_in, double p_out,
                 const std::string& filter_spec, std::size_t num_signals,
                 const std::optional<std::uint64_t>& seed_flag, const std::string& prefix) {
    const std::uint64_t seed = resolve_seed(seed_flag);
    const ReferenceFilter filter = parse_filter_spec(filter_spec);

    SplitMix64 sub(seed);
    SbmSpec spec{nodes, clusters, p_in, p_out, sub.next()};
    const UpperTriWeights graph = generate_sbm(spec);
    const SignalMatrix signals =
        generate_signals(weights_to_laplacian(graph), filter, num_signals, sub.next());

    const std::string graph_path = prefix + ".graph.csv";
    const std::string signals_path = prefix + ".signals.csv";
    const std::string provenance = "seed=" + std::to_string(seed) +
                                   " nodes=" + std::to_string(nodes) +
                                   " clusters=" + std::to_string(clusters) +
                                   " p_in=" + format_double(p_in) +
                                   " p_out=" + format_double(p_out) + " filter=" +
                                   filter.spec_string() + " rng=" + Rng::kGeneratorId;
    write_graph_csv(graph_path, graph, {provenance});
    write_signals_csv(signals_path, signals, {provenance});

    std::size_t edges = 0;
    for (double w : graph.w) edges += w >= 0.5;
    std::cout << "graph=" << graph_path << " edges=" << edges << "\n";
    std::cout << "signals=" << signals_path << " rows=" << signals.rows() << "\n";
    return 0;
}

int run_benchmark_cmd(const std::string& config_path, const std::string& out_path,
                      const std::optional<int>& jobs_flag) {
    BenchmarkConfig cfg = read_benchmark_config(config_path);
    if (jobs_flag) cfg.jobs = *jobs_flag;
    cfg.validate();

    const std::vector<BenchmarkRow> rows = run_benchmark(cfg);
    write_results_csv(out_path, cfg, rows);

    for (const auto& a : aggregate_benchmark(rows)) {
        std::cout << a.filter_spec << ": mean_f1=" << format_double(a.f1)
                  << " mean_precision=" << format_double(a.precision)
                  << " mean_recall=" << format_double(a.recall)
                  << " mean_accuracy=" << format_double(a.accuracy) << " runs=" << a.runs_ok
                  << "/" << (a.runs_ok + a.runs_failed) << "\n";
    }
    std::cout << "results=" << out_path << "\n";
    return 0;
}

int run_eval(const std::string& true_path, const std::string& learned_path, double threshold) {
    const UpperTriWeights truth = binarize(read_graph_csv(true_path), threshold);
    const UpperTriWeights learned = binarize(read_graph_csv(learned_path), threshold);
    const EdgeMetrics m = edge_metrics(truth, learned);
    std::cout << "f1=" << format_double(m.f1) << " precision=" << format_double(m.precision)
              << " recall=" << format_double(m.recall)
              << " accuracy=" << format_double(m.accuracy) << " tp=" << m.tp << " fp=" << m.fp
              << " fn=" << m.fn << " tn=" << m.tn << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Joint graph and spectral-filter learning from signal observations"};
    app.require_subcommand(1);

    // learn ------------------------------------------------------------
    auto* learn_cmd = app.add_subcommand("learn", "Fit a graph and filter to observed signals");
    std::string learn_signals, learn_out, learn_trace;
    LearnConfig learn_cfg;
    std::optional<std::uint64_t> learn_seed;
    std::optional<std::string> learn_known_graph, learn_known_filter;
    learn_cmd->add_option("signals", learn_signals, "Signals CSV (rows = observations)")
        ->required();
    learn_cmd->add_option("--out", learn_out, "Output model JSON path")->required();
    learn_cmd->add_option("--trace", learn_trace, "Loss trace CSV path (default <out>.trace.csv)");
    learn_cmd->add_option("--rounds", learn_cfg.rounds, "Alternating rounds");
    learn_cmd->add_option("--filter-steps", learn_cfg.filter_steps, "Adam steps per filter phase");
    learn_cmd->add_option("--graph-steps", learn_cfg.graph_steps, "Adam steps per graph phase");
    learn_cmd->add_option("--lr-filter", learn_cfg.lr_filter, "Filter learning rate");
    learn_cmd->add_option("--lr-graph", learn_cfg.lr_graph, "Graph learning rate");
    learn_cmd->add_option("--stop-rel-tol", learn_cfg.stop_rel_tol,
                          "Early-stop relative loss change");
    learn_cmd->add_flag("--no-prefer-sparse", [&](std::int64_t) { learn_cfg.prefer_sparse = false; },
                        "Keep whichever complement basin the joint fit lands in");
    learn_cmd->add_option("--seed", learn_seed, "RNG seed (fallback: FIGLEARN_SEED, then 0)");
    learn_cmd->add_option("--known-graph", learn_known_graph,
                          "Fix the graph to this edge-list CSV; learn only the filter");
    learn_cmd->add_option("--known-filter", learn_known_filter,
                          "Fix the filter (heat:S | normal | highpass:S); learn only the graph");

    // infer ------------------------------------------------------------
    auto* infer_cmd = app.add_subcommand("infer", "Infer missing values in partial signals");
    std::string infer_model, infer_obs, infer_out;
    InferenceConfig infer_cfg;
    std::optional<std::uint64_t> infer_seed;
    std::optional<std::string> infer_truth;
    infer_cmd->add_option("model", infer_model, "Model JSON from 'learn'")->required();
    infer_cmd->add_option("observations", infer_obs, "Signals CSV with NA for missing entries")
        ->required();
    infer_cmd->add_option("--out", infer_out, "Completed CSV path")->required();
    infer_cmd->add_option("--steps", infer_cfg.steps, "Adam steps per signal");
    infer_cmd->add_option("--lr", infer_cfg.learning_rate, "Adam learning rate");
    infer_cmd->add_option("--seed", infer_seed, "RNG seed (fallback: FIGLEARN_SEED, then 0)");
    infer_cmd->add_option("--truth", infer_truth,
                          "Ground-truth signals CSV; adds a hidden_mse column");

    // generate ---------------------------------------------------------
    auto* gen_cmd = app.add_subcommand("generate", "Generate an SBM graph and filtered signals");
    std::size_t gen_nodes = 30, gen_clusters = 2, gen_signals = 500;
    double gen_p_in = 0.3, gen_p_out = 0.1;
    std::string gen_filter = "heat:0.1", gen_prefix;
    std::optional<std::uint64_t> gen_seed;
    gen_cmd->add_option("--nodes", gen_nodes, "Node count");
    gen_cmd->add_option("--clusters", gen_clusters, "Cluster count");
    gen_cmd->add_option("--p-in", gen_p_in, "Within-cluster edge probability");
    gen_cmd->add_option("--p-out", gen_p_out, "Between-cluster edge probability");
    gen_cmd->add_option("--filter", gen_filter, "Generating filter (heat:S | normal | highpass:S)");
    gen_cmd->add_option("--signals", gen_signals, "Number of signals");
    gen_cmd->add_option("--seed", gen_seed, "RNG seed (fallback: FIGLEARN_SEED, then 0)");
    gen_cmd->add_option("--out-prefix", gen_prefix, "Output prefix for .graph.csv/.signals.csv")
        ->required();

    // benchmark ----------------------------------------------------------
    auto* bench_cmd = app.add_subcommand("benchmark", "Run a grid of generate+learn experiments");
    std::string bench_config, bench_out;
    std::optional<int> bench_jobs;
    bench_cmd->add_option("config", bench_config, "Benchmark config JSON")->required();
    bench_cmd->add_option("--out", bench_out, "Results CSV path")->required();
    bench_cmd->add_option("--jobs", bench_jobs, "Parallel runs (overrides config)");

    // eval ---------------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("eval", "Edge-recovery metrics between two graph files");
    std::string eval_true, eval_learned;
    double eval_threshold = 0.5;
    eval_cmd->add_option("--true", eval_true, "Ground-truth graph CSV")->required();
    eval_cmd->add_option("--learned", eval_learned, "Learned graph CSV")->required();
    eval_cmd->add_option("--threshold", eval_threshold, "Binarization threshold");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (learn_cmd->parsed())
            return run_learn(learn_signals, learn_out, learn_trace, learn_cfg, learn_seed,
                             learn_known_graph, learn_known_filter);
        if (infer_cmd->parsed())
            return run_infer(infer_model, infer_obs, infer_out, infer_cfg, infer_seed,
                             infer_truth);
        if (gen_cmd->parsed())
            return run_generate(gen_nodes, gen_clusters, gen_p_in, gen_p_out, gen_filter,
                                gen_signals, gen_seed, gen_prefix);
        if (bench_cmd->parsed()) return run_benchmark_cmd(bench_config, bench_out, bench_jobs);
        if (eval_cmd->parsed()) return run_eval(eval_true, eval_learned, eval_threshold);
    } catch (const figlearn::validation_error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    } catch (const figlearn::numerical_error& ex) {
        std::cerr << "numerical error: " << ex.what() << "\n";
        return 3;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 0;
}
