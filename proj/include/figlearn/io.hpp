#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "figlearn/bench.hpp"
#include "figlearn/errors.hpp"
#include "figlearn/infer.hpp"
#include "figlearn/learn.hpp"

namespace figlearn {

inline constexpr const char* kGeneratorVersion = "figlearn 0.1.0";
inline constexpr int kModelFormatVersion = 1;

/// Shortest representation that parses back to the identical double;
/// locale-independent.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& context) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw validation_error(context + ": cannot parse number '" + std::string(s) + "'");
    return v;
}

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

inline std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

inline std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary: "\n" endings everywhere
    if (!out) throw validation_error("cannot open '" + path + "' for writing");
    return out;
}

inline std::ifstream open_for_read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("cannot open '" + path + "' for reading");
    return in;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Graph files: "# n=<N>" comment header, then "i,j,w" rows with i < j.
// Absent pairs mean weight 0.
// ---------------------------------------------------------------------------

inline void write_graph_csv(const std::string& path, const UpperTriWeights& wt,
                            const std::vector<std::string>& comments = {}) {
    auto out = detail::open_for_write(path);
    out << "# n=" << wt.n << "\n";
    for (const auto& c : comments) out << "# " << c << "\n";
    std::size_t e = 0;
    for (std::size_t i = 0; i < wt.n; ++i)
        for (std::size_t j = i + 1; j < wt.n; ++j, ++e)
            if (wt.w[e] != 0.0)
                out << i << "," << j << "," << format_double(wt.w[e]) << "\n";
}

inline UpperTriWeights read_graph_csv(const std::string& path) {
    auto in = detail::open_for_read(path);
    std::string line;
    std::size_t line_no = 0;
    std::size_t n = 0;
    bool have_n = false;

    UpperTriWeights wt;
    std::vector<bool> seen;
    while (std::getline(in, line)) {
        ++line_no;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (const auto pos = line.find("n="); !have_n && pos != std::string::npos) {
                n = static_cast<std::size_t>(
                    parse_double(std::string_view(line).substr(pos + 2),
                                 path + " line " + std::to_string(line_no)));
                have_n = true;
                wt = UpperTriWeights{n, std::vector<double>(num_edge_slots(n), 0.0)};
                seen.assign(num_edge_slots(n), false);
            }
            continue;
        }
        if (!have_n)
            throw validation_error(path + " line " + std::to_string(line_no) +
                                   ": edge row before '# n=<N>' header");
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 3)
            throw validation_error(path + " line " + std::to_string(line_no) +
                                   ": expected 'i,j,w'");
        const std::string ctx = path + " line " + std::to_string(line_no);
        const double di = parse_double(fields[0], ctx);
        const double dj = parse_double(fields[1], ctx);
        const double w = parse_double(fields[2], ctx);
        const auto i = static_cast<std::size_t>(di);
        const auto j = static_cast<std::size_t>(dj);
        if (di != static_cast<double>(i) || dj != static_cast<double>(j) || i >= j || j >= n)
            throw validation_error(ctx + ": invalid pair (" + std::string(fields[0]) + "," +
                                   std::string(fields[1]) + ") for n=" + std::to_string(n));
        if (w < 0.0 || w > 1.0)
            throw validation_error(ctx + ": weight " + std::string(fields[2]) +
                                   " outside [0, 1]");
        const std::size_t e = edge_index(i, j, n);
        if (seen[e]) throw validation_error(ctx + ": duplicate pair");
        seen[e] = true;
        wt.w[e] = w;
    }
    if (!have_n) throw validation_error(path + ": missing '# n=<N>' header");
    return wt;
}

// ---------------------------------------------------------------------------
// Signal files: optional "#" comment lines, a header row of unique node
// identifiers, then one observation per row. "NA" marks a missing entry.
// ---------------------------------------------------------------------------

struct SignalsData {
    std::vector<std::string> ids;
    SignalMatrix values;                          // missing entries hold 0.0
    std::vector<std::vector<std::uint8_t>> mask;  // 1 = observed
    bool has_missing = false;

    PartialSignal partial_row(std::size_t r) const {
        PartialSignal p;
        p.values.assign(values.row(r).begin(), values.row(r).end());
        p.observed = mask[r];
        return p;
    }
};

inline std::vector<std::string> default_node_ids(std::size_t n) {
    std::vector<std::string> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = "v" + std::to_string(i);
    return ids;
}

inline void write_signals_csv(const std::string& path, const SignalMatrix& x,
                              const std::vector<std::string>& comments = {},
                              const std::vector<std::string>& ids = {}) {
    auto out = detail::open_for_write(path);
    for (const auto& c : comments) out << "# " << c << "\n";
    const auto names = ids.empty() ? default_node_ids(x.cols()) : ids;
    if (names.size() != x.cols())
        throw validation_error("write_signals_csv: id count does not match columns");
    for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
    out << "\n";
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t j = 0; j < x.cols(); ++j)
            out << (j ? "," : "") << format_double(x(r, j));
        out << "\n";
    }
}

inline SignalsData read_signals_csv(const std::string& path) {
    auto in = detail::open_for_read(path);
    SignalsData data;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::vector<double>> rows;
    std::vector<std::vector<std::uint8_t>> masks;

    while (std::getline(in, line)) {
        ++line_no;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        if (line[0] == '#') continue;
        const auto fields = detail::split_csv_line(line);
        if (data.ids.empty()) {
            for (const auto& f : fields) {
                if (f.empty())
                    throw validation_error(path + " line " + std::to_string(line_no) +
                                           ": empty node identifier");
                data.ids.emplace_back(f);
            }
            for (std::size_t a = 0; a < data.ids.size(); ++a)
                for (std::size_t b = a + 1; b < data.ids.size(); ++b)
                    if (data.ids[a] == data.ids[b])
                        throw validation_error(path + ": duplicate node identifier '" +
                                               data.ids[a] + "'");
            continue;
        }
        if (fields.size() != data.ids.size())
            throw validation_error(path + " line " + std::to_string(line_no) + ": row has " +
                                   std::to_string(fields.size()) + " fields, expected " +
                                   std::to_string(data.ids.size()));
        std::vector<double> row(fields.size(), 0.0);
        std::vector<std::uint8_t> mask(fields.size(), 1);
        for (std::size_t j = 0; j < fields.size(); ++j) {
            if (fields[j] == "NA") {
                mask[j] = 0;
                data.has_missing = true;
            } else {
                row[j] = parse_double(fields[j], path + " line " + std::to_string(line_no));
            }
        }
        rows.push_back(std::move(row));
        masks.push_back(std::move(mask));
    }
    if (data.ids.empty()) throw validation_error(path + ": no header row of node identifiers");

    data.values = SignalMatrix(rows.size(), data.ids.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t j = 0; j < data.ids.size(); ++j) data.values(r, j) = rows[r][j];
    data.mask = std::move(masks);
    return data;
}

// ---------------------------------------------------------------------------
// Loss trace: "round,loss" rows; round 0 is the loss at initialization.
// ---------------------------------------------------------------------------

inline void write_trace_csv(const std::string& path, const std::vector<double>& trace,
                            const std::vector<std::string>& comments = {}) {
    auto out = detail::open_for_write(path);
    for (const auto& c : comments) out << "# " << c << "\n";
    out << "round,loss\n";
    for (std::size_t r = 0; r < trace.size(); ++r)
        out << r << "," << format_double(trace[r]) << "\n";
}

// ---------------------------------------------------------------------------
// Model files: JSON, lossless round trip (write -> read -> write is
// byte-identical). Keys are emitted in a fixed order.
// ---------------------------------------------------------------------------

using json = nlohmann::ordered_json;

inline json filter_to_json(const LearnedModel& model) {
    if (model.reference) {
        const ReferenceFilter& ref = *model.reference;
        json f;
        switch (ref.kind) {
            case FilterKind::heat: f["type"] = "heat"; break;
            case FilterKind::normal: f["type"] = "normal"; break;
            case FilterKind::highpass: f["type"] = "highpass"; break;
        }
        if (ref.kind != FilterKind::normal) f["param"] = ref.param;
        return f;
    }
    json f;
    f["type"] = "network";
    f["activation"] = "tanh";
    f["layer_sizes"] = model.filter.layer_sizes();
    json weights = json::array();
    json biases = json::array();
    for (std::size_t l = 0; l < model.filter.weights().size(); ++l) {
        weights.push_back(model.filter.weights()[l].data());  // row-major
        biases.push_back(model.filter.biases()[l]);
    }
    f["weights"] = std::move(weights);
    f["biases"] = std::move(biases);
    return f;
}

inline json config_to_json(const LearnConfig& cfg) {
    json c;
    c["rounds"] = cfg.rounds;
    c["filter_steps"] = cfg.filter_steps;
    c["graph_steps"] = cfg.graph_steps;
    c["lr_filter"] = cfg.lr_filter;
    c["lr_graph"] = cfg.lr_graph;
    c["stop_rel_tol"] = cfg.stop_rel_tol;
    c["degenerate_eig_tol"] = cfg.degenerate_eig_tol;
    c["seed"] = cfg.seed;
    c["prefer_sparse"] = cfg.prefer_sparse;
    c["phase_order"] = "filter-first";
    return c;
}

inline LearnConfig config_from_json(const json& c) {
    LearnConfig cfg;
    cfg.rounds = c.at("rounds").get<int>();
    cfg.filter_steps = c.at("filter_steps").get<int>();
    cfg.graph_steps = c.at("graph_steps").get<int>();
    cfg.lr_filter = c.at("lr_filter").get<double>();
    cfg.lr_graph = c.at("lr_graph").get<double>();
    cfg.stop_rel_tol = c.at("stop_rel_tol").get<double>();
    cfg.degenerate_eig_tol = c.at("degenerate_eig_tol").get<double>();
    cfg.seed = c.at("seed").get<std::uint64_t>();
    cfg.prefer_sparse = c.value("prefer_sparse", true);
    return cfg;
}

/// Timestamp for provenance blocks. Honors SOURCE_DATE_EPOCH (seconds since
/// the epoch, UTC) so that identically configured runs write identical
/// bytes; empty when the variable is unset.
inline std::string provenance_timestamp() {
    const char* epoch = std::getenv("SOURCE_DATE_EPOCH");
    if (!epoch || !*epoch) return "";
    char* end = nullptr;
    const long long secs = std::strtoll(epoch, &end, 10);
    if (end == epoch || *end) return "";
    const std::time_t t = static_cast<std::time_t>(secs);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

inline void write_model_json(const std::string& path, const LearnedModel& model,
                             const LearnConfig& cfg) {
    json doc;
    doc["format_version"] = kModelFormatVersion;
    doc["n"] = model.n;
    doc["z"] = model.logits.z;
    doc["filter"] = filter_to_json(model);
    doc["config"] = config_to_json(cfg);
    doc["rounds_run"] = model.rounds_run;
    json prov;
    prov["generator"] = kGeneratorVersion;
    prov["rng"] = Rng::kGeneratorId;
    prov["timestamp"] = provenance_timestamp();
    doc["provenance"] = std::move(prov);

    auto out = detail::open_for_write(path);
    out << doc.dump(2) << "\n";
}

struct StoredModel {
    LearnedModel model;
    LearnConfig config;
};

inline StoredModel read_model_json(const std::string& path) {
    auto in = detail::open_for_read(path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& ex) {
        throw validation_error(path + ": " + ex.what());
    }
    try {
        if (doc.at("format_version").get<int>() != kModelFormatVersion)
            throw validation_error(path + ": unsupported format_version");
        StoredModel stored;
        stored.model.n = doc.at("n").get<std::size_t>();
        stored.model.logits.n = stored.model.n;
        stored.model.logits.z = doc.at("z").get<std::vector<double>>();
        if (stored.model.logits.z.size() != num_edge_slots(stored.model.n))
            throw validation_error(path + ": z length does not match n");

        const json& f = doc.at("filter");
        const std::string type = f.at("type").get<std::string>();
        if (type == "network") {
            auto layer_sizes = f.at("layer_sizes").get<std::vector<std::size_t>>();
            std::vector<Matrix> weights;
            std::vector<std::vector<double>> biases;
            const json& jw = f.at("weights");
            const json& jb = f.at("biases");
            for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
                Matrix w(layer_sizes[l + 1], layer_sizes[l]);
                auto flat = jw.at(l).get<std::vector<double>>();
                if (flat.size() != w.data().size())
                    throw validation_error(path + ": filter layer " + std::to_string(l) +
                                           " weight count mismatch");
                w.data() = std::move(flat);
                weights.push_back(std::move(w));
                biases.push_back(jb.at(l).get<std::vector<double>>());
            }
            stored.model.filter =
                FilterNetwork::from_parts(std::move(layer_sizes), std::move(weights),
                                          std::move(biases));
        } else if (type == "heat") {
            stored.model.reference = ReferenceFilter::heat(f.at("param").get<double>());
        } else if (type == "normal") {
            stored.model.reference = ReferenceFilter::normal();
        } else if (type == "highpass") {
            stored.model.reference = ReferenceFilter::highpass(f.at("param").get<double>());
        } else {
            throw validation_error(path + ": unknown filter type '" + type + "'");
        }
        stored.model.rounds_run = doc.value("rounds_run", 0);
        stored.config = config_from_json(doc.at("config"));
        return stored;
    } catch (const json::exception& ex) {
        throw validation_error(path + ": " + ex.what());
    }
}

// ---------------------------------------------------------------------------
// Benchmark config (JSON in) and results (CSV out).
// ---------------------------------------------------------------------------

inline BenchmarkConfig read_benchmark_config(const std::string& path) {
    auto in = detail::open_for_read(path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& ex) {
        throw validation_error(path + ": " + ex.what());
    }

    static const std::vector<std::string> known_top = {"master_seed", "repeats", "num_signals",
                                                       "cells",       "learn",   "jobs"};
    std::string offending;
    for (const auto& [key, value] : doc.items()) {
        if (std::find(known_top.begin(), known_top.end(), key) == known_top.end())
            offending += (offending.empty() ? "" : ", ") + key;
    }
    if (!offending.empty())
        throw validation_error(path + ": unknown keys: " + offending);

    BenchmarkConfig cfg;
    try {
        if (doc.contains("master_seed")) {
            cfg.master_seed = doc["master_seed"].get<std::uint64_t>();
        } else if (const char* env = std::getenv("FIGLEARN_SEED"); env && *env) {
            cfg.master_seed = std::strtoull(env, nullptr, 10);
        }
        cfg.repeats = doc.value("repeats", 1);
        cfg.num_signals = doc.value("num_signals", std::size_t{500});
        cfg.jobs = doc.value("jobs", 1);
        if (doc.contains("learn")) {
            const json& l = doc["learn"];
            static const std::vector<std::string> known_learn = {
                "rounds",       "filter_steps",       "graph_steps",        "lr_filter",
                "lr_graph",     "stop_rel_tol",       "degenerate_eig_tol", "prefer_sparse"};
            std::string bad;
            for (const auto& [key, value] : l.items())
                if (std::find(known_learn.begin(), known_learn.end(), key) == known_learn.end())
                    bad += (bad.empty() ? "" : ", ") + key;
            if (!bad.empty())
                throw validation_error(path + ": unknown keys under 'learn': " + bad);
            cfg.learn.rounds = l.value("rounds", cfg.learn.rounds);
            cfg.learn.filter_steps = l.value("filter_steps", cfg.learn.filter_steps);
            cfg.learn.graph_steps = l.value("graph_steps", cfg.learn.graph_steps);
            cfg.learn.lr_filter = l.value("lr_filter", cfg.learn.lr_filter);
            cfg.learn.lr_graph = l.value("lr_graph", cfg.learn.lr_graph);
            cfg.learn.stop_rel_tol = l.value("stop_rel_tol", cfg.learn.stop_rel_tol);
            cfg.learn.degenerate_eig_tol =
                l.value("degenerate_eig_tol", cfg.learn.degenerate_eig_tol);
            cfg.learn.prefer_sparse = l.value("prefer_sparse", cfg.learn.prefer_sparse);
        }
        if (!doc.contains("cells")) throw validation_error(path + ": missing key: cells");
        for (const json& c : doc["cells"]) {
            static const std::vector<std::string> known_cell = {"n", "clusters", "p_in", "p_out",
                                                                "filter"};
            std::string bad;
            for (const auto& [key, value] : c.items())
                if (std::find(known_cell.begin(), known_cell.end(), key) == known_cell.end())
                    bad += (bad.empty() ? "" : ", ") + key;
            if (!bad.empty())
                throw validation_error(path + ": unknown keys under 'cells': " + bad);
            BenchmarkCell cell;
            cell.sbm.n = c.at("n").get<std::size_t>();
            cell.sbm.num_clusters = c.value("clusters", std::size_t{2});
            cell.sbm.p_within = c.at("p_in").get<double>();
            cell.sbm.p_between = c.at("p_out").get<double>();
            cell.filter = parse_filter_spec(c.value("filter", std::string("heat:0.1")));
            cfg.cells.push_back(std::move(cell));
        }
    } catch (const json::exception& ex) {
        throw validation_error(path + ": " + ex.what());
    }
    cfg.validate();
    return cfg;
}

inline void write_results_csv(const std::string& path, const BenchmarkConfig& cfg,
                              const std::vector<BenchmarkRow>& rows) {
    auto out = detail::open_for_write(path);
    out << "# master_seed=" << cfg.master_seed << " repeats=" << cfg.repeats
        << " num_signals=" << cfg.num_signals << " generator=" << Rng::kGeneratorId << " "
        << kGeneratorVersion << "\n";
    out << "# learn: rounds=" << cfg.learn.rounds << " filter_steps=" << cfg.learn.filter_steps
        << " graph_steps=" << cfg.learn.graph_steps
        << " lr_filter=" << format_double(cfg.learn.lr_filter)
        << " lr_graph=" << format_double(cfg.learn.lr_graph)
        << " stop_rel_tol=" << format_double(cfg.learn.stop_rel_tol)
        << " prefer_sparse=" << (cfg.learn.prefer_sparse ? "true" : "false") << "\n";
    for (std::size_t c = 0; c < cfg.cells.size(); ++c) {
        const BenchmarkCell& cell = cfg.cells[c];
        out << "# cell " << c << ": n=" << cell.sbm.n << " clusters=" << cell.sbm.num_clusters
            << " p_in=" << format_double(cell.sbm.p_within)
            << " p_out=" << format_double(cell.sbm.p_between)
            << " filter=" << cell.filter.spec_string() << "\n";
    }
    out << "n,p_in,p_out,filter,repeat,seed,f1,precision,recall,accuracy,final_loss,"
           "rounds_run,wall_time_s,status\n";
    for (const auto& r : rows) {
        out << r.n << "," << format_double(r.p_in) << "," << format_double(r.p_out) << ","
            << r.filter_spec << "," << r.repeat << "," << r.seed << ",";
        if (r.status == "ok") {
            out << format_double(r.metrics.f1) << "," << format_double(r.metrics.precision)
                << "," << format_double(r.metrics.recall) << ","
                << format_double(r.metrics.accuracy) << "," << format_double(r.final_loss)
                << "," << r.rounds_run << ",";
        } else {
            out << ",,,,,,";
        }
        out << format_double(r.wall_time_s) << ",";
        // Statuses can carry commas inside error messages; flatten them.
        std::string status = r.status;
        for (char& ch : status)
            if (ch == ',' || ch == '\n') ch = ';';
        out << status << "\n";
    }
    for (const auto& a : aggregate_benchmark(rows)) {
        out << ",,," << a.filter_spec << ",mean,,";
        if (a.runs_ok > 0) {
            out << format_double(a.f1) << "," << format_double(a.precision) << ","
                << format_double(a.recall) << "," << format_double(a.accuracy) << ","
                << format_double(a.final_loss) << ",,";
        } else {
            out << ",,,,,,";
        }
        out << ",aggregate(" << a.runs_ok << "/" << (a.runs_ok + a.runs_failed) << ")\n";
    }
}

// ---------------------------------------------------------------------------
// Completed-signal files emitted by inference.
// ---------------------------------------------------------------------------

struct CompletedRow {
    std::vector<double> values;
    std::string inferred_mask;  // one char per node: 1 = entry was NA and got inferred
    double fit_mse = 0.0;
    double hidden_mse = 0.0;
    bool has_hidden_mse = false;
    std::string status = "ok";
};

inline void write_completed_csv(const std::string& path, const std::vector<std::string>& ids,
                                const std::vector<CompletedRow>& rows, bool with_hidden,
                                const std::vector<std::string>& comments = {}) {
    auto out = detail::open_for_write(path);
    for (const auto& c : comments) out << "# " << c << "\n";
    for (std::size_t j = 0; j < ids.size(); ++j) out << (j ? "," : "") << ids[j];
    out << ",inferred_mask,fit_mse";
    if (with_hidden) out << ",hidden_mse";
    out << ",status\n";
    for (const auto& r : rows) {
        if (r.status == "ok") {
            for (std::size_t j = 0; j < r.values.size(); ++j)
                out << (j ? "," : "") << format_double(r.values[j]);
            out << "," << r.inferred_mask << "," << format_double(r.fit_mse);
            if (with_hidden)
                out << "," << (r.has_hidden_mse ? format_double(r.hidden_mse) : "NA");
        } else {
            for (std::size_t j = 0; j < ids.size(); ++j) out << (j ? "," : "") << "NA";
            out << "," << r.inferred_mask << ",NA";
            if (with_hidden) out << ",NA";
        }
        out << "," << r.status << "\n";
    }
}

}  // namespace figlearn
