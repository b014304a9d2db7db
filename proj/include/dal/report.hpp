#pragma once

// Metrics persistence and the experiment runner: metrics.csv, plot-ready
// per-figure CSVs, the summary document, and cross-run comparison tables.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dal/baselines.hpp"
#include "dal/config.hpp"
#include "dal/error.hpp"
#include "dal/experiment.hpp"

namespace dal {

inline constexpr const char* kMetricsHeader =
    "strategy,seed,cycle,cumulative_oracle,cumulative_auto,test_accuracy,alpha,noise_rate";

/// Marker left in the output directory while a run is in progress.
inline constexpr const char* kPartialMarker = "RUN_INCOMPLETE";

struct MetricsRow {
    std::string strategy;
    std::uint64_t seed = 0;
    std::size_t cycle = 0;
    std::size_t cumulative_oracle = 0;
    std::size_t cumulative_auto = 0;
    double test_accuracy = 0.0;
    double alpha = 0.0;
    double noise_rate = 0.0;

    bool operator==(const MetricsRow&) const = default;
};

inline std::string format_fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

inline std::vector<MetricsRow> to_rows(const ExperimentResult& result) {
    std::vector<MetricsRow> rows;
    for (const auto& run : result.runs)
        for (const auto& m : run.history)
            rows.push_back({std::string(to_string(run.strategy)), run.seed, m.cycle, m.cumulative_oracle,
                            m.cumulative_auto, m.test_accuracy, m.alpha, m.noise_rate});
    return rows;
}

inline void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows) {
    os << kMetricsHeader << '\n';
    for (const auto& r : rows)
        os << r.strategy << ',' << r.seed << ',' << r.cycle << ',' << r.cumulative_oracle << ',' << r.cumulative_auto
           << ',' << format_fixed(r.test_accuracy) << ',' << format_fixed(r.alpha) << ','
           << format_fixed(r.noise_rate) << '\n';
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

template <class T>
T parse_number(const std::string& s, const std::string& where) {
    std::istringstream is(s);
    T v{};
    if (!(is >> v) || !is.eof()) throw InvalidInput(where + ": cannot parse \"" + s + "\"");
    return v;
}

}  // namespace detail

/// Reads a metrics file. A header that is not exactly the metrics schema
/// raises InvalidInput naming the expected and found columns.
inline std::vector<MetricsRow> read_metrics_csv(std::istream& is, const std::string& name = "metrics") {
    std::string header;
    if (!std::getline(is, header)) throw InvalidInput(name + ": empty file");
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != kMetricsHeader) {
        const auto expected = detail::split_csv_line(kMetricsHeader);
        const auto found = detail::split_csv_line(header);
        std::string msg = name + ": schema mismatch; expected columns [" + std::string(kMetricsHeader) + "], found [" +
                          header + "]";
        std::string missing, extra;
        for (const auto& c : expected)
            if (std::find(found.begin(), found.end(), c) == found.end()) missing += " " + c;
        for (const auto& c : found)
            if (std::find(expected.begin(), expected.end(), c) == expected.end()) extra += " " + c;
        if (!missing.empty()) msg += "; missing:" + missing;
        if (!extra.empty()) msg += "; unexpected:" + extra;
        throw InvalidInput(msg);
    }
    std::vector<MetricsRow> rows;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        const std::string where = name + ":" + std::to_string(lineno);
        if (cells.size() != 8) throw InvalidInput(where + ": expected 8 columns, found " + std::to_string(cells.size()));
        MetricsRow r;
        r.strategy = cells[0];
        r.seed = detail::parse_number<std::uint64_t>(cells[1], where);
        r.cycle = detail::parse_number<std::size_t>(cells[2], where);
        r.cumulative_oracle = detail::parse_number<std::size_t>(cells[3], where);
        r.cumulative_auto = detail::parse_number<std::size_t>(cells[4], where);
        r.test_accuracy = detail::parse_number<double>(cells[5], where);
        r.alpha = detail::parse_number<double>(cells[6], where);
        r.noise_rate = detail::parse_number<double>(cells[7], where);
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Plot data
// ---------------------------------------------------------------------------

namespace detail {

struct CycleAggregate {
    std::vector<double> oracle, accuracy, alpha, noise;
};

/// strategy -> cycle -> values across seeds, in first-seen strategy order.
inline std::vector<std::pair<std::string, std::map<std::size_t, CycleAggregate>>> aggregate_by_cycle(
    const std::vector<MetricsRow>& rows) {
    std::vector<std::pair<std::string, std::map<std::size_t, CycleAggregate>>> out;
    for (const auto& r : rows) {
        auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return p.first == r.strategy; });
        if (it == out.end()) {
            out.push_back({r.strategy, {}});
            it = std::prev(out.end());
        }
        auto& agg = it->second[r.cycle];
        agg.oracle.push_back(static_cast<double>(r.cumulative_oracle));
        agg.accuracy.push_back(r.test_accuracy);
        agg.alpha.push_back(r.alpha);
        agg.noise.push_back(r.noise_rate);
    }
    return out;
}

}  // namespace detail

/// Accuracy against human labels spent: mean over seeds per (strategy, cycle).
inline void write_accuracy_vs_oracle(std::ostream& os, const std::vector<MetricsRow>& rows) {
    os << "strategy,cycle,seeds,mean_cumulative_oracle,mean_test_accuracy,std_test_accuracy\n";
    for (const auto& [strategy, cycles] : detail::aggregate_by_cycle(rows))
        for (const auto& [cycle, a] : cycles)
            os << strategy << ',' << cycle << ',' << a.accuracy.size() << ',' << format_fixed(mean(a.oracle)) << ','
               << format_fixed(mean(a.accuracy)) << ',' << format_fixed(stddev(a.accuracy)) << '\n';
}

/// DAL with and without label correction: accuracy and residual noise.
inline void write_label_correction(std::ostream& os, const std::vector<MetricsRow>& rows) {
    os << "strategy,cycle,seeds,mean_test_accuracy,mean_noise_rate\n";
    for (const auto& [strategy, cycles] : detail::aggregate_by_cycle(rows)) {
        if (strategy != to_string(StrategyKind::DAL) && strategy != to_string(StrategyKind::DalNoCorrection)) continue;
        for (const auto& [cycle, a] : cycles)
            os << strategy << ',' << cycle << ',' << a.accuracy.size() << ',' << format_fixed(mean(a.accuracy)) << ','
               << format_fixed(mean(a.noise)) << '\n';
    }
}

/// Oracle-use proportion per cycle for the agreement-labeling strategies.
inline void write_alpha_vs_cycle(std::ostream& os, const std::vector<MetricsRow>& rows) {
    os << "strategy,cycle,seeds,mean_alpha,std_alpha\n";
    for (const auto& [strategy, cycles] : detail::aggregate_by_cycle(rows)) {
        if (strategy != to_string(StrategyKind::DAL) && strategy != to_string(StrategyKind::DalNoCorrection)) continue;
        for (const auto& [cycle, a] : cycles) {
            if (cycle == 0) continue;
            os << strategy << ',' << cycle << ',' << a.alpha.size() << ',' << format_fixed(mean(a.alpha)) << ','
               << format_fixed(stddev(a.alpha)) << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

/// Oracle labels spent when `rows` (one strategy, one seed, any order) first
/// reached `level`, or nullopt if it never did.
inline std::optional<std::size_t> oracle_labels_to_reach(std::vector<MetricsRow> rows, double level) {
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.cycle < b.cycle; });
    for (const auto& r : rows)
        if (r.test_accuracy >= level) return r.cumulative_oracle;
    return std::nullopt;
}

struct ComparisonColumn {
    std::string name;  // "<source>:<strategy>"
    std::vector<std::optional<double>> mean_oracle;  // per level; nullopt = not reached
};

struct ComparisonTable {
    std::vector<double> levels;
    std::vector<ComparisonColumn> columns;

    void write(std::ostream& os) const {
        os << "accuracy_level";
        for (const auto& c : columns) os << ',' << c.name;
        os << '\n';
        for (std::size_t i = 0; i < levels.size(); ++i) {
            os << format_fixed(levels[i]);
            for (const auto& c : columns) os << ',' << (c.mean_oracle[i] ? format_fixed(*c.mean_oracle[i]) : "not reached");
            os << '\n';
        }
    }
};

struct NamedMetrics {
    std::string name;
    std::vector<MetricsRow> rows;
};

/// For each level and each (file, strategy), the mean over seeds of the oracle
/// labels needed to first reach the level. A column is "not reached" at a
/// level when any of its seeds never reached it.
inline ComparisonTable compare(const std::vector<NamedMetrics>& inputs, const std::vector<double>& levels) {
    if (inputs.size() < 2) throw InvalidInput("compare: need at least two metrics files");
    ComparisonTable table;
    table.levels = levels;
    for (const auto& in : inputs) {
        std::vector<std::string> strategies;
        for (const auto& r : in.rows)
            if (std::find(strategies.begin(), strategies.end(), r.strategy) == strategies.end())
                strategies.push_back(r.strategy);
        for (const auto& strategy : strategies) {
            std::map<std::uint64_t, std::vector<MetricsRow>> by_seed;
            for (const auto& r : in.rows)
                if (r.strategy == strategy) by_seed[r.seed].push_back(r);
            ComparisonColumn col{in.name + ":" + strategy, {}};
            for (double level : levels) {
                std::vector<double> spent;
                bool all_reached = true;
                for (const auto& [seed, rows] : by_seed) {
                    const auto n = oracle_labels_to_reach(rows, level);
                    if (!n) {
                        all_reached = false;
                        break;
                    }
                    spent.push_back(static_cast<double>(*n));
                }
                col.mean_oracle.push_back(all_reached ? std::optional<double>(mean(spent)) : std::nullopt);
            }
            table.columns.push_back(std::move(col));
        }
    }
    return table;
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write " + path.string());
    os << content;
    if (!os.flush()) throw IoError("write failed for " + path.string());
}

template <class Fn>
std::string render(Fn&& fn) {
    std::ostringstream os;
    fn(os);
    return os.str();
}

}  // namespace detail

/// Runs every configured strategy and writes into cfg.output_dir:
/// metrics.csv, summary.json, accuracy_vs_oracle.csv, label_correction.csv,
/// alpha_vs_cycle.csv and config.json. A partial-run marker exists while the
/// run is in progress and is removed on success.
inline ExperimentResult run(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    cfg.validate();
    const fs::path dir(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
    const fs::path marker = dir / kPartialMarker;
    detail::write_file(marker, "run started; outputs in this directory are incomplete\n");

    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentResult result = run_all(cfg);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const auto rows = to_rows(result);
    detail::write_file(dir / "metrics.csv", detail::render([&](std::ostream& os) { write_metrics_csv(os, rows); }));
    detail::write_file(dir / "accuracy_vs_oracle.csv",
                       detail::render([&](std::ostream& os) { write_accuracy_vs_oracle(os, rows); }));
    detail::write_file(dir / "label_correction.csv",
                       detail::render([&](std::ostream& os) { write_label_correction(os, rows); }));
    detail::write_file(dir / "alpha_vs_cycle.csv",
                       detail::render([&](std::ostream& os) { write_alpha_vs_cycle(os, rows); }));
    detail::write_file(dir / "config.json", serialize_config(cfg).dump(2) + "\n");

    Json summary;
    summary["wall_time_seconds"] = wall;
    summary["seeds"] = cfg.seeds;
    summary["strategies"] = Json::array();
    for (const auto& s : result.summaries()) {
        double total = 0.0;
        for (const auto& r : result.runs)
            if (r.strategy == s.strategy && !r.history.empty())
                total += static_cast<double>(r.history.back().cumulative_oracle);
        summary["strategies"].push_back({{"strategy", std::string(to_string(s.strategy))},
                                         {"final_accuracy_mean", s.final_accuracy_mean},
                                         {"final_accuracy_std", s.final_accuracy_std},
                                         {"oracle_labels_per_seed_mean", s.total_oracle_mean},
                                         {"oracle_labels_total", total}});
    }
    detail::write_file(dir / "summary.json", summary.dump(2) + "\n");

    fs::remove(marker, ec);
    return result;
}

}  // namespace dal
