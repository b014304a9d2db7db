#pragma once

// Experiment-level types shared by the DAL loop, the baselines and the
// runner: strategy kinds, the experiment configuration, the per-cycle
// metrics record, and the fixed simulated world an experiment runs in.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dal/acquisition.hpp"
#include "dal/dataset.hpp"
#include "dal/error.hpp"
#include "dal/generator.hpp"
#include "dal/learner.hpp"

namespace dal {

enum class StrategyKind {
    DAL,
    GaalEntropy,
    RandomGenerated,
    FullSupervisedGenerated,
    FullSupervisedReal,
    DalNoCorrection,
    GaalUniformClasses,
};

inline constexpr std::array<StrategyKind, 7> kAllStrategies{
    StrategyKind::DAL,
    StrategyKind::GaalEntropy,
    StrategyKind::RandomGenerated,
    StrategyKind::FullSupervisedGenerated,
    StrategyKind::FullSupervisedReal,
    StrategyKind::DalNoCorrection,
    StrategyKind::GaalUniformClasses,
};

constexpr std::string_view to_string(StrategyKind k) {
    switch (k) {
        case StrategyKind::DAL: return "DAL";
        case StrategyKind::GaalEntropy: return "GaalEntropy";
        case StrategyKind::RandomGenerated: return "RandomGenerated";
        case StrategyKind::FullSupervisedGenerated: return "FullSupervisedGenerated";
        case StrategyKind::FullSupervisedReal: return "FullSupervisedReal";
        case StrategyKind::DalNoCorrection: return "DalNoCorrection";
        case StrategyKind::GaalUniformClasses: return "GaalUniformClasses";
    }
    return "?";
}

inline std::optional<StrategyKind> strategy_from_string(std::string_view name) {
    for (StrategyKind k : kAllStrategies)
        if (to_string(k) == name) return k;
    return std::nullopt;
}

struct ExperimentConfig {
    std::string preset;  // "", "mnist-like", "fmnist-like" or "cifar-like"
    WorldParams world;
    std::vector<StrategyKind> strategies{StrategyKind::DAL};
    std::size_t n_seed = 100;
    std::size_t m = 100;
    std::size_t budget = 0;  // oracle queries, seed set excluded
    std::size_t max_cycles = 0;
    AcquisitionConfig acquisition;  // acquisition.m mirrors m
    TrainConfig train;
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    std::size_t test_size = 2000;
    std::size_t pool_size = 5000;  // dataset size of the fully supervised baselines
    std::string output_dir = "out";

    AcquisitionConfig acquisition_for_run() const {
        AcquisitionConfig a = acquisition;
        a.m = m;
        return a;
    }

    void validate() const {
        std::vector<std::string> bad;
        if (strategies.empty()) bad.emplace_back("strategies");
        if (n_seed < 1) bad.emplace_back("n_seed");
        if (m < 1) bad.emplace_back("m");
        if (seeds.empty()) bad.emplace_back("seeds");
        if (test_size < 1) bad.emplace_back("test_size");
        if (pool_size < 1) bad.emplace_back("pool_size");
        if (!bad.empty()) {
            std::string msg = "invalid configuration fields:";
            for (const auto& b : bad) msg += " " + b;
            throw ConfigError(msg);
        }
        acquisition_for_run().validate();
        train.validate();
        make_generator(world);  // throws ConfigError on a bad world
    }

    bool operator==(const ExperimentConfig&) const = default;
};

struct CycleMetrics {
    std::size_t cycle = 0;
    double test_accuracy = 0.0;
    std::size_t oracle_new = 0;      // new samples labeled by the oracle this cycle
    std::size_t oracle_revisit = 0;  // auto-labeled examples corrected by the oracle this cycle
    std::size_t auto_new = 0;        // new samples labeled automatically this cycle
    std::size_t cumulative_oracle = 0;
    std::size_t cumulative_auto = 0;
    double alpha = 0.0;
    double noise_rate = 0.0;

    std::size_t oracle_this_cycle() const { return oracle_new + oracle_revisit; }
};

/// Oracle-use proportion for one cycle: oracle labels over automatic labels.
/// A cycle with no automatic labels divides by one, so alpha equals the
/// oracle count there.
inline double oracle_use_proportion(std::size_t oracle, std::size_t automatic) {
    return static_cast<double>(oracle) / static_cast<double>(std::max<std::size_t>(automatic, 1));
}

struct RunResult {
    StrategyKind strategy = StrategyKind::DAL;
    std::uint64_t seed = 0;
    std::vector<CycleMetrics> history;
};

struct StrategySummary {
    StrategyKind strategy = StrategyKind::DAL;
    double final_accuracy_mean = 0.0;
    double final_accuracy_std = 0.0;
    double total_oracle_mean = 0.0;
};

struct ExperimentResult {
    std::vector<RunResult> runs;  // strategy-major, then seed order

    std::vector<StrategySummary> summaries() const {
        std::vector<StrategySummary> out;
        for (StrategyKind k : kAllStrategies) {
            std::vector<double> acc, oracle;
            for (const auto& r : runs)
                if (r.strategy == k && !r.history.empty()) {
                    acc.push_back(r.history.back().test_accuracy);
                    oracle.push_back(static_cast<double>(r.history.back().cumulative_oracle));
                }
            if (acc.empty()) continue;
            out.push_back({k, mean(acc), stddev(acc), mean(oracle)});
        }
        return out;
    }
};

/// The fixed simulated world: the generator used for synthesis, the "real"
/// data distribution, and the held-out test set drawn from it. Depends only
/// on the world parameters, so every strategy and seed sees the same world.
struct World {
    GeneratorSpec generator;
    GeneratorSpec real;
    std::vector<LabeledExample> test;
};

/// `count` ground-truth-labeled draws from `spec` with uniform codes.
inline std::vector<LabeledExample> draw_labeled(const GeneratorSpec& spec, std::size_t count, Source source, Rng& rng) {
    std::vector<LabeledExample> out;
    out.reserve(count);
    for (const auto& s : generate_batch(spec, count, CodePolicy::Uniform, rng))
        out.push_back(LabeledExample{s.x, oracle_label(s), source, 0, oracle_label(s)});
    return out;
}

inline World make_world(const WorldParams& params, std::size_t test_size) {
    World w;
    w.generator = make_generator(params);
    w.real = real_distribution(w.generator, params.effective_real_noise());
    Rng rng(derive_seed(params.world_seed, 0x74657374ULL));
    w.test = draw_labeled(w.real, test_size, Source::Seed, rng);
    return w;
}

// Stream tags for per-run seed derivation.
namespace stream {
inline constexpr std::uint64_t kSeedSet = 1;
inline constexpr std::uint64_t kTrain = 2;
inline constexpr std::uint64_t kAcquire = 3;
inline constexpr std::uint64_t kPool = 4;
}  // namespace stream

}  // namespace dal
