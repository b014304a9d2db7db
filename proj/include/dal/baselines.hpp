#pragma once

// Comparison strategies. All of them share the world, learner, seeds and m
// with DAL; only acquisition and labeling differ.

#include <vector>

#include "dal/dal_core.hpp"
#include "dal/experiment.hpp"

namespace dal {

namespace detail {

/// Trains once on a fully labeled dataset and reports it as a single row.
inline RunResult run_fully_supervised(const ExperimentConfig& cfg, const World& world, StrategyKind kind,
                                      std::uint64_t seed) {
    const GeneratorSpec& source = kind == StrategyKind::FullSupervisedReal ? world.real : world.generator;
    Rng pool_rng(derive_seed(seed, stream::kPool));
    const std::vector<LabeledExample> pool = draw_labeled(source, cfg.pool_size, Source::Oracle, pool_rng);
    Rng train_rng(derive_seed(seed, stream::kTrain, cfg.train.seed, std::uint64_t{0}));
    const LearnerModel model = train(pool, world.generator.classes, cfg.train, train_rng);
    CycleMetrics m;
    m.test_accuracy = evaluate(model, world.test);
    m.oracle_new = cfg.pool_size;
    m.cumulative_oracle = cfg.pool_size;
    m.alpha = oracle_use_proportion(cfg.pool_size, 0);
    return RunResult{kind, seed, {m}};
}

}  // namespace detail

inline CyclePlan plan_for(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::DAL: return CyclePlan::dal();
        case StrategyKind::DalNoCorrection: return CyclePlan::dal_without_correction();
        case StrategyKind::GaalEntropy:
        case StrategyKind::GaalUniformClasses: return CyclePlan::all_oracle(CyclePlan::Sampling::Uncertain);
        case StrategyKind::RandomGenerated: return CyclePlan::all_oracle(CyclePlan::Sampling::Random);
        case StrategyKind::FullSupervisedGenerated:
        case StrategyKind::FullSupervisedReal: break;
    }
    throw InvalidInput("plan_for: " + std::string(to_string(kind)) + " is not cycle-based");
}

inline bool is_cycle_based(StrategyKind kind) {
    return kind != StrategyKind::FullSupervisedGenerated && kind != StrategyKind::FullSupervisedReal;
}

/// One seed of one strategy in an already-built world.
inline RunResult run_strategy_seed(StrategyKind kind, const ExperimentConfig& cfg, const World& world,
                                   std::uint64_t seed) {
    if (!is_cycle_based(kind)) return detail::run_fully_supervised(cfg, world, kind, seed);
    return run_cycles(cfg, world, kind, plan_for(kind), seed);
}

inline ExperimentResult run_strategy(StrategyKind kind, const ExperimentConfig& cfg, const World& world) {
    ExperimentResult result;
    for (std::uint64_t seed : cfg.seeds) result.runs.push_back(run_strategy_seed(kind, cfg, world, seed));
    return result;
}

inline ExperimentResult run_strategy(StrategyKind kind, const ExperimentConfig& cfg) {
    cfg.validate();
    return run_strategy(kind, cfg, make_world(cfg.world, cfg.test_size));
}

/// Every strategy in cfg.strategies, in configured order, sharing one world.
inline ExperimentResult run_all(const ExperimentConfig& cfg) {
    cfg.validate();
    const World world = make_world(cfg.world, cfg.test_size);
    ExperimentResult result;
    for (StrategyKind kind : cfg.strategies) {
        ExperimentResult part = run_strategy(kind, cfg, world);
        for (auto& r : part.runs) result.runs.push_back(std::move(r));
    }
    return result;
}

}  // namespace dal
