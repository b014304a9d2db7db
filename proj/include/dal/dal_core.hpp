#pragma once

// The DAL state machine. Each cycle: take the learner trained on the current
// labeled set, synthesize uncertain samples, re-check every automatically
// labeled example (label correction), decide each new sample by the
// agreement rule (auto-label when the learner's argmax equals the latent
// code, otherwise ask the oracle), insert, retrain and evaluate.

#include <optional>
#include <span>
#include <vector>

#include "dal/acquisition.hpp"
#include "dal/dataset.hpp"
#include "dal/error.hpp"
#include "dal/experiment.hpp"
#include "dal/generator.hpp"
#include "dal/learner.hpp"

namespace dal {

struct LabelDecision {
    enum class Kind { Auto, RouteToOracle };
    Kind kind = Kind::RouteToOracle;
    std::size_t label = 0;  // meaningful for Auto only

    static LabelDecision automatic(std::size_t label) { return {Kind::Auto, label}; }
    static LabelDecision oracle() { return {Kind::RouteToOracle, 0}; }
    bool is_auto() const { return kind == Kind::Auto; }
    bool operator==(const LabelDecision&) const = default;
};

/// Agreement rule for a freshly generated sample.
inline LabelDecision decide_new(const LearnerModel& model, const GeneratedSample& sample) {
    const std::size_t code = sample.latent.code;
    return predict(model, sample.x) == code ? LabelDecision::automatic(code) : LabelDecision::oracle();
}

/// Agreement rule for an already auto-labeled example: keep the stored label
/// while the current learner still predicts it.
inline LabelDecision decide_revisit(const LearnerModel& model, const LabeledExample& example) {
    if (example.source != Source::Auto)
        throw ContractViolation("decide_revisit: example is " + std::string(to_string(example.source)) +
                                "-sourced, only auto-labeled examples are revisited");
    return predict(model, example.x) == example.label ? LabelDecision::automatic(example.label)
                                                      : LabelDecision::oracle();
}

/// How a cycle acquires and labels samples. DAL and the generation-based
/// baselines differ only in these switches.
struct CyclePlan {
    enum class Sampling { Uncertain, Random };
    enum class Labeling { Agreement, AllOracle };
    Sampling sampling = Sampling::Uncertain;
    Labeling labeling = Labeling::Agreement;
    bool label_correction = true;

    static CyclePlan dal() { return {}; }
    static CyclePlan dal_without_correction() { return {Sampling::Uncertain, Labeling::Agreement, false}; }
    static CyclePlan all_oracle(Sampling s) { return {s, Labeling::AllOracle, false}; }
};

/// What happened inside the most recent cycle (for instrumentation).
struct CycleLog {
    std::vector<std::size_t> revisited;  // indices into DalState::labeled
    std::vector<std::size_t> corrected;  // subset of revisited routed to the oracle
    std::size_t rejected_latent_steps = 0;
};

struct DalState {
    std::uint64_t run_seed = 0;
    std::vector<LabeledExample> labeled;
    std::optional<LearnerModel> model;           // trained on the current labeled set
    std::optional<LearnerModel> decision_model;  // the model that made the last cycle's decisions
    std::size_t cycle = 0;
    std::size_t n_seed = 0;
    std::size_t oracle_count = 0;  // oracle queries, seed set excluded
    std::size_t auto_count = 0;    // automatic labels assigned to new samples
    std::vector<CycleMetrics> history;
    CycleLog last_log;

    std::size_t auto_size() const {
        std::size_t n = 0;
        for (const auto& e : labeled)
            if (e.source == Source::Auto) ++n;
        return n;
    }
};

/// Fraction of auto-labeled examples whose label differs from the ground
/// truth (0 when there are none). Simulation diagnostic only.
inline double noise_rate(const DalState& state) {
    std::size_t autos = 0, noisy = 0;
    for (const auto& e : state.labeled)
        if (e.source == Source::Auto) {
            ++autos;
            if (e.label != e.ground_truth) ++noisy;
        }
    return static_cast<double>(noisy) / static_cast<double>(std::max<std::size_t>(autos, 1));
}

/// Simulated annotator for examples already in the labeled set.
inline std::size_t oracle_label(const LabeledExample& example) { return example.ground_truth; }

namespace detail {

inline LearnerModel train_for_cycle(const DalState& state, std::size_t classes, const TrainConfig& cfg,
                                    std::size_t cycle) {
    Rng rng(derive_seed(state.run_seed, stream::kTrain, cfg.seed, cycle));
    return train(state.labeled, classes, cfg, rng);
}

}  // namespace detail

/// Builds the initial state: n_seed oracle-labeled generations (source Seed),
/// a model trained on them, and the cycle-0 evaluation.
inline DalState initial_state(const World& world, std::size_t n_seed, const TrainConfig& train_cfg,
                              std::uint64_t run_seed) {
    if (n_seed < 1) throw InvalidInput("initial_state: n_seed must be >= 1");
    DalState state;
    state.run_seed = run_seed;
    state.n_seed = n_seed;
    Rng rng(derive_seed(run_seed, stream::kSeedSet));
    state.labeled = draw_labeled(world.generator, n_seed, Source::Seed, rng);
    state.model = detail::train_for_cycle(state, world.generator.classes, train_cfg, 0);
    CycleMetrics m;
    m.test_accuracy = evaluate(*state.model, world.test);
    state.history.push_back(m);
    return state;
}

/// One active-learning cycle. Updates `state` in place and returns the
/// cycle's metrics (also appended to state.history).
inline CycleMetrics run_cycle(DalState& state, const World& world, const AcquisitionConfig& acq_cfg,
                              const TrainConfig& train_cfg, const CyclePlan& plan = CyclePlan::dal()) {
    const GeneratorSpec& gen = world.generator;
    const std::size_t k = state.cycle;
    if (state.labeled.empty()) throw InvalidInput("run_cycle: empty labeled set");
    if (!state.model) state.model = detail::train_for_cycle(state, gen.classes, train_cfg, k);
    const LearnerModel theta = *state.model;

    CycleLog log;
    Rng acq_rng(derive_seed(state.run_seed, stream::kAcquire, k + 1));
    std::vector<GeneratedSample> candidates =
        plan.sampling == CyclePlan::Sampling::Uncertain
            ? synthesize_uncertain(theta, gen, acq_cfg, acq_rng, &log.rejected_latent_steps)
            : generate_batch(gen, acq_cfg.m, acq_cfg.code_policy, acq_rng);

    CycleMetrics metrics;
    metrics.cycle = k + 1;

    // Revisit the auto-labeled set before deciding on new samples.
    if (plan.labeling == CyclePlan::Labeling::Agreement && plan.label_correction) {
        for (std::size_t i = 0; i < state.labeled.size(); ++i) {
            LabeledExample& e = state.labeled[i];
            if (e.source != Source::Auto) continue;
            log.revisited.push_back(i);
            if (!decide_revisit(theta, e).is_auto()) {
                e.label = oracle_label(e);
                e.source = Source::Oracle;
                ++metrics.oracle_revisit;
                log.corrected.push_back(i);
            }
        }
    }

    for (const GeneratedSample& s : candidates) {
        LabeledExample e{s.x, 0, Source::Oracle, k + 1, oracle_label(s)};
        const LabelDecision d = plan.labeling == CyclePlan::Labeling::Agreement ? decide_new(theta, s)
                                                                                : LabelDecision::oracle();
        if (d.is_auto()) {
            e.label = d.label;
            e.source = Source::Auto;
            ++metrics.auto_new;
        } else {
            e.label = oracle_label(s);
            ++metrics.oracle_new;
        }
        state.labeled.push_back(std::move(e));
    }

    state.oracle_count += metrics.oracle_this_cycle();
    state.auto_count += metrics.auto_new;
    state.decision_model = theta;
    state.cycle = k + 1;
    state.model = detail::train_for_cycle(state, gen.classes, train_cfg, k + 1);

    metrics.test_accuracy = evaluate(*state.model, world.test);
    metrics.cumulative_oracle = state.oracle_count;
    metrics.cumulative_auto = state.auto_count;
    metrics.alpha = oracle_use_proportion(metrics.oracle_this_cycle(), metrics.auto_new);
    metrics.noise_rate = noise_rate(state);
    state.last_log = std::move(log);
    state.history.push_back(metrics);
    return metrics;
}

/// Runs one seed of a cycle-based strategy until the oracle budget is
/// reached or max_cycles cycles have run.
inline RunResult run_cycles(const ExperimentConfig& cfg, const World& world, StrategyKind kind, const CyclePlan& plan,
                            std::uint64_t seed) {
    DalState state = initial_state(world, cfg.n_seed, cfg.train, seed);
    AcquisitionConfig acq = cfg.acquisition_for_run();
    if (kind == StrategyKind::GaalUniformClasses) acq.code_policy = CodePolicy::Stratified;
    while (state.oracle_count < cfg.budget && state.cycle < cfg.max_cycles)
        run_cycle(state, world, acq, cfg.train, plan);
    return RunResult{kind, seed, std::move(state.history)};
}

/// DAL with label correction over every configured seed.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const World world = make_world(cfg.world, cfg.test_size);
    ExperimentResult result;
    for (std::uint64_t seed : cfg.seeds)
        result.runs.push_back(run_cycles(cfg, world, StrategyKind::DAL, CyclePlan::dal(), seed));
    return result;
}

}  // namespace dal
