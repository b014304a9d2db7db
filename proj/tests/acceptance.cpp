// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dal/dal.hpp"

namespace {

using namespace dal;

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const std::vector<std::uint64_t> kSeeds{0, 1, 2, 3, 4};

std::vector<MetricsRow> rows_of(const RunResult& r) {
    ExperimentResult e;
    e.runs.push_back(r);
    return to_rows(e);
}

// Oracle labels spent when the run first reached `level`; infinity if never.
double labels_to_reach(const RunResult& r, double level) {
    const auto n = oracle_labels_to_reach(rows_of(r), level);
    return n ? static_cast<double>(*n) : std::numeric_limits<double>::infinity();
}

std::string labels_str(double v) { return std::isinf(v) ? "never" : fmt("%.0f", v); }

ExperimentConfig cycles_config(std::size_t max_cycles) {
    ExperimentConfig cfg;
    cfg.budget = std::numeric_limits<std::size_t>::max();
    cfg.max_cycles = max_cycles;
    cfg.seeds = kSeeds;
    return cfg;
}

// 1 -------------------------------------------------------------------------
Verdict gradient_correctness() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        LearnerModel m = LearnerModel::zeros(trial % 4 == 0 ? Architecture::LinearSoftmax : Architecture::OneHidden, 10,
                                             16, 32);
        for (auto* block : {&m.in_w, &m.out_w}) {
            for (Eigen::Index i = 0; i < block->size(); ++i) block->data()[i] = 0.4 * rng.normal();
        }
        for (auto* block : {&m.in_b, &m.out_b}) {
            for (Eigen::Index i = 0; i < block->size(); ++i) block->data()[i] = 0.4 * rng.normal();
        }
        const Vector x = rng.normal_vector(16);
        const Vector fd = finite_diff_grad([&](const Vector& v) { return neg_entropy_objective(predict_proba(m, v)); }, x);
        worst = std::max(worst, relative_error(input_gradient(m, x), fd));
    }
    const double t = seconds_since(t0);
    return {worst < 1e-4 && t < 5.0,
            "max relative error " + fmt("%.2e", worst) + " over 100 pairs (< 1e-4), " + fmt("%.2f", t) + " s (< 5 s)"};
}

// 2 -------------------------------------------------------------------------
Verdict optimizer_behaviour() {
    // Default world, learner trained on a 100-point seed set.
    const World world = make_world(WorldParams{}, 200);
    const DalState st = initial_state(world, 100, TrainConfig{}, 0);
    Rng rng(derive_seed(0, 0xacce97));
    const auto batch = generate_batch(world.generator, 64, CodePolicy::Uniform, rng);
    const auto opt = optimize_latents(*st.model, world.generator, batch, AcquisitionConfig{}, true);
    std::size_t monotone = 0;
    for (const auto& traj : opt.objective) {
        bool ok = true;
        for (std::size_t s = 1; s < traj.size(); ++s) ok = ok && traj[s] <= traj[s - 1];
        if (ok) ++monotone;
    }
    const double frac = static_cast<double>(monotone) / 64.0;

    // C = 2 world, linear learner, 20 seeds.
    WorldParams two;
    two.classes = 2;
    two.generation_accuracy.clear();
    two.confusable_groups.clear();
    const World w2 = make_world(two, 200);
    TrainConfig lin;
    lin.arch = Architecture::LinearSoftmax;
    std::size_t shrank = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const DalState s2 = initial_state(w2, 100, lin, seed);
        const LearnerModel& model = *s2.model;
        Rng r(derive_seed(seed, 0xc2));
        const auto b = generate_batch(w2.generator, 64, CodePolicy::Uniform, r);
        const auto o = optimize_latents(model, w2.generator, b, AcquisitionConfig{});
        double before = 0.0, after = 0.0;
        for (std::size_t i = 0; i < b.size(); ++i) {
            const Vector l0 = model.logits(b[i].x);
            const Vector l1 = model.logits(reevaluate(b[i], o.z[i], w2.generator));
            before += std::abs(l0[0] - l0[1]);
            after += std::abs(l1[0] - l1[1]);
        }
        if (after < before) ++shrank;
    }
    return {frac >= 0.95 && shrank == 20,
            fmt("%.3f", frac) + " of 64 trajectories non-increasing (>= 0.95); C=2 mean |margin| shrank in " +
                std::to_string(shrank) + "/20 seeds (20/20)"};
}

// 3 -------------------------------------------------------------------------
Verdict generation_fidelity() {
    const auto t0 = std::chrono::steady_clock::now();
    WorldParams p;
    p.generation_accuracy = mnist_generation_accuracy();
    p.confusable_groups = find_preset("mnist-like")->confusable_groups;
    const GeneratorSpec spec = make_generator(p);
    Rng rng(3);
    const auto measured = measure_generation_accuracy(spec, 100000, rng);
    double worst = 0.0;
    for (std::size_t c = 0; c < measured.size(); ++c)
        worst = std::max(worst, std::abs(measured[c] - p.generation_accuracy[c]));
    const double t = seconds_since(t0);
    return {worst <= 0.02 && t < 10.0, "class 0 measured " + fmt("%.4f", measured[0]) + " (configured 0.996); max |dev| " +
                                           fmt("%.4f", worst) + " (<= 0.02); " + fmt("%.2f", t) + " s (< 10 s)"};
}

// 4 and 7 share the 20-cycle default-world DAL runs -------------------------
struct DefaultWorldRuns {
    std::vector<RunResult> dal, gaal;
    double seconds = 0.0;
};

const DefaultWorldRuns& default_world_runs() {
    static const DefaultWorldRuns runs = [] {
        DefaultWorldRuns r;
        const auto t0 = std::chrono::steady_clock::now();
        const ExperimentConfig cfg = cycles_config(20);
        const World world = make_world(cfg.world, cfg.test_size);
        for (auto seed : kSeeds) {
            r.dal.push_back(run_strategy_seed(StrategyKind::DAL, cfg, world, seed));
            r.gaal.push_back(run_strategy_seed(StrategyKind::GaalEntropy, cfg, world, seed));
        }
        r.seconds = seconds_since(t0);
        return r;
    }();
    return runs;
}

Verdict budget_reduction() {
    const auto& r = default_world_runs();
    std::size_t wins = 0;
    std::string per_seed;
    for (std::size_t i = 0; i < kSeeds.size(); ++i) {
        const double d = labels_to_reach(r.dal[i], 0.85), g = labels_to_reach(r.gaal[i], 0.85);
        if (d < g) ++wins;
        per_seed += " " + labels_str(d) + "/" + labels_str(g);
    }
    return {wins == 5 && r.seconds < 300.0, "DAL fewer oracle labels to 0.85 in " + std::to_string(wins) +
                                               "/5 seeds (5/5); DAL/GAAL:" + per_seed + "; " +
                                               fmt("%.1f", r.seconds) + " s (< 300 s)"};
}

Verdict oracle_usage_trend() {
    const auto& r = default_world_runs();
    std::size_t ok_seeds = 0;
    std::string per_seed;
    for (const auto& run : r.dal) {
        std::vector<double> alpha;
        for (const auto& m : run.history)
            if (m.cycle >= 1) alpha.push_back(m.alpha);
        std::size_t rises = 0;
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t i = 2; i < alpha.size(); ++i) {
            const double smoothed = (alpha[i - 2] + alpha[i - 1] + alpha[i]) / 3.0;
            if (smoothed > prev) ++rises;
            prev = smoothed;
        }
        if (rises == 0) ++ok_seeds;
        per_seed += " " + std::to_string(rises);
    }
    return {ok_seeds >= 4, "3-cycle smoothed alpha non-increasing in " + std::to_string(ok_seeds) +
                               "/5 seeds (>= 4); increases per seed:" + per_seed};
}

// 5 -------------------------------------------------------------------------
Verdict label_correction_trend() {
    ExperimentConfig cfg = cycles_config(15);
    cfg.world.generation_accuracy[6] = 0.4;  // planted low-accuracy class
    const World world = make_world(cfg.world, cfg.test_size);
    std::size_t acc_ok = 0, noise_ok = 0;
    std::string per_seed;
    for (auto seed : kSeeds) {
        const auto with = run_strategy_seed(StrategyKind::DAL, cfg, world, seed).history.back();
        const auto without = run_strategy_seed(StrategyKind::DalNoCorrection, cfg, world, seed).history.back();
        if (with.test_accuracy >= without.test_accuracy) ++acc_ok;
        if (with.noise_rate < without.noise_rate) ++noise_ok;
        per_seed += " " + fmt("%.3f", with.test_accuracy) + "/" + fmt("%.3f", without.test_accuracy) + "|" +
                    fmt("%.3f", with.noise_rate) + "/" + fmt("%.3f", without.noise_rate);
    }
    return {acc_ok >= 4 && noise_ok == 5, "accuracy DAL >= no-correction in " + std::to_string(acc_ok) +
                                              "/5 (>= 4); noise DAL < no-correction in " + std::to_string(noise_ok) +
                                              "/5 (5/5); acc|noise:" + per_seed};
}

// 6 -------------------------------------------------------------------------
Verdict disentanglement_effect() {
    // Same geometry and confusion pattern, diagonal shifted to the two means.
    auto world_with_mean = [](double target) {
        ExperimentConfig cfg = cycles_config(20);
        const double shift = target - mean(cfg.world.generation_accuracy);
        for (double& d : cfg.world.generation_accuracy) d += shift;
        return cfg;
    };
    const ExperimentConfig high = world_with_mean(0.6915), low = world_with_mean(0.6034);
    const World wh = make_world(high.world, high.test_size), wl = make_world(low.world, low.test_size);
    std::size_t wins = 0;
    std::string per_seed;
    for (auto seed : kSeeds) {
        const double h = labels_to_reach(run_strategy_seed(StrategyKind::DAL, high, wh, seed), 0.80);
        const double l = labels_to_reach(run_strategy_seed(StrategyKind::DAL, low, wl, seed), 0.80);
        if (h < l) ++wins;
        per_seed += " " + labels_str(h) + "/" + labels_str(l);
    }
    return {wins >= 4, "mean generation accuracy 0.69 world needs fewer oracle labels to 0.80 in " +
                           std::to_string(wins) + "/5 seeds (>= 4); 0.69/0.60:" + per_seed};
}

// 8 -------------------------------------------------------------------------
Verdict state_machine_invariants() {
    const ExperimentConfig cfg = cycles_config(20);
    const World world = make_world(cfg.world, cfg.test_size);
    DalState st = initial_state(world, cfg.n_seed, cfg.train, 0);
    const AcquisitionConfig acq = cfg.acquisition_for_run();
    std::size_t violations = 0, checked_autos = 0, revisits = 0;
    for (std::size_t k = 1; k <= 20; ++k) {
        std::vector<Source> before;
        for (const auto& e : st.labeled) before.push_back(e.source);
        run_cycle(st, world, acq, cfg.train);
        if (st.labeled.size() != cfg.n_seed + cfg.m * k) ++violations;
        std::size_t oracle_sourced = 0;
        for (const auto& e : st.labeled) {
            if (e.source == Source::Oracle) ++oracle_sourced;
            if (e.source == Source::Auto) {
                ++checked_autos;
                if (predict(*st.decision_model, e.x) != e.label) ++violations;
            }
        }
        if (oracle_sourced != st.oracle_count) ++violations;
        for (std::size_t i : st.last_log.revisited) {
            ++revisits;
            if (i >= before.size() || before[i] != Source::Auto) ++violations;
        }
    }
    return {violations == 0, std::to_string(violations) + " violations over 20 cycles (" +
                                 std::to_string(checked_autos) + " auto-label checks, " + std::to_string(revisits) +
                                 " revisits)"};
}

// 9 -------------------------------------------------------------------------
Verdict determinism() {
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "dal_acceptance_determinism";
    fs::remove_all(base);
    ExperimentConfig cfg;
    cfg.strategies = {StrategyKind::DAL, StrategyKind::GaalEntropy, StrategyKind::RandomGenerated,
                      StrategyKind::FullSupervisedReal};
    cfg.budget = 100000;
    cfg.max_cycles = 3;
    cfg.seeds = {0, 1};
    cfg.pool_size = 1000;
    auto read = [](const fs::path& p) {
        std::ifstream is(p, std::ios::binary);
        std::ostringstream ss;
        ss << is.rdbuf();
        return ss.str();
    };
    cfg.output_dir = (base / "a").string();
    run(cfg);
    cfg.output_dir = (base / "b").string();
    run(cfg);
    const std::string a = read(base / "a" / "metrics.csv"), b = read(base / "b" / "metrics.csv");
    fs::remove_all(base);
    return {!a.empty() && a == b, "metrics.csv " + std::to_string(a.size()) + " bytes, " +
                                      (a == b ? std::string("byte-identical") : std::string("DIFFERENT"))};
}

// 10 ------------------------------------------------------------------------
Verdict agreement_rule_branches() {
    auto model_2d = [](double w) {
        auto m = LearnerModel::zeros(Architecture::LinearSoftmax, 2, 2);
        m.out_w << w, 0.0, -w, 0.0;  // class 0 iff x[0] > 0 (for w > 0)
        return m;
    };
    auto sample = [](double x0, std::size_t code) {
        GeneratedSample s;
        s.x = Vector::Zero(2);
        s.x[0] = x0;
        s.latent = LatentInput{Vector::Zero(2), code};
        s.noise = Vector::Zero(2);
        return s;
    };
    auto auto_ex = [](double x0, std::size_t label, std::size_t truth) {
        Vector x = Vector::Zero(2);
        x[0] = x0;
        return LabeledExample{x, label, Source::Auto, 1, truth};
    };
    const auto good = model_2d(3.0);
    const auto zero = LearnerModel::zeros(Architecture::LinearSoftmax, 2, 2);
    std::vector<std::pair<std::string, bool>> cases;
    cases.emplace_back("agreement", decide_new(good, sample(1.0, 0)) == LabelDecision::automatic(0));
    cases.emplace_back("disagreement", decide_new(good, sample(1.0, 1)) == LabelDecision::oracle());
    cases.emplace_back("tie-at-uniform", decide_new(zero, sample(1.0, 0)) == LabelDecision::automatic(0) &&
                                             decide_new(zero, sample(1.0, 1)) == LabelDecision::oracle());
    cases.emplace_back("revisit-keep", decide_revisit(good, auto_ex(1.0, 0, 1)) == LabelDecision::automatic(0));

    // Revisit-correct through the state machine: the planted noisy example is
    // relabeled in place with the ground truth and leaves the auto set.
    GeneratorSpec s;
    s.classes = 2;
    s.latent_dim = 2;
    s.feature_dim = 2;
    s.decoders = {0.2 * Matrix::Identity(2, 2), 0.2 * Matrix::Identity(2, 2)};
    Vector b0(2), b1(2);
    b0 << 2.0, 0.0;
    b1 << -2.0, 0.0;
    s.offsets = {b0, b1};
    s.noise_scale = 0.1;
    s.confusion = Matrix::Identity(2, 2);
    World w{s, s, {}};
    Rng rng(1);
    w.test = draw_labeled(s, 50, Source::Seed, rng);
    TrainConfig tc;
    tc.arch = Architecture::LinearSoftmax;
    DalState st = initial_state(w, 10, tc, 0);
    st.labeled.push_back(auto_ex(-2.0, 0, 1));
    st.model = good;
    AcquisitionConfig acq;
    acq.m = 4;
    const auto m = run_cycle(st, w, acq, tc);
    const bool routed = decide_revisit(good, auto_ex(-2.0, 0, 1)) == LabelDecision::oracle();
    cases.emplace_back("revisit-correct", routed && st.labeled[10].source == Source::Oracle &&
                                              st.labeled[10].label == 1 && m.oracle_revisit >= 1);
    bool contract = false;
    try {
        decide_revisit(good, st.labeled[10]);
    } catch (const ContractViolation&) {
        contract = true;
    }
    cases.emplace_back("non-auto-revisit-rejected", contract);

    bool all = true;
    std::string detail;
    for (const auto& [name, ok] : cases) {
        all = all && ok;
        detail += (detail.empty() ? "" : ", ") + name + (ok ? " ok" : " FAILED");
    }
    return {all, detail};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"gradient correctness", gradient_correctness},
        {"latent optimizer behaviour", optimizer_behaviour},
        {"generation-accuracy fidelity", generation_fidelity},
        {"budget-reduction trend", budget_reduction},
        {"label-correction trend", label_correction_trend},
        {"disentanglement effect", disentanglement_effect},
        {"oracle-usage trend", oracle_usage_trend},
        {"state-machine invariants", state_machine_invariants},
        {"determinism", determinism},
        {"agreement-rule branches", agreement_rule_branches},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        if (!v.pass) ++failed;
        std::printf("%s %2zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
