#pragma once

// Query synthesis: draw a batch of latents, push each z downhill on
// sum_q p_q log p_q (so the learner becomes maximally unsure about G(z, c)),
// then keep the m most uncertain samples.

#include <algorithm>
#include <numeric>
#include <vector>

#include "dal/error.hpp"
#include "dal/generator.hpp"
#include "dal/learner.hpp"
#include "dal/numerics.hpp"

namespace dal {

enum class CodePolicy {
    Uniform,     // each code drawn i.i.d. uniformly over classes
    Stratified,  // codes assigned round-robin; selection balanced per class
};

struct AcquisitionConfig {
    std::size_t m = 100;      // samples kept per cycle
    std::size_t batch = 0;    // optimized batch size; 0 means 4 * m
    std::size_t steps = 100;  // gradient updates
    double learning_rate = 0.001;
    CodePolicy code_policy = CodePolicy::Uniform;

    std::size_t effective_batch() const { return batch == 0 ? 4 * m : batch; }

    void validate() const {
        if (m < 1) throw ConfigError("acquisition.m must be >= 1");
        if (effective_batch() < m) throw ConfigError("acquisition.batch must be >= m");
        if (!(learning_rate >= 0.0)) throw ConfigError("acquisition.learning_rate must be >= 0");
    }

    bool operator==(const AcquisitionConfig&) const = default;
};

struct LatentOptimization {
    std::vector<Vector> z;               // final latent per sample
    std::vector<std::vector<double>> objective;  // per sample: value before step 0 .. after last step
    std::size_t rejected_steps = 0;      // steps dropped because the update was non-finite
};

/// Runs `steps` plain gradient-descent updates z <- z - lr * J^T grad_x on
/// each sample independently, with realized class and noise frozen.
inline LatentOptimization optimize_latents(const LearnerModel& model, const GeneratorSpec& spec,
                                           std::span<const GeneratedSample> samples, std::size_t steps,
                                           double learning_rate, bool record_objective = false) {
    if (samples.empty()) throw InvalidInput("optimize_latents: empty batch");
    if (model.input_dim != spec.feature_dim || model.classes != spec.classes)
        throw InvalidInput("optimize_latents: model and generator dimensions differ");
    LatentOptimization out;
    out.z.reserve(samples.size());
    if (record_objective) out.objective.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const GeneratedSample& s = samples[i];
        const Matrix& jac = jacobian_z(s, spec);
        Vector z = s.latent.z;
        Vector x = reevaluate(s, z, spec);
        if (record_objective) out.objective[i].push_back(neg_entropy_objective(predict_proba(model, x)));
        for (std::size_t t = 0; t < steps; ++t) {
            const Vector step = learning_rate * (jac.transpose() * input_gradient(model, x));
            const Vector candidate = z - step;
            if (!all_finite(step) || !all_finite(candidate)) {
                ++out.rejected_steps;
            } else {
                z = candidate;
                x = reevaluate(s, z, spec);
            }
            if (record_objective) out.objective[i].push_back(neg_entropy_objective(predict_proba(model, x)));
        }
        out.z.push_back(std::move(z));
    }
    return out;
}

inline LatentOptimization optimize_latents(const LearnerModel& model, const GeneratorSpec& spec,
                                           std::span<const GeneratedSample> samples, const AcquisitionConfig& cfg,
                                           bool record_objective = false) {
    return optimize_latents(model, spec, samples, cfg.steps, cfg.learning_rate, record_objective);
}

/// `count` fresh generations with codes chosen by `policy`. Also the draw used
/// by the random-generation baseline.
inline std::vector<GeneratedSample> generate_batch(const GeneratorSpec& spec, std::size_t count, CodePolicy policy,
                                                   Rng& rng) {
    std::vector<GeneratedSample> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t code = policy == CodePolicy::Stratified ? i % spec.classes : rng.uniform_index(spec.classes);
        out.push_back(generate(spec, sample_latent(spec, rng, code), rng));
    }
    return out;
}

/// Indices of the `m` largest scores; ties go to the lower index. Returned in
/// ascending index order.
inline std::vector<std::size_t> top_m_indices(std::span<const double> scores, std::size_t m) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    idx.resize(std::min(m, idx.size()));
    std::sort(idx.begin(), idx.end());
    return idx;
}

/// Generates a batch, optimizes it, re-decodes at the optimized latents and
/// returns the m samples with the highest predictive entropy, in batch order.
/// Under CodePolicy::Stratified the m slots are split evenly across codes.
inline std::vector<GeneratedSample> synthesize_uncertain(const LearnerModel& model, const GeneratorSpec& spec,
                                                         const AcquisitionConfig& cfg, Rng& rng,
                                                         std::size_t* rejected_steps = nullptr) {
    cfg.validate();
    std::vector<GeneratedSample> batch = generate_batch(spec, cfg.effective_batch(), cfg.code_policy, rng);
    const LatentOptimization opt = optimize_latents(model, spec, batch, cfg);
    if (rejected_steps != nullptr) *rejected_steps += opt.rejected_steps;

    std::vector<double> scores(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        batch[i].latent.z = opt.z[i];
        batch[i].x = reevaluate(batch[i], opt.z[i], spec);
        scores[i] = entropy(predict_proba(model, batch[i].x));
    }

    std::vector<std::size_t> keep;
    if (cfg.code_policy == CodePolicy::Stratified) {
        // Per-code quotas: the first (m mod C) codes get one extra slot.
        for (std::size_t c = 0; c < spec.classes; ++c) {
            const std::size_t quota = cfg.m / spec.classes + (c < cfg.m % spec.classes ? 1 : 0);
            std::vector<std::size_t> members;
            std::vector<double> member_scores;
            for (std::size_t i = 0; i < batch.size(); ++i)
                if (batch[i].latent.code == c) {
                    members.push_back(i);
                    member_scores.push_back(scores[i]);
                }
            for (std::size_t j : top_m_indices(member_scores, quota)) keep.push_back(members[j]);
        }
        std::sort(keep.begin(), keep.end());
    } else {
        keep = top_m_indices(scores, cfg.m);
    }

    std::vector<GeneratedSample> out;
    out.reserve(keep.size());
    for (std::size_t i : keep) out.push_back(std::move(batch[i]));
    return out;
}

}  // namespace dal
