#pragma once

// Simulated disentangled generator. Each class k has a linear decoder
// x = A_k z + b_k + sigma * eps. Requesting latent code c realizes class k
// with probability M[c][k]; the diagonal of M is the per-class generation
// accuracy. Ground truth (the realized class) is visible only through
// oracle_label().

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dal/error.hpp"
#include "dal/numerics.hpp"

namespace dal {

struct LatentInput {
    Vector z;
    std::size_t code = 0;

    Vector one_hot(std::size_t classes) const {
        Vector c = Vector::Zero(static_cast<Eigen::Index>(classes));
        c[static_cast<Eigen::Index>(code)] = 1.0;
        return c;
    }
};

struct GeneratorSpec {
    std::size_t classes = 0;
    std::size_t latent_dim = 0;
    std::size_t feature_dim = 0;
    std::vector<Matrix> decoders;  // A_k, feature_dim x latent_dim
    std::vector<Vector> offsets;   // b_k, feature_dim
    double noise_scale = 0.0;
    Matrix confusion;  // row c: distribution of the realized class for code c

    double generation_accuracy(std::size_t c) const {
        return confusion(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c));
    }

    /// Throws ConfigError describing the first violated invariant.
    void validate() const {
        auto fail = [](const std::string& what) { throw ConfigError("generator spec: " + what); };
        if (classes < 2) fail("classes must be >= 2");
        if (latent_dim < 1 || feature_dim < 1) fail("latent_dim and feature_dim must be >= 1");
        if (decoders.size() != classes || offsets.size() != classes) fail("need one decoder and offset per class");
        const auto dx = static_cast<Eigen::Index>(feature_dim);
        const auto dz = static_cast<Eigen::Index>(latent_dim);
        for (std::size_t k = 0; k < classes; ++k) {
            if (decoders[k].rows() != dx || decoders[k].cols() != dz)
                fail("decoder " + std::to_string(k) + " has wrong shape");
            if (offsets[k].size() != dx) fail("offset " + std::to_string(k) + " has wrong size");
            if (!decoders[k].allFinite() || !offsets[k].allFinite())
                fail("decoder/offset " + std::to_string(k) + " not finite");
        }
        for (std::size_t a = 0; a < classes; ++a)
            for (std::size_t b = a + 1; b < classes; ++b)
                if (offsets[a] == offsets[b])
                    fail("prototypes " + std::to_string(a) + " and " + std::to_string(b) + " coincide");
        if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) fail("noise_scale must be finite and >= 0");
        const auto c = static_cast<Eigen::Index>(classes);
        if (confusion.rows() != c || confusion.cols() != c) fail("confusion matrix must be classes x classes");
        for (Eigen::Index r = 0; r < c; ++r) {
            if (!confusion.row(r).allFinite() || (confusion.row(r).array() < 0.0).any())
                fail("confusion row " + std::to_string(r) + " has negative or non-finite entries");
            if (std::abs(confusion.row(r).sum() - 1.0) > kProbSumTol)
                fail("confusion row " + std::to_string(r) + " does not sum to 1");
        }
    }
};

struct GeneratedSample {
    Vector x;
    LatentInput latent;
    std::size_t realized_class = 0;
    Vector noise;  // eps, frozen at generation time
};

/// z ~ N(0, I) of dimension latent_dim with the code fixed to `code`.
inline LatentInput sample_latent(const GeneratorSpec& spec, Rng& rng, std::size_t code) {
    if (code >= spec.classes)
        throw InvalidInput("sample_latent: code " + std::to_string(code) + " >= classes " +
                           std::to_string(spec.classes));
    return LatentInput{rng.normal_vector(static_cast<Eigen::Index>(spec.latent_dim)), code};
}

namespace detail {

inline Vector decode(const GeneratorSpec& spec, std::size_t k, const Vector& z, const Vector& noise) {
    return spec.decoders[k] * z + spec.offsets[k] + spec.noise_scale * noise;
}

}  // namespace detail

/// Draws the realized class from row M[code], draws eps once, decodes.
inline GeneratedSample generate(const GeneratorSpec& spec, const LatentInput& latent, Rng& rng) {
    if (latent.code >= spec.classes) throw InvalidInput("generate: latent code out of range");
    if (latent.z.size() != static_cast<Eigen::Index>(spec.latent_dim) || !all_finite(latent.z))
        throw InvalidInput("generate: z must be finite with latent_dim entries");
    const auto row = spec.confusion.row(static_cast<Eigen::Index>(latent.code));
    std::vector<double> weights(spec.classes);
    for (std::size_t k = 0; k < spec.classes; ++k) weights[k] = row[static_cast<Eigen::Index>(k)];
    const std::size_t realized = rng.categorical(weights);
    Vector noise = rng.normal_vector(static_cast<Eigen::Index>(spec.feature_dim));
    Vector x = detail::decode(spec, realized, latent.z, noise);
    return GeneratedSample{std::move(x), latent, realized, std::move(noise)};
}

/// Decodes `z_new` with the sample's frozen realized class and noise draw.
inline Vector reevaluate(const GeneratedSample& sample, const Vector& z_new, const GeneratorSpec& spec) {
    if (z_new.size() != static_cast<Eigen::Index>(spec.latent_dim))
        throw InvalidInput("reevaluate: z has " + std::to_string(z_new.size()) + " entries, expected " +
                           std::to_string(spec.latent_dim));
    if (sample.realized_class >= spec.classes || sample.noise.size() != static_cast<Eigen::Index>(spec.feature_dim))
        throw InvalidInput("reevaluate: sample does not belong to this generator");
    return detail::decode(spec, sample.realized_class, z_new, sample.noise);
}

/// dx/dz, i.e. the decoder of the realized class.
inline const Matrix& jacobian_z(const GeneratedSample& sample, const GeneratorSpec& spec) {
    return spec.decoders.at(sample.realized_class);
}

/// Simulated perfect annotator: the class the sample was actually drawn from.
inline std::size_t oracle_label(const GeneratedSample& sample) { return sample.realized_class; }

/// Fraction of n_per_class generations per code whose realized class matches the code.
inline std::vector<double> measure_generation_accuracy(const GeneratorSpec& spec, std::size_t n_per_class, Rng& rng) {
    detail::require(n_per_class >= 1, "measure_generation_accuracy: n_per_class must be >= 1");
    std::vector<double> acc(spec.classes, 0.0);
    for (std::size_t c = 0; c < spec.classes; ++c) {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < n_per_class; ++i) {
            const auto s = generate(spec, sample_latent(spec, rng, c), rng);
            if (oracle_label(s) == c) ++hits;
        }
        acc[c] = static_cast<double>(hits) / static_cast<double>(n_per_class);
    }
    return acc;
}

// ---------------------------------------------------------------------------
// World construction
// ---------------------------------------------------------------------------

/// Confusion matrix with the given diagonal. Off-diagonal mass of class c is
/// split evenly across the other members of its confusable group, or spread
/// uniformly over all other classes when c belongs to no group.
inline Matrix build_confusion(const std::vector<double>& diagonal,
                              const std::vector<std::vector<std::size_t>>& confusable_groups) {
    const std::size_t n = diagonal.size();
    if (n < 2) throw ConfigError("confusion: need at least 2 classes");
    std::vector<std::vector<std::size_t>> partners(n);
    for (const auto& group : confusable_groups) {
        for (std::size_t a : group) {
            if (a >= n) throw ConfigError("confusable group references class " + std::to_string(a));
            for (std::size_t b : group)
                if (a != b && std::find(partners[a].begin(), partners[a].end(), b) == partners[a].end())
                    partners[a].push_back(b);
        }
    }
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t c = 0; c < n; ++c) {
        const double d = diagonal[c];
        if (!(d >= 0.0 && d <= 1.0)) throw ConfigError("generation accuracy " + std::to_string(c) + " outside [0, 1]");
        const auto r = static_cast<Eigen::Index>(c);
        m(r, r) = d;
        const double off = 1.0 - d;
        if (partners[c].empty()) {
            for (std::size_t k = 0; k < n; ++k)
                if (k != c) m(r, static_cast<Eigen::Index>(k)) = off / static_cast<double>(n - 1);
        } else {
            for (std::size_t k : partners[c])
                m(r, static_cast<Eigen::Index>(k)) = off / static_cast<double>(partners[c].size());
        }
    }
    return m;
}

/// Parameters from which a GeneratorSpec is built deterministically.
struct WorldParams {
    std::size_t classes = 10;
    std::size_t latent_dim = 8;
    std::size_t feature_dim = 16;
    double noise_scale = 0.3;
    /// Noise scale of the "real" data distribution (test set, real-data
    /// baseline). Negative means "same as noise_scale".
    double real_noise_scale = -1.0;
    /// Each decoder entry is N(0, decoder_scale^2 / latent_dim).
    double decoder_scale = 2.0;
    /// Prototypes are drawn as N(0, I) scaled by prototype_scale / sqrt(feature_dim).
    double prototype_scale = 4.0;
    /// Minimum pairwise prototype distance in units of noise_scale.
    double min_separation = 4.0;
    std::uint64_t world_seed = 0;
    // Default world: mean generation accuracy 0.9, errors confined to two
    // groups of look-alike classes. Empty generation_accuracy means all ones.
    std::vector<double> generation_accuracy{0.95, 1.0, 0.8, 0.95, 0.8, 0.9, 0.7, 0.95, 1.0, 0.95};
    std::vector<std::vector<std::size_t>> confusable_groups{{0, 2, 4, 6}, {5, 7, 9}};

    double effective_real_noise() const { return real_noise_scale < 0.0 ? noise_scale : real_noise_scale; }

    bool operator==(const WorldParams&) const = default;
};

/// Builds decoders, prototypes and the confusion matrix from `params`.
inline GeneratorSpec make_generator(const WorldParams& params) {
    if (params.classes < 2) throw ConfigError("world.classes must be >= 2");
    if (params.latent_dim < 1) throw ConfigError("world.latent_dim must be >= 1");
    if (params.feature_dim < 1) throw ConfigError("world.feature_dim must be >= 1");
    if (!params.generation_accuracy.empty() && params.generation_accuracy.size() != params.classes)
        throw ConfigError("world.generation_accuracy must have one entry per class");

    GeneratorSpec spec;
    spec.classes = params.classes;
    spec.latent_dim = params.latent_dim;
    spec.feature_dim = params.feature_dim;
    spec.noise_scale = params.noise_scale;

    const auto dx = static_cast<Eigen::Index>(params.feature_dim);
    const auto dz = static_cast<Eigen::Index>(params.latent_dim);

    Rng proto_rng(derive_seed(params.world_seed, 0x70726f746fULL));
    const double min_dist = params.min_separation * params.noise_scale;
    const double proto_gain = params.prototype_scale / std::sqrt(static_cast<double>(params.feature_dim));
    for (std::size_t k = 0; k < params.classes; ++k) {
        Vector candidate;
        bool accepted = false;
        for (int attempt = 0; attempt < 10000 && !accepted; ++attempt) {
            candidate = proto_gain * proto_rng.normal_vector(dx);
            accepted = std::all_of(spec.offsets.begin(), spec.offsets.end(), [&](const Vector& other) {
                return (other - candidate).norm() >= min_dist && other != candidate;
            });
        }
        if (!accepted) throw ConfigError("world: cannot place prototypes at the requested separation");
        spec.offsets.push_back(std::move(candidate));
    }

    Rng dec_rng(derive_seed(params.world_seed, 0x6465636f6465ULL));
    const double dec_gain = params.decoder_scale / std::sqrt(static_cast<double>(params.latent_dim));
    for (std::size_t k = 0; k < params.classes; ++k) {
        Matrix a(dx, dz);
        for (Eigen::Index j = 0; j < dz; ++j)
            for (Eigen::Index i = 0; i < dx; ++i) a(i, j) = dec_gain * dec_rng.normal();
        spec.decoders.push_back(std::move(a));
    }

    std::vector<double> diag = params.generation_accuracy;
    if (diag.empty()) diag.assign(params.classes, 1.0);
    spec.confusion = build_confusion(diag, params.confusable_groups);
    spec.validate();
    return spec;
}

/// The "real" data distribution of a world: same decoders and prototypes,
/// identity confusion, and the given noise scale.
inline GeneratorSpec real_distribution(const GeneratorSpec& generated, double noise_scale) {
    GeneratorSpec real = generated;
    real.noise_scale = noise_scale;
    real.confusion = Matrix::Identity(static_cast<Eigen::Index>(generated.classes),
                                      static_cast<Eigen::Index>(generated.classes));
    return real;
}

// Per-class generation accuracies reported for the three benchmark
// generators, in class order.
inline const std::vector<double>& mnist_generation_accuracy() {
    static const std::vector<double> v{0.996, 1.0, 0.982, 0.988, 0.97, 0.945, 0.993, 0.99, 0.988, 0.994};
    return v;
}

inline const std::vector<double>& fmnist_generation_accuracy() {
    // T-shirt, Trouser, Pull-over, Dress, Coat, Sandal, Shirt, Sneaker, Bag, AnkleBoot
    static const std::vector<double> v{0.785, 0.998, 0.376, 0.821, 0.397, 0.728, 0.185, 0.715, 0.994, 0.974};
    return v;
}

inline const std::vector<double>& cifar_generation_accuracy() {
    // Aeroplane, Automobile, Bird, Cat, Deer, Dog, Frog, Horse, Ship, Truck
    static const std::vector<double> v{0.819, 0.868, 0.535, 0.583, 0.591, 0.523, 0.889, 0.866, 0.819, 0.858};
    return v;
}

}  // namespace dal
