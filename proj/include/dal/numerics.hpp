#pragma once

// Numeric primitives shared by every other module: a portable seeded RNG,
// probability vectors, softmax/entropy, tie-breaking argmax and a central
// finite-difference gradient used as a test oracle.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dal/error.hpp"

namespace dal {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Floor applied to probabilities before taking logs.
inline constexpr double kLogFloor = 1e-12;
/// Absolute tolerance on the sum of a probability vector.
inline constexpr double kProbSumTol = 1e-9;

inline bool all_finite(const Vector& v) { return v.allFinite(); }

/// splitmix64 finalizer; also used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for an independent stream identified by `tags`, derived from `seed`.
/// The derivation is a fold of mix64 over the tags, so it is stable across
/// platforms and releases.
template <class... Tags>
constexpr std::uint64_t derive_seed(std::uint64_t seed, Tags... tags) {
    std::uint64_t s = mix64(seed);
    ((s = mix64(s ^ static_cast<std::uint64_t>(tags))), ...);
    return s;
}

/// Counter-based generator (splitmix64 over a 64-bit counter). Every draw is
/// a pure function of (seed, counter), so streams are bitwise reproducible on
/// any platform. Not thread-safe; one owner per instance.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64() { return mix64(seed_ + 0x9E3779B97F4A7C15ULL * counter_++); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Unbiased integer in [0, n).
    std::size_t uniform_index(std::size_t n) {
        detail::require(n > 0, "uniform_index: n must be positive");
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t r;
        do {
            r = next_u64();
        } while (r >= limit);
        return static_cast<std::size_t>(r % bound);
    }

    /// Standard normal draw (Marsaglia polar method, spare value cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double scale = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * scale;
        has_spare_ = true;
        return u * scale;
    }

    Vector normal_vector(Eigen::Index n) {
        Vector out(n);
        for (Eigen::Index i = 0; i < n; ++i) out[i] = normal();
        return out;
    }

    /// Index drawn with probability proportional to `weights`.
    std::size_t categorical(std::span<const double> weights) {
        detail::require(!weights.empty(), "categorical: empty weights");
        double total = 0.0;
        for (double w : weights) {
            detail::require(std::isfinite(w) && w >= 0.0, "categorical: weights must be finite and >= 0");
            total += w;
        }
        detail::require(total > 0.0, "categorical: weights sum to zero");
        const double target = uniform() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (target < acc) return i;
        }
        // Rounding left target at the top edge: return the last positive weight.
        for (std::size_t i = weights.size(); i-- > 0;)
            if (weights[i] > 0.0) return i;
        return weights.size() - 1;
    }

    /// Fisher-Yates shuffle (std::shuffle's order is implementation-defined).
    template <class T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[uniform_index(i)]);
    }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Per-class probabilities: entries in [0, 1] summing to 1.
class ProbVector {
public:
    /// Validates the invariants; throws InvalidInput when they do not hold.
    explicit ProbVector(Vector p) : p_(std::move(p)) {
        detail::require(p_.size() >= 1, "ProbVector: empty");
        detail::require(all_finite(p_), "ProbVector: non-finite entry");
        detail::require((p_.array() >= 0.0).all() && (p_.array() <= 1.0).all(),
                        "ProbVector: entry outside [0, 1]");
        detail::require(std::abs(p_.sum() - 1.0) <= kProbSumTol, "ProbVector: entries do not sum to 1");
    }

    static ProbVector uniform(Eigen::Index classes) {
        return ProbVector(Vector::Constant(classes, 1.0 / static_cast<double>(classes)), Trusted{});
    }

    const Vector& values() const { return p_; }
    Eigen::Index size() const { return p_.size(); }
    double operator[](Eigen::Index i) const { return p_[i]; }

private:
    struct Trusted {};
    ProbVector(Vector p, Trusted) : p_(std::move(p)) {}
    friend ProbVector softmax(const Vector& logits);

    Vector p_;
};

/// exp-normalized probabilities, computed with max subtraction.
inline ProbVector softmax(const Vector& logits) {
    detail::require(logits.size() >= 2, "softmax: need at least 2 logits");
    detail::require(all_finite(logits), "softmax: non-finite logit");
    const double top = logits.maxCoeff();
    Vector e = (logits.array() - top).exp().matrix();
    e /= e.sum();
    return ProbVector(std::move(e), ProbVector::Trusted{});
}

/// Shannon entropy in nats, with 0 log 0 = 0.
inline double entropy(const ProbVector& p) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double q = p[i];
        if (q > 0.0) h -= q * std::log(std::max(q, kLogFloor));
    }
    return h;
}

/// sum_q p_q log p_q; minimizing it maximizes entropy.
inline double neg_entropy_objective(const ProbVector& p) { return -entropy(p); }

/// Index of the largest entry; the lowest index wins exact ties.
inline std::size_t argmax_tiebreak(std::span<const double> v) {
    detail::require(!v.empty(), "argmax_tiebreak: empty vector");
    std::size_t best = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        detail::require(std::isfinite(v[i]), "argmax_tiebreak: non-finite entry");
        if (v[i] > v[best]) best = i;
    }
    return best;
}

inline std::size_t argmax_tiebreak(const Vector& v) {
    return argmax_tiebreak(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

inline std::size_t argmax_tiebreak(const ProbVector& p) { return argmax_tiebreak(p.values()); }

/// Central differences (f(x + eps e_i) - f(x - eps e_i)) / (2 eps).
template <class F>
Vector finite_diff_grad(F&& f, const Vector& x, double eps = 1e-5) {
    detail::require(eps > 0.0, "finite_diff_grad: eps must be positive");
    Vector grad(x.size());
    Vector probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + eps;
        const double up = f(static_cast<const Vector&>(probe));
        probe[i] = x[i] - eps;
        const double down = f(static_cast<const Vector&>(probe));
        probe[i] = x[i];
        if (!std::isfinite(up) || !std::isfinite(down))
            throw InvalidInput("finite_diff_grad: non-finite function value at coordinate " + std::to_string(i));
        grad[i] = (up - down) / (2.0 * eps);
    }
    return grad;
}

/// ||a - b|| / max(||a||, ||b||), with both-zero treated as exact agreement.
inline double relative_error(const Vector& a, const Vector& b) {
    const double scale = std::max(a.norm(), b.norm());
    if (scale == 0.0) return 0.0;
    return (a - b).norm() / scale;
}

inline double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
inline double stddev(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace dal
