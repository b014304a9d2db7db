#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dal/numerics.hpp"

namespace dal {
namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

TEST(Softmax, SymmetricLogitsGiveUniform) {
    const ProbVector p = softmax(vec({0.0, 0.0}));
    EXPECT_DOUBLE_EQ(p[0], 0.5);
    EXPECT_DOUBLE_EQ(p[1], 0.5);
}

TEST(Softmax, LargeLogitDoesNotOverflow) {
    const ProbVector p = softmax(vec({1000.0, 0.0}));
    EXPECT_NEAR(p[0], 1.0, 1e-15);
    EXPECT_NEAR(p[1], 0.0, 1e-15);
}

TEST(Softmax, MatchesHighPrecisionReference) {
    // Reference computed with 40-digit arithmetic.
    const ProbVector p = softmax(vec({1.0, 2.0, 3.0}));
    EXPECT_NEAR(p[0], 0.090030573170380457998, 1e-15);
    EXPECT_NEAR(p[1], 0.24472847105479765247, 1e-15);
    EXPECT_NEAR(p[2], 0.66524095577482188953, 1e-15);
}

TEST(Softmax, RejectsNonFiniteAndShortInput) {
    EXPECT_THROW(softmax(vec({1.0, std::nan("")})), InvalidInput);
    EXPECT_THROW(softmax(vec({INFINITY, 0.0})), InvalidInput);
    EXPECT_THROW(softmax(vec({1.0})), InvalidInput);
}

TEST(Softmax, ProbVectorInvariantsForHugeLogits) {
    Rng rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.uniform_index(15));
        Vector logits(n);
        const double scale = std::pow(10.0, -3.0 + 9.0 * rng.uniform());  // up to 1e6
        for (Eigen::Index i = 0; i < n; ++i) logits[i] = scale * (2.0 * rng.uniform() - 1.0);
        const ProbVector p = softmax(logits);
        EXPECT_NO_THROW(ProbVector{p.values()});
        EXPECT_NEAR(p.values().sum(), 1.0, kProbSumTol);
    }
}

TEST(ProbVector, ValidatesInvariants) {
    EXPECT_THROW(ProbVector(vec({0.6, 0.6})), InvalidInput);
    EXPECT_THROW(ProbVector(vec({1.2, -0.2})), InvalidInput);
    EXPECT_NO_THROW(ProbVector(vec({0.25, 0.75})));
}

TEST(Entropy, UniformIsLogC) {
    EXPECT_NEAR(entropy(ProbVector::uniform(10)), 2.302585092994045684, 1e-14);
}

TEST(Entropy, OneHotIsZero) {
    EXPECT_EQ(entropy(ProbVector(vec({0.0, 1.0, 0.0}))), 0.0);
}

TEST(Entropy, MatchesHighPrecisionReference) {
    EXPECT_NEAR(entropy(ProbVector(vec({0.7, 0.3}))), 0.61086430205489346303, 1e-15);
}

TEST(Entropy, BoundedByZeroAndLogC) {
    Rng rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        const Eigen::Index c = 2 + static_cast<Eigen::Index>(rng.uniform_index(10));
        Vector logits(c);
        for (Eigen::Index i = 0; i < c; ++i) logits[i] = 5.0 * rng.normal();
        const ProbVector p = softmax(logits);
        const double h = entropy(p);
        EXPECT_GE(h, 0.0);
        EXPECT_LE(h, std::log(static_cast<double>(c)) + 1e-12);
        EXPECT_EQ(neg_entropy_objective(p) + h, 0.0);
    }
}

TEST(NegEntropyObjective, AnalyticCases) {
    EXPECT_NEAR(neg_entropy_objective(ProbVector::uniform(4)), -std::log(4.0), 1e-15);
    EXPECT_EQ(neg_entropy_objective(ProbVector(vec({1.0, 0.0}))), 0.0);
}

TEST(ArgmaxTiebreak, Basics) {
    EXPECT_EQ(argmax_tiebreak(vec({0.1, 0.8, 0.1})), 1u);
    EXPECT_EQ(argmax_tiebreak(vec({0.5, 0.5})), 0u);
    EXPECT_THROW(argmax_tiebreak(Vector()), InvalidInput);
}

TEST(ArgmaxTiebreak, AgreesWithLinearScanOracle) {
    Rng rng(3);
    for (int trial = 0; trial < 2000; ++trial) {
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.uniform_index(12));
        Vector v(n);
        // Coarse values so that exact ties are common.
        for (Eigen::Index i = 0; i < n; ++i) v[i] = static_cast<double>(rng.uniform_index(4));
        std::size_t expected = 0;
        double best = -INFINITY;
        for (Eigen::Index i = 0; i < n; ++i)
            if (v[i] > best) {
                best = v[i];
                expected = static_cast<std::size_t>(i);
            }
        EXPECT_EQ(argmax_tiebreak(v), expected);
    }
}

TEST(FiniteDiffGrad, Quadratic) {
    const Vector g = finite_diff_grad([](const Vector& x) { return x.squaredNorm(); }, vec({1.0, 2.0}));
    EXPECT_NEAR(g[0], 2.0, 1e-8);
    EXPECT_NEAR(g[1], 4.0, 1e-8);
}

TEST(FiniteDiffGrad, LinearRecoversWeights) {
    const Vector w = vec({0.5, -3.0, 2.0});
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const Vector x = rng.normal_vector(3);
        const Vector g = finite_diff_grad([&](const Vector& v) { return w.dot(v); }, x);
        EXPECT_LT((g - w).norm(), 1e-9);
    }
}

TEST(FiniteDiffGrad, EntropyOfSoftmaxMatchesAnalyticGradient) {
    // d(sum p log p)/dz_j = p_j (log p_j - sum_q p_q log p_q)
    Rng rng(19);
    for (int trial = 0; trial < 50; ++trial) {
        const Vector z = 2.0 * rng.normal_vector(6);
        const ProbVector p = softmax(z);
        const double s = neg_entropy_objective(p);
        Vector analytic(6);
        for (Eigen::Index j = 0; j < 6; ++j) analytic[j] = p[j] * (std::log(p[j]) - s);
        const Vector fd = finite_diff_grad([](const Vector& v) { return neg_entropy_objective(softmax(v)); }, z);
        EXPECT_LT(relative_error(analytic, fd), 1e-4);
    }
}

TEST(FiniteDiffGrad, PropagatesNonFiniteValues) {
    EXPECT_THROW(finite_diff_grad([](const Vector& x) { return std::log(x[0]); }, vec({0.0})), InvalidInput);
    EXPECT_THROW(finite_diff_grad([](const Vector& x) { return x[0]; }, vec({1.0}), 0.0), InvalidInput);
}

TEST(Rng, SameSeedSameStream) {
    Rng a(42), b(42), c(43);
    bool differs = false;
    for (int i = 0; i < 1000; ++i) {
        const double x = a.normal();
        EXPECT_EQ(x, b.normal());
        differs |= x != c.normal();
    }
    EXPECT_TRUE(differs);
}

TEST(Rng, FixedFirstDraws) {
    // splitmix64 reference outputs for seed 0.
    Rng rng(0);
    EXPECT_EQ(rng.next_u64(), 0xE220A8397B1DCDAFULL);
    EXPECT_EQ(rng.next_u64(), 0x6E789E6AA1B965F4ULL);
}

TEST(Rng, UniformIndexAndCategoricalAreInRange) {
    Rng rng(1);
    std::vector<double> w{0.0, 1.0, 0.0, 3.0};
    std::vector<int> counts(4, 0);
    for (int i = 0; i < 40000; ++i) {
        EXPECT_LT(rng.uniform_index(7), 7u);
        ++counts[rng.categorical(w)];
    }
    EXPECT_EQ(counts[0], 0);
    EXPECT_EQ(counts[2], 0);
    EXPECT_NEAR(counts[3] / 40000.0, 0.75, 0.01);
}

}  // namespace
}  // namespace dal
