#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "klbandit/instances.hpp"
#include "klbandit/oracle.hpp"

using namespace klbandit;

TEST(SlowFamily, TwoArmExample) {
    const auto fam = slow_hard_family(2, 8, 1.0);
    EXPECT_NEAR(fam.delta, std::sqrt(0.5), 1e-15);
    ASSERT_EQ(fam.instances.size(), 2u);
    EXPECT_NEAR(fam.instances[0].means[0], 0.7071, 5e-5);
    EXPECT_EQ(fam.instances[0].means[1], 0.0);
    EXPECT_EQ(fam.instances[1].means[0], fam.delta);
    EXPECT_NEAR(fam.instances[1].means[1], 1.4142, 5e-5);
    EXPECT_EQ(fam.instances[1].means[1], 2.0 * fam.delta);
}

TEST(SlowFamily, MembersDifferFromTheFirstAtOneArm) {
    for (std::size_t k : {2u, 5u, 9u, 20u}) {
        const auto fam = slow_hard_family(k, 1000, 3.0);
        ASSERT_EQ(fam.instances.size(), k);
        for (std::size_t j = 1; j < k; ++j) {
            std::size_t diff = 0;
            for (std::size_t a = 0; a < k; ++a) diff += fam.instances[j].means[a] != fam.instances[0].means[a];
            EXPECT_EQ(diff, 1u);
            EXPECT_EQ(fam.instances[j].means[j], 2.0 * fam.delta);
        }
        for (const auto& inst : fam.instances) {
            EXPECT_EQ(inst.eta, 3.0);
            EXPECT_EQ(inst.horizon, 1000u);
            EXPECT_EQ(inst.reference, Policy::uniform(k));
        }
    }
}

TEST(SlowFamily, WarnsBelowNineArms) {
    EXPECT_FALSE(slow_hard_family(8, 100, 1.0).warnings.empty());
    EXPECT_TRUE(slow_hard_family(9, 100, 1.0).warnings.empty());
    EXPECT_THROW(slow_hard_family(1, 100, 1.0), InvalidArgument);
}

TEST(SlowFamily, RegimeBoundary) {
    // T <= 2 eta^2 K / (4 log^2 K) is equivalent to eta delta >= 2 log K.
    const std::size_t k = 9;
    const double eta = 50.0;
    const double lk = std::log(9.0);
    const auto t_max = static_cast<std::uint64_t>(std::floor(2.0 * eta * eta * k / (4.0 * lk * lk)));
    for (std::uint64_t horizon : {t_max, t_max / 2, std::uint64_t{1}}) {
        const auto fam = slow_hard_family(k, horizon, eta);
        EXPECT_GE(eta * fam.delta, 2.0 * lk) << horizon;
    }
    EXPECT_LT(eta * slow_hard_family(k, t_max + 1, eta).delta, 2.0 * lk);
}

TEST(SlowFamily, KlBudgetArithmetic) {
    for (std::size_t k = 9; k <= 200; ++k) {
        for (std::uint64_t horizon : {100u, 1000u, 1u << 20}) {
            const double delta = slow_hard_family(k, horizon, 1.0).delta;
            const double budget = 2.0 * static_cast<double>(horizon) * delta * delta / static_cast<double>(k - 1);
            EXPECT_NEAR(budget, 4.0 * k / (k - 1.0), 1e-12);
            EXPECT_LE(budget, 4.5 + 1e-12);
        }
    }
}

TEST(DeltaSchedule, WorkedExample) { EXPECT_EQ(delta_schedule(4, 1, 2.0), 0.5); }

TEST(DeltaSchedule, TooSmallTIsAnError) {
    try {
        delta_schedule(1, 100, 0.5);
        FAIL();
    } catch (const PreconditionFailed& e) {
        EXPECT_STREQ(e.what(), "t too small for this (K, alpha)");
    }
}

TEST(DeltaSchedule, IntervalAndIntegralityOverTheRange) {
    for (std::size_t k : {1u, 2u, 3u}) {
        for (double eta : {0.5, 1.0, 2.0}) {
            const double alpha = fast_family_alpha(eta);
            const auto t0 = static_cast<std::uint64_t>(std::ceil(eta * eta * static_cast<double>(k)));
            for (std::uint64_t t = std::max<std::uint64_t>(t0, 1); t <= 1000000; ++t) {
                const double d = delta_schedule(t, k, alpha);
                const double s = std::sqrt(static_cast<double>(k) / static_cast<double>(t));
                ASSERT_LE(d, s * (1.0 + 1e-12)) << t;
                ASSERT_GE(d, 0.5 * s * (1.0 - 1e-12)) << t;
                const double n = alpha / (2.0 * d);
                ASSERT_NEAR(n, std::round(n), 1e-9) << t;
                ASSERT_GE(std::round(n), 1.0);
            }
        }
    }
}

TEST(FastFamily, LayoutAndDecomposition) {
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        const std::size_t k = 1 + seed % 6;
        const double eta = 0.2 + 0.01 * static_cast<double>(seed % 150);
        const std::uint64_t t = 50 + 37 * seed;
        const auto s = fast_family_sample(k, eta, t, seed);
        ASSERT_EQ(s.instance.num_arms, 2 * k);
        EXPECT_NEAR(s.alpha, 2.0 * std::log(2.0) / eta, 1e-15);
        const double n = s.alpha / (2.0 * s.delta_t);
        EXPECT_NEAR(n, std::round(n), 1e-9);
        for (std::size_t i = 0; i < k; ++i) {
            const double m = s.instance.means[i];
            EXPECT_GE(m, 0.5 - s.alpha);
            EXPECT_LE(m, 0.5 + s.alpha);
            EXPECT_TRUE(s.mu[i] == 1 || s.mu[i] == -1);
            EXPECT_NEAR(m, 0.5 + s.x[i] + s.mu[i] * s.delta_t, 1e-12);
            EXPECT_LE(std::abs(s.x[i]), s.alpha - s.delta_t + 1e-12);
            // stripe set: x + alpha - delta_t is an odd multiple of delta_t up to
            // half a delta_t either way, i.e. x lies in
            // [-alpha + (4j-3) delta, -alpha + (4j-1) delta] for some j
            const double pos = (s.x[i] + s.alpha) / s.delta_t;  // in [4j-3, 4j-1]
            const double j = std::floor((pos + 3.0) / 4.0);
            EXPECT_GE(pos, 4.0 * j - 3.0 - 1e-9);
            EXPECT_LE(pos, 4.0 * j - 1.0 + 1e-9);
        }
        for (std::size_t i = k; i < 2 * k; ++i) EXPECT_EQ(s.instance.means[i], 0.5 + s.alpha);
    }
}

TEST(FastFamily, MarginalIsUniform) {
    const double eta = 1.0;
    const std::size_t n = 100000;
    const double alpha = fast_family_alpha(eta);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = fast_family_sample(1, eta, 64, i).instance.means[0] - 0.5;
    std::sort(v.begin(), v.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double cdf = (v[i] + alpha) / (2.0 * alpha);
        ks = std::max({ks, std::abs(cdf - static_cast<double>(i) / n), std::abs(cdf - static_cast<double>(i + 1) / n)});
    }
    EXPECT_LE(ks, 0.01);
}

TEST(FastFamily, Precondition) {
    EXPECT_THROW(fast_family_sample(4, 1.0, 3, 0), PreconditionFailed);
    EXPECT_NO_THROW(fast_family_sample(4, 1.0, 4, 0));
}

TEST(FastFamily, SeedDeterminism) {
    const auto a = fast_family_sample(5, 1.0, 1000, 77);
    const auto b = fast_family_sample(5, 1.0, 1000, 77);
    EXPECT_EQ(a.instance.means, b.instance.means);
    EXPECT_EQ(a.mu, b.mu);
}

TEST(Paired, IdenticalSignsGiveIdenticalInstances) {
    const std::vector<double> x{0.1, -0.2, 0.0};
    const std::vector<int> mu{1, -1, 1};
    const auto [a, b] = paired_instances(x, mu, mu, 0.1, 1.0, 1.0);
    EXPECT_EQ(a.means, b.means);
}

TEST(Paired, SingleArmFlip) {
    const std::vector<double> x{0.0};
    const std::vector<int> m1{1}, m2{-1};
    const auto [a, b] = paired_instances(x, m1, m2, 0.1, 1.0, fast_family_alpha(1.0));
    ASSERT_EQ(a.num_arms, 2u);
    EXPECT_NEAR(a.means[0] - b.means[0], 0.2, 1e-15);
    EXPECT_EQ(a.means[1], b.means[1]);
}

TEST(Paired, HammingDistanceIsTheNumberOfDifferingArms) {
    Engine eng = make_engine(4);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t k = 1 + eng() % 10;
        const double alpha = 1.0, delta = 0.25;
        std::vector<double> x(k);
        std::vector<int> m1(k), m2(k);
        for (std::size_t i = 0; i < k; ++i) {
            x[i] = (alpha - delta) * (2.0 * uniform01(eng) - 1.0);
            m1[i] = eng() & 1 ? 1 : -1;
            m2[i] = eng() & 1 ? 1 : -1;
        }
        const auto [a, b] = paired_instances(x, m1, m2, delta, 1.0, alpha);
        std::size_t diff = 0;
        for (std::size_t i = 0; i < 2 * k; ++i) diff += a.means[i] != b.means[i];
        EXPECT_EQ(diff, hamming_distance(m1, m2));
    }
}

TEST(Paired, PreconditionsAreNamed) {
    const std::vector<double> x{0.9};
    const std::vector<int> p{1}, m{-1};
    try {
        paired_instances(x, p, m, 0.2, 1.0, 1.0);
        FAIL();
    } catch (const PreconditionFailed& e) {
        EXPECT_NE(std::string(e.what()).find("alpha - delta"), std::string::npos);
    }
    try {
        paired_instances(std::vector<double>{0.0}, p, m, 0.6, 1.0, 1.0);
        FAIL();
    } catch (const PreconditionFailed& e) {
        EXPECT_NE(std::string(e.what()).find("alpha >= 2 delta"), std::string::npos);
    }
    const std::vector<int> bad{0};
    EXPECT_THROW(paired_instances(std::vector<double>{0.0}, p, bad, 0.1, 1.0, 1.0), InvalidArgument);
    EXPECT_THROW(hamming_distance(p, std::vector<int>{1, 1}), InvalidArgument);
}

TEST(RandomInstance, DeterministicAndInRange) {
    const auto a = random_instance(10, 2.0, 100, 5);
    EXPECT_EQ(a.means, random_instance(10, 2.0, 100, 5).means);
    for (std::uint64_t s = 0; s < 200; ++s)
        for (double m : random_instance(16, 1.0, 10, s).means) {
            EXPECT_GE(m, 0.0);
            EXPECT_LE(m, 1.0);
        }
}

TEST(RandomInstance, DifferentSeedsDiffer) {
    std::size_t differ = 0;
    for (std::uint64_t s = 0; s < 1000; ++s)
        differ += random_instance(4, 1.0, 10, 2 * s).means != random_instance(4, 1.0, 10, 2 * s + 1).means;
    EXPECT_GE(differ, 999u);
}

TEST(RandomPolicy, StrictlyPositive) {
    Engine eng = make_engine(9);
    for (int i = 0; i < 1000; ++i) EXPECT_TRUE(random_policy(2 + eng() % 30, eng).strictly_positive());
}

TEST(GaussianKlOnPairs, DifferingArmCostsTwoDeltaSquared) {
    // per-arm KL between the unit-Gaussian reward laws of a paired couple
    Engine eng = make_engine(10);
    for (int rep = 0; rep < 100; ++rep) {
        const double delta = 0.25 * std::ldexp(static_cast<double>(1 + eng() % 1024), -10);
        const std::vector<double> x{0.0};
        const std::vector<int> p{1}, m{-1};
        const auto [a, b] = paired_instances(x, m, p, delta, 1.0, 1.0);
        EXPECT_EQ(gaussian_kl(a.means[0], b.means[0]), 2.0 * delta * delta);
    }
}
