// verify.hpp
// The oracle sweeps behind `klbandit verify`: each check returns one row of
// the table and never throws for a wrong verdict.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "klbandit/core.hpp"
#include "klbandit/instances.hpp"
#include "klbandit/objective.hpp"
#include "klbandit/oracle.hpp"

namespace klbandit {

struct CheckRow {
    CheckRow(std::string n, std::size_t c, std::size_t f = 0) : name(std::move(n)), cases(c), failures(f) {}

    std::string name;
    std::size_t cases{0};
    std::size_t failures{0};
    double worst{0.0};  // largest error (or smallest slack), meaning depends on the check
    std::string note;
    bool passed() const { return failures == 0 && note.rfind("error", 0) != 0; }
};

struct SeparationConfig {
    std::vector<double> x;
    std::vector<int> mu1, mu2;
    double eta{1.0};
    double alpha{0.0};
    double delta{0.0};
};

// K in [2,8], eta in [0.1,2], delta = alpha/4, |x_i| <= alpha - delta, random signs.
inline SeparationConfig random_separation_config(Engine& eng) {
    SeparationConfig c;
    const auto k = static_cast<std::size_t>(2 + eng() % 7);
    c.eta = 0.1 + 1.9 * uniform01(eng);
    c.alpha = fast_family_alpha(c.eta);
    c.delta = c.alpha / 4.0;
    c.x.resize(k);
    c.mu1.resize(k);
    c.mu2.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        c.x[i] = (c.alpha - c.delta) * (2.0 * uniform01(eng) - 1.0);
        c.mu1[i] = (eng() & 1) ? 1 : -1;
        c.mu2[i] = (eng() & 1) ? 1 : -1;
    }
    return c;
}

inline CheckRow check_gaussian_kl(std::size_t cases, std::uint64_t seed) {
    CheckRow row{"gaussian_kl = 2 delta^2", cases};
    Engine eng = make_engine(seed, 1);
    // m and delta on a 2^-16 grid so m + 2 delta is formed without rounding;
    // otherwise the addition alone costs more than 1e-15 for |m| ~ 10.
    const double ulp = std::ldexp(1.0, -16);
    for (std::size_t i = 0; i < cases; ++i) {
        const double m = static_cast<double>(static_cast<std::int64_t>(eng() % (20u << 16)) - (10 << 16)) * ulp;
        const double d = static_cast<double>(1 + eng() % (2u << 16)) * ulp;
        const double err = std::abs(gaussian_kl(m, m + 2.0 * d) - 2.0 * d * d);
        row.worst = std::max(row.worst, err);
        if (err > 1e-15) ++row.failures;
    }
    return row;
}

inline CheckRow check_geometric_minimizer(std::size_t cases, std::uint64_t seed, double resolution = 0.01) {
    CheckRow row{"brute force vs sqrt(pq) minimizer, K=3", cases};
    Engine eng = make_engine(seed, 2);
    for (std::size_t i = 0; i < cases; ++i) {
        const Policy p = random_policy(3, eng);
        const Policy q = random_policy(3, eng);
        const auto bf = brute_force_min_sum_kl(p, q, resolution);
        const Policy g = geometric_mean_policy(p, q);
        const double closed = kl_divergence(g, p) + kl_divergence(g, q);
        const double diff = bf.value - closed;
        row.worst = std::max(row.worst, std::abs(diff));
        if (diff < -1e-6 || diff > 1e-4) ++row.failures;
    }
    return row;
}

inline CheckRow check_separation(std::size_t cases, std::uint64_t seed) {
    CheckRow row{"fast-family separation lhs >= rhs", cases};
    row.worst = std::numeric_limits<double>::infinity();
    Engine eng = make_engine(seed, 3);
    for (std::size_t i = 0; i < cases; ++i) {
        const auto c = random_separation_config(eng);
        const auto pair = paired_instances(c.x, c.mu1, c.mu2, c.delta, c.eta, c.alpha);
        const auto res = separation_check(pair, hamming_distance(c.mu1, c.mu2), c.delta, c.alpha);
        if (res.rhs > 0.0) row.worst = std::min(row.worst, res.lhs / res.rhs);
        if (!res.holds) ++row.failures;
    }
    row.note = "worst = min lhs/rhs";
    return row;
}

inline CheckRow check_separation_monotone(std::size_t cases, std::uint64_t seed) {
    CheckRow row{"separation lhs nondecreasing in m", cases};
    Engine eng = make_engine(seed, 4);
    for (std::size_t i = 0; i < cases; ++i) {
        const auto c = random_separation_config(eng);
        const std::size_t k = c.x.size();
        std::vector<int> flipped = c.mu1;
        double prev = -1.0;
        for (std::size_t m = 0; m <= k; ++m) {
            if (m > 0) flipped[m - 1] = -flipped[m - 1];
            const auto pair = paired_instances(c.x, c.mu1, flipped, c.delta, c.eta, c.alpha);
            const auto res = separation_check(pair, m, c.delta, c.alpha);
            if (res.lhs < prev - 1e-12) {
                ++row.failures;
                row.worst = std::max(row.worst, prev - res.lhs);
            }
            prev = res.lhs;
        }
    }
    return row;
}

inline CheckRow check_slow_separation() {
    CheckRow row{"slow-family separation >= delta/2", 2};
    const std::uint64_t horizon = 1000;
    for (auto [k, factor] : {std::pair<std::size_t, double>{9, 2.0}, {16, 4.0}}) {
        const double delta = std::sqrt(2.0 * static_cast<double>(k) / static_cast<double>(horizon));
        const double eta = factor * std::log(static_cast<double>(k)) / delta;
        const auto res = slow_separation_check(k, horizon, eta);
        if (!res.holds) ++row.failures;
        row.worst = k == 9 ? res.lhs - res.rhs : row.worst;
    }
    row.note = "worst = slack at the K=9 boundary";
    return row;
}

inline std::vector<CheckRow> run_oracle_suite(std::uint64_t seed = 0) {
    std::vector<CheckRow> rows;
    auto guarded = [&](const std::string& name, auto&& fn) {
        try {
            rows.push_back(fn());
        } catch (const std::exception& e) {
            CheckRow r{name, 0, 1};
            r.note = std::string("error: ") + e.what();
            rows.push_back(std::move(r));
        }
    };
    guarded("gaussian_kl", [&] { return check_gaussian_kl(100, seed); });
    guarded("geometric minimizer", [&] { return check_geometric_minimizer(20, seed); });
    guarded("separation", [&] { return check_separation(100, seed); });
    guarded("separation monotone", [&] { return check_separation_monotone(20, seed); });
    guarded("slow separation", [&] { return check_slow_separation(); });
    return rows;
}

}  // namespace klbandit
