// instances.hpp
// Hard-instance families from the minimax lower-bound constructions plus a
// random benchmark generator.
//
// Slow (low-regularization) family: K arms, uniform reference,
//   instance 1: means (delta, 0, ..., 0)
//   instance k: instance 1 with arm k raised to 2 delta,   delta = sqrt(2K/T).
//
// Fast (high-regularization) family: 2K arms, uniform reference,
//   means(i)     = 1/2 + x_i + mu_i delta_t   for i < K
//   means(K + i) = 1/2 + alpha                with alpha = 2 log(2) / eta,
// where x + mu delta_t ~ Unif([-alpha, alpha]^K) for every admissible t.
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "klbandit/core.hpp"

namespace klbandit {

struct SlowFamily {
    std::vector<BanditInstance> instances;
    double delta{0.0};
    std::vector<std::string> warnings;
};

struct FastFamilySample {
    std::vector<double> x;
    std::vector<int> mu;  // entries are +1 / -1
    double delta_t{0.0};
    double alpha{0.0};
    BanditInstance instance;
};

inline constexpr std::size_t kSlowFamilyTheoremMinArms = 9;

inline SlowFamily slow_hard_family(std::size_t num_arms, std::uint64_t horizon, double eta) {
    if (num_arms < 2) throw InvalidArgument("slow_hard_family: num_arms must be at least 2");
    if (horizon < 1) throw InvalidArgument("slow_hard_family: horizon must be positive");
    SlowFamily fam;
    fam.delta = std::sqrt(2.0 * static_cast<double>(num_arms) / static_cast<double>(horizon));
    if (num_arms < kSlowFamilyTheoremMinArms)
        fam.warnings.emplace_back("num_arms below 9: lower-bound constants do not apply");

    std::vector<double> base(num_arms, 0.0);
    base[0] = fam.delta;
    fam.instances.reserve(num_arms);
    fam.instances.push_back(BanditInstance::make(base, eta, horizon));
    for (std::size_t k = 1; k < num_arms; ++k) {
        auto means = base;
        means[k] = 2.0 * fam.delta;
        fam.instances.push_back(BanditInstance::make(std::move(means), eta, horizon));
    }
    return fam;
}

inline double fast_family_alpha(double eta) {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidArgument("eta must be positive");
    return 2.0 * std::log(2.0) / eta;
}

// delta_t = alpha / (2n) with n = ceil(alpha / (2 sqrt(K/t))). Lands in
// [sqrt(K/t)/2, sqrt(K/t)] whenever alpha sqrt(t/K) >= 1.
inline double delta_schedule(std::uint64_t t, std::size_t num_arms, double alpha) {
    if (num_arms == 0 || t == 0 || !(alpha > 0.0))
        throw PreconditionFailed("t too small for this (K, alpha)");
    const double scale = std::sqrt(static_cast<double>(num_arms) / static_cast<double>(t));
    if (alpha / scale < 1.0) throw PreconditionFailed("t too small for this (K, alpha)");
    const double n = std::ceil(alpha / (2.0 * scale));
    return alpha / (2.0 * n);
}

inline void require_fast_regime(std::size_t num_arms, double eta, std::uint64_t t) {
    if (num_arms < 1) throw InvalidArgument("fast family needs at least one arm pair");
    if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidArgument("eta must be positive");
    if (static_cast<double>(t) < eta * eta * static_cast<double>(num_arms))
        throw PreconditionFailed("t must be at least eta^2 K for the fast family");
}

namespace detail {

inline BanditInstance fast_instance(std::span<const double> offsets, double alpha, double eta,
                                    std::uint64_t horizon) {
    const std::size_t k = offsets.size();
    std::vector<double> means(2 * k, 0.5 + alpha);
    for (std::size_t i = 0; i < k; ++i) means[i] = 0.5 + offsets[i];
    return BanditInstance::make(std::move(means), eta, horizon);
}

}  // namespace detail

// Draws u ~ Unif([-alpha, alpha]^K) and splits each coordinate as
// u = x + mu delta_t with x in the stripe set
//   H_t = U_{j=1..n} [-alpha + (4j-3) delta_t, -alpha + (4j-1) delta_t].
inline FastFamilySample fast_family_sample(std::size_t num_arms, double eta, std::uint64_t t,
                                           std::uint64_t seed) {
    require_fast_regime(num_arms, eta, t);
    FastFamilySample s;
    s.alpha = fast_family_alpha(eta);
    s.delta_t = delta_schedule(t, num_arms, s.alpha);
    const double block = 4.0 * s.delta_t;
    const auto n_blocks = static_cast<std::uint64_t>(std::llround(s.alpha / (2.0 * s.delta_t)));

    Engine eng = make_engine(seed, 0xFA57);
    std::vector<double> u(num_arms);
    s.x.resize(num_arms);
    s.mu.resize(num_arms);
    for (std::size_t i = 0; i < num_arms; ++i) {
        u[i] = -s.alpha + 2.0 * s.alpha * uniform01(eng);
        const double off = u[i] + s.alpha;
        auto j = static_cast<std::uint64_t>(off / block);
        if (j >= n_blocks) j = n_blocks - 1;
        const double within = off - block * static_cast<double>(j);
        s.mu[i] = within < 2.0 * s.delta_t ? -1 : +1;
        s.x[i] = u[i] - s.mu[i] * s.delta_t;
    }
    s.instance = detail::fast_instance(u, s.alpha, eta, t);
    return s;
}

// r_{x,mu1} and r_{x,mu2} over 2K arms, sharing x, delta and alpha.
inline std::pair<BanditInstance, BanditInstance> paired_instances(std::span<const double> x,
                                                                  std::span<const int> mu1,
                                                                  std::span<const int> mu2, double delta,
                                                                  double eta, double alpha,
                                                                  std::uint64_t horizon = 1) {
    const std::size_t k = x.size();
    if (k == 0) throw InvalidArgument("paired_instances: x is empty");
    if (mu1.size() != k || mu2.size() != k) throw InvalidArgument("paired_instances: sign vectors must match x");
    if (!(delta > 0.0)) throw PreconditionFailed("paired_instances: delta must be positive");
    if (alpha < 2.0 * delta) throw PreconditionFailed("paired_instances: need alpha >= 2 delta");
    for (std::size_t i = 0; i < k; ++i) {
        if (std::abs(x[i]) > alpha - delta)
            throw PreconditionFailed("paired_instances: |x_" + std::to_string(i) + "| exceeds alpha - delta");
        if ((mu1[i] != 1 && mu1[i] != -1) || (mu2[i] != 1 && mu2[i] != -1))
            throw InvalidArgument("paired_instances: sign vectors must be +-1");
    }
    std::vector<double> o1(k), o2(k);
    for (std::size_t i = 0; i < k; ++i) {
        o1[i] = x[i] + mu1[i] * delta;
        o2[i] = x[i] + mu2[i] * delta;
    }
    return {detail::fast_instance(o1, alpha, eta, horizon), detail::fast_instance(o2, alpha, eta, horizon)};
}

inline std::size_t hamming_distance(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw InvalidArgument("hamming_distance: size mismatch");
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
    return d;
}

// Dirichlet(1, ..., 1) draw; every entry strictly positive.
inline Policy random_policy(std::size_t num_arms, Engine& eng) {
    std::vector<double> w(num_arms);
    for (auto& v : w) v = -std::log1p(-uniform01(eng)) + 1e-300;
    return Policy::from_weights(std::move(w));
}

// Means i.i.d. Unif[0,1], uniform reference.
inline BanditInstance random_instance(std::size_t num_arms, double eta, std::uint64_t horizon,
                                      std::uint64_t seed) {
    Engine eng = make_engine(seed, 0x1257);
    std::vector<double> means(num_arms);
    for (auto& m : means) m = uniform01(eng);
    return BanditInstance::make(std::move(means), eta, horizon);
}

}  // namespace klbandit
