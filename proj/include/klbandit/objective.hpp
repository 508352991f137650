// objective.hpp
// Closed-form KL-regularized math over a finite action set:
//   J(pi) = E_pi[r] - eta^-1 KL(pi || pi_ref),   pi*(a) ~ pi_ref(a) exp(eta r(a)),
//   J(pi*) - J(pi) = eta^-1 KL(pi || pi*).
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "klbandit/core.hpp"

namespace klbandit {

struct ObjectiveReport {
    double value{0.0};            // J(pi)
    double expected_reward{0.0};  // E_pi r
    double kl_penalty{0.0};       // KL(pi || pi_ref)
};

namespace detail {

inline double log_sum_exp(std::span<const double> z) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : z) m = std::max(m, v);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double v : z) s += std::exp(v - m);
    return m + std::log(s);
}

inline void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw InvalidArgument(std::string(what) + ": size mismatch");
}

}  // namespace detail

// KL(p || q) with 0 log 0 = 0. Throws if p puts mass where q has none.
inline double kl_divergence(const Policy& p, const Policy& q) {
    detail::require_same_size(p.size(), q.size(), "kl_divergence");
    double kl = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) {
        if (p[a] == 0.0) continue;
        if (q[a] == 0.0)
            throw InvalidArgument("kl_divergence: absolute continuity fails at arm " + std::to_string(a));
        kl += p[a] * std::log(p[a] / q[a]);
    }
    return std::max(kl, 0.0);
}

// log pi(a) for pi(a) ~ reference(a) exp(eta rewards(a)); never under- or overflows.
inline std::vector<double> log_gibbs_policy(const Policy& reference, std::span<const double> rewards,
                                            double eta) {
    detail::require_same_size(reference.size(), rewards.size(), "log_gibbs_policy");
    std::vector<double> z(rewards.size());
    for (std::size_t a = 0; a < z.size(); ++a) z[a] = std::log(reference[a]) + eta * rewards[a];
    const double lse = detail::log_sum_exp(z);
    for (auto& v : z) v -= lse;
    return z;
}

// Softmax around the reference with inverse temperature eta. Exponents are
// shifted by the max reward so eta * |r| in the hundreds stays finite.
inline Policy gibbs_policy(const Policy& reference, std::span<const double> rewards, double eta) {
    detail::require_same_size(reference.size(), rewards.size(), "gibbs_policy");
    if (rewards.empty()) throw InvalidArgument("gibbs_policy: no arms");
    const double r_max = *std::max_element(rewards.begin(), rewards.end());
    std::vector<double> w(rewards.size());
    for (std::size_t a = 0; a < w.size(); ++a) w[a] = reference[a] * std::exp(eta * (rewards[a] - r_max));
    return Policy::from_weights(std::move(w));
}

inline Policy optimal_policy(const BanditInstance& inst) {
    return gibbs_policy(inst.reference, inst.means, inst.eta);
}

inline std::vector<double> log_optimal_policy(const BanditInstance& inst) {
    return log_gibbs_policy(inst.reference, inst.means, inst.eta);
}

inline ObjectiveReport regularized_value(const BanditInstance& inst, const Policy& pi) {
    detail::require_same_size(inst.num_arms, pi.size(), "regularized_value");
    ObjectiveReport rep;
    for (std::size_t a = 0; a < pi.size(); ++a) rep.expected_reward += pi[a] * inst.means[a];
    rep.kl_penalty = kl_divergence(pi, inst.reference);
    rep.value = rep.expected_reward - rep.kl_penalty / inst.eta;
    return rep;
}

// J(pi*) = eta^-1 log sum_a pi_ref(a) exp(eta r(a)).
inline double optimal_value(const BanditInstance& inst) {
    std::vector<double> z(inst.num_arms);
    for (std::size_t a = 0; a < z.size(); ++a) z[a] = std::log(inst.reference[a]) + inst.eta * inst.means[a];
    return detail::log_sum_exp(z) / inst.eta;
}

// KL(pi || q) where q is given by its log-probabilities.
inline double kl_divergence_log(const Policy& pi, std::span<const double> log_q) {
    detail::require_same_size(pi.size(), log_q.size(), "kl_divergence_log");
    double kl = 0.0;
    for (std::size_t a = 0; a < pi.size(); ++a) {
        if (pi[a] == 0.0) continue;
        kl += pi[a] * (std::log(pi[a]) - log_q[a]);
    }
    return std::max(kl, 0.0);
}

// J(pi*) - J(pi), evaluated as eta^-1 KL(pi || pi*) with pi* in log space so
// a near-optimal pi does not lose the gap to cancellation and a concentrated
// pi* (huge eta) does not underflow.
inline double subopt_gap(const BanditInstance& inst, const Policy& pi) {
    detail::require_same_size(inst.num_arms, pi.size(), "subopt_gap");
    return kl_divergence_log(pi, log_optimal_policy(inst)) / inst.eta;
}

// Same quantity as a difference of two objective values. Cross-check only.
inline double subopt_gap_direct(const BanditInstance& inst, const Policy& pi) {
    return regularized_value(inst, optimal_policy(inst)).value - regularized_value(inst, pi).value;
}

// argmin_pi KL(pi||p) + KL(pi||q), i.e. pi(a) ~ sqrt(p(a) q(a)).
inline Policy geometric_mean_policy(const Policy& p, const Policy& q) {
    detail::require_same_size(p.size(), q.size(), "geometric_mean_policy");
    if (!p.strictly_positive() || !q.strictly_positive())
        throw InvalidArgument("geometric_mean_policy: p and q must be strictly positive");
    std::vector<double> w(p.size());
    for (std::size_t a = 0; a < w.size(); ++a) w[a] = std::sqrt(p[a] * q[a]);
    return Policy::from_weights(std::move(w));
}

}  // namespace klbandit
