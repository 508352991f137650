// oracle.hpp
// Independent checks for the closed forms used by the lower-bound
// constructions. The brute-force minimizer deliberately avoids the
// sqrt(p q) closed form it is meant to certify.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "klbandit/core.hpp"
#include "klbandit/instances.hpp"
#include "klbandit/objective.hpp"

namespace klbandit {

// KL(N(m1,1) || N(m2,1)).
inline double gaussian_kl(double m1, double m2) {
    const double d = m1 - m2;
    return 0.5 * d * d;
}

struct SimplexMinimum {
    Policy argmin;
    double value{0.0};
};

namespace detail {

// KL(pi||p) + KL(pi||q) on raw vectors, 0 log 0 = 0; p, q strictly positive.
inline double sum_kl_raw(std::span<const double> pi, const Policy& p, const Policy& q) {
    double v = 0.0;
    for (std::size_t a = 0; a < pi.size(); ++a) {
        if (pi[a] <= 0.0) continue;
        v += pi[a] * (2.0 * std::log(pi[a]) - std::log(p[a]) - std::log(q[a]));
    }
    return v;
}

// Calls fn on every composition (c_0..c_{K-1}) of `steps` into K parts.
inline void for_each_composition(std::size_t k, std::size_t steps,
                                 const std::function<void(const std::vector<std::size_t>&)>& fn) {
    std::vector<std::size_t> c(k, 0);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t idx, std::size_t left) {
        if (idx + 1 == k) {
            c[idx] = left;
            fn(c);
            return;
        }
        for (std::size_t v = 0; v <= left; ++v) {
            c[idx] = v;
            rec(idx + 1, left - v);
        }
    };
    rec(0, steps);
}

// Golden-section search of a unimodal g on [lo, hi].
inline double golden_min(const std::function<double(double)>& g, double lo, double hi) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double gc = g(c), gd = g(d);
    for (int it = 0; it < 200 && (b - a) > 1e-15; ++it) {
        if (gc < gd) {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
    }
    double best = 0.5 * (a + b);
    // Endpoints can be optimal when the minimizer sits on the boundary.
    for (double cand : {lo, hi})
        if (g(cand) < g(best)) best = cand;
    return best;
}

}  // namespace detail

// Grid search over the simplex with step `resolution`, then pairwise
// mass-transfer line searches until a full sweep improves by < 1e-10.
inline SimplexMinimum brute_force_min_sum_kl(const Policy& p, const Policy& q, double resolution) {
    const std::size_t k = p.size();
    if (q.size() != k) throw InvalidArgument("brute_force_min_sum_kl: size mismatch");
    if (k < 2 || k > 4) throw PreconditionFailed("brute_force_min_sum_kl: supports 2 <= K <= 4");
    if (!p.strictly_positive() || !q.strictly_positive())
        throw PreconditionFailed("brute_force_min_sum_kl: p and q must be strictly positive");
    if (!(resolution > 0.0)) throw InvalidArgument("brute_force_min_sum_kl: resolution must be positive");
    if (resolution > 0.5) throw InvalidArgument("brute_force_min_sum_kl: resolution too coarse to refine");
    const auto steps = static_cast<std::size_t>(std::llround(1.0 / resolution));

    std::vector<double> best(k, 0.0), trial(k, 0.0);
    double best_val = std::numeric_limits<double>::infinity();
    detail::for_each_composition(k, steps, [&](const std::vector<std::size_t>& c) {
        for (std::size_t a = 0; a < k; ++a) trial[a] = static_cast<double>(c[a]) / static_cast<double>(steps);
        const double v = detail::sum_kl_raw(trial, p, q);
        if (v < best_val) {
            best_val = v;
            best = trial;
        }
    });

    for (int sweep = 0; sweep < 10000; ++sweep) {
        const double start = best_val;
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = i + 1; j < k; ++j) {
                const double total = best[i] + best[j];
                if (total <= 0.0) continue;
                auto g = [&](double xi) {
                    trial = best;
                    trial[i] = xi;
                    trial[j] = total - xi;
                    return detail::sum_kl_raw(trial, p, q);
                };
                const double xi = detail::golden_min(g, 0.0, total);
                const double v = g(xi);
                if (v < best_val) {
                    best_val = v;
                    best[i] = xi;
                    best[j] = total - xi;
                }
            }
        }
        if (start - best_val < 1e-10) break;
    }
    return SimplexMinimum{Policy::from_weights(best), std::max(best_val, 0.0)};
}

// eta^-1 [KL(pi_hat || pi1*) + KL(pi_hat || pi2*)] at pi_hat ~ sqrt(pi1* pi2*),
// which is -2 eta^-1 log sum_a sqrt(pi1*(a) pi2*(a)); evaluated in log space.
inline double gap_sum_at_geometric_mean(const BanditInstance& a, const BanditInstance& b) {
    if (a.num_arms != b.num_arms) throw InvalidArgument("gap_sum_at_geometric_mean: arm counts differ");
    if (a.eta != b.eta) throw InvalidArgument("gap_sum_at_geometric_mean: eta differs");
    if (a.means == b.means && a.reference == b.reference) return 0.0;
    const auto la = log_optimal_policy(a);
    const auto lb = log_optimal_policy(b);
    std::vector<double> h(la.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = 0.5 * (la[i] + lb[i]);
    return std::max(-2.0 * detail::log_sum_exp(h) / a.eta, 0.0);
}

struct SeparationResult {
    double lhs{0.0};
    double rhs{0.0};
    bool holds{false};
};

// Step-1 separation for a fast-family pair differing in m sign coordinates:
//   min_pi SubOpt_1(pi) + SubOpt_2(pi) >= m eta delta^2 / (10 K e^{2 eta alpha}).
inline SeparationResult separation_check(const std::pair<BanditInstance, BanditInstance>& pair, std::size_t m,
                                         double delta, double alpha) {
    const auto& [first, second] = pair;
    if (first.num_arms != second.num_arms || first.num_arms % 2 != 0)
        throw PreconditionFailed("separation_check: expected two 2K-arm instances");
    if (!(delta > 0.0) || alpha < 2.0 * delta) throw PreconditionFailed("separation_check: need alpha >= 2 delta > 0");
    const std::size_t k = first.num_arms / 2;
    std::size_t differing = 0;
    for (std::size_t i = 0; i < first.num_arms; ++i) differing += first.means[i] != second.means[i];
    if (differing != m) throw PreconditionFailed("separation_check: pair differs at " + std::to_string(differing) +
                                                 " arms, expected m = " + std::to_string(m));
    const double eta = first.eta;
    SeparationResult res;
    res.lhs = gap_sum_at_geometric_mean(first, second);
    res.rhs = static_cast<double>(m) * eta * delta * delta /
              (10.0 * static_cast<double>(k) * std::exp(2.0 * eta * alpha));
    res.holds = res.lhs >= res.rhs;
    return res;
}

// Slow-family separation: SubOpt_1 + SubOpt_2 at the geometric mean >= delta/2
// once eta delta >= 2 log K.
inline SeparationResult slow_separation_check(std::size_t num_arms, std::uint64_t horizon, double eta) {
    if (num_arms < kSlowFamilyTheoremMinArms) throw PreconditionFailed("slow_separation_check: requires K >= 9");
    const double delta = std::sqrt(2.0 * static_cast<double>(num_arms) / static_cast<double>(horizon));
    const double need = 2.0 * std::log(static_cast<double>(num_arms));
    if (eta * delta < need * (1.0 - 1e-12))
        throw PreconditionFailed("slow_separation_check: regime requires eta * delta >= 2 log K");
    const auto fam = slow_hard_family(num_arms, horizon, eta);
    SeparationResult res;
    res.lhs = gap_sum_at_geometric_mean(fam.instances[0], fam.instances[1]);
    res.rhs = fam.delta / 2.0;
    res.holds = res.lhs >= res.rhs;
    return res;
}

}  // namespace klbandit
