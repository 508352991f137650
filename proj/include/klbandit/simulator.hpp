// simulator.hpp
// Plays one agent against one instance for T rounds. Regret is exact: each
// round adds J(pi*) - J(pi_t) for the policy the agent emitted, whatever
// action was then sampled. Noise only reaches the agent's observations.
#pragma once

#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "klbandit/algorithms.hpp"
#include "klbandit/core.hpp"
#include "klbandit/objective.hpp"
#include "klbandit/parallel.hpp"

namespace klbandit {

struct RunRecord {
    std::vector<ArmIndex> actions;
    std::vector<double> rewards;
    std::vector<double> regret_curve;  // cumulative, length T
    bool optimism_violated{false};
    std::optional<std::uint64_t> first_violation_step;  // 1-based round
    std::optional<ArmIndex> first_violation_arm;
    double harmonic_sum{0.0};  // sum_t 1 / (N_{t-1}(a_t) v 1)
    std::uint64_t seed{0};
    std::vector<std::uint64_t> final_counts;

    // Only filled when RunConfig::record_policies is set.
    std::vector<Policy> policies;                       // pi_t, t = 1..T
    std::vector<std::vector<double>> optimism_margins;  // b_t(a) - |f_t(a) - r(a)|, t = 1..T

    double final_regret() const { return regret_curve.empty() ? 0.0 : regret_curve.back(); }
};

struct BatchSummary {
    double mean_final_regret{0.0};
    double stderr_final_regret{0.0};
    std::vector<std::uint64_t> seeds;
    std::vector<double> per_seed_final;
    std::vector<bool> per_seed_violated;
    double optimism_failure_rate{0.0};
    std::vector<double> mean_regret_curve;
};

class RunError : public Error {
public:
    RunError(std::uint64_t seed, const std::string& what)
        : Error("run with seed " + std::to_string(seed) + " failed: " + what), seed_(seed) {}
    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
};

// Deterministic upper bound on the harmonic ledger, valid for T >= 2.
inline double harmonic_sum_bound(std::size_t num_arms, std::uint64_t horizon) {
    return 4.0 * static_cast<double>(num_arms) * std::log(static_cast<double>(horizon));
}

// Inverse CDF over arms in index order with a single uniform.
inline ArmIndex sample_action(const Policy& pi, double u) {
    double cum = 0.0;
    ArmIndex last_positive = 0;
    for (std::size_t a = 0; a < pi.size(); ++a) {
        if (pi[a] <= 0.0) continue;
        cum += pi[a];
        last_positive = a;
        if (u < cum) return a;
    }
    return last_positive;
}

inline RunRecord run(const BanditInstance& inst, AgentKind kind, const RunConfig& cfg, NoiseModel noise) {
    validate_instance(inst);
    validate_run_config(cfg);
    if (noise.kind == NoiseKind::bernoulli && !means_in_unit_interval(inst))
        throw PreconditionFailed("bernoulli noise requires every mean in [0,1]");

    const std::uint64_t horizon = inst.horizon;
    const std::size_t k = inst.num_arms;
    const auto log_pi_star = log_optimal_policy(inst);
    const double min_policy_mass = inst.reference.min() * std::exp(-inst.eta);

    RunRecord rec;
    rec.seed = cfg.seed;
    rec.actions.reserve(horizon);
    rec.rewards.reserve(horizon);
    rec.regret_curve.reserve(horizon);
    if (cfg.record_policies) {
        rec.policies.reserve(horizon);
        rec.optimism_margins.reserve(horizon);
    }

    Engine action_eng = make_engine(cfg.seed, 0);
    NoiseSource noise_src(noise, cfg.seed, 1);

    auto fail = [](std::uint64_t step, const std::string& what) -> NumericalError {
        return NumericalError("step " + std::to_string(step) + ": " + what);
    };

    StepResult step = agent_step(kind, AgentState::initial(AgentHyper::from_instance(inst, cfg.confidence_delta)),
                                 std::nullopt, std::nullopt);
    double cum_regret = 0.0;
    std::vector<double> margins(k);

    for (std::uint64_t t = 1; t <= horizon; ++t) {
        const Policy& pi = step.policy;
        if (kind == AgentKind::kl_ucb && pi.min() < min_policy_mass * (1.0 - 1e-12))
            throw fail(t, "kl_ucb policy mass fell below min pi_ref * exp(-eta)");

        const double gap = kl_divergence_log(pi, log_pi_star) / inst.eta;
        if (!std::isfinite(gap)) throw fail(t, "non-finite suboptimality gap");
        cum_regret += gap;

        const ArmIndex a = sample_action(pi, uniform01(action_eng));
        rec.harmonic_sum += 1.0 / static_cast<double>(std::max<std::uint64_t>(step.state.counts[a], 1));
        const double r = noise_src.observe(inst.means[a]);
        if (!std::isfinite(r)) throw fail(t, "non-finite reward");

        rec.actions.push_back(a);
        rec.rewards.push_back(r);
        rec.regret_curve.push_back(cum_regret);
        if (cfg.record_policies) rec.policies.push_back(pi);

        step = agent_step(kind, std::move(step.state), a, r);
        const AgentState& st = step.state;

        std::uint64_t total = 0;
        for (auto c : st.counts) total += c;
        if (total != st.t || st.t != t) throw fail(t, "pull counts do not sum to t");

        // Optimism event: |f_t(a) - r(a)| <= b_t(a) for every arm.
        const bool held_before = !rec.optimism_violated;
        for (std::size_t arm = 0; arm < k; ++arm) {
            const double f = st.reward_sums[arm] / static_cast<double>(std::max<std::uint64_t>(st.counts[arm], 1));
            const double b = bonus_for_count(st.hyper, st.counts[arm]);
            margins[arm] = b - std::abs(f - inst.means[arm]);
            if (margins[arm] < 0.0 && !rec.optimism_violated) {
                rec.optimism_violated = true;
                rec.first_violation_step = t;
                rec.first_violation_arm = arm;
            }
            // While the event holds, clipped optimistic estimates dominate any mean in [0,1].
            if (held_before && !rec.optimism_violated && inst.means[arm] >= 0.0 && inst.means[arm] <= 1.0) {
                const double f_plus = std::clamp(f + b, 0.0, 1.0);
                if (f_plus < inst.means[arm]) throw fail(t, "optimistic estimate below true mean under E(delta)");
            }
        }
        if (cfg.record_policies) rec.optimism_margins.push_back(margins);
    }

    if (horizon >= 2 && rec.harmonic_sum > harmonic_sum_bound(k, horizon))
        throw NumericalError("harmonic sum exceeds 4 K log T");
    rec.final_counts = step.state.counts;
    return rec;
}

// True iff E(delta) held for every round and arm. Uses the full margin
// matrix when it was recorded and cross-checks it against the running flag.
inline bool optimism_event_check(const RunRecord& rec) {
    if (rec.optimism_margins.empty()) return !rec.optimism_violated;
    bool held = true;
    for (const auto& row : rec.optimism_margins)
        for (double m : row)
            if (m < 0.0) held = false;
    if (held == rec.optimism_violated) throw NumericalError("optimism margins disagree with the running flag");
    return held;
}

inline BatchSummary run_batch(const BanditInstance& inst, AgentKind kind, const RunConfig& cfg_base,
                              NoiseModel noise, std::span<const std::uint64_t> seeds, std::size_t threads = 0) {
    if (seeds.empty()) throw InvalidArgument("run_batch: seed list is empty");
    std::vector<RunRecord> records(seeds.size());
    auto errors = parallel_for(seeds.size(), threads, [&](std::size_t i) {
        RunConfig cfg = cfg_base;
        cfg.seed = seeds[i];
        cfg.record_policies = false;
        records[i] = run(inst, kind, cfg, noise);
    });
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const std::exception& e) {
            throw RunError(seeds[i], e.what());
        }
    }

    BatchSummary s;
    const auto n = static_cast<double>(seeds.size());
    s.seeds.assign(seeds.begin(), seeds.end());
    s.mean_regret_curve.assign(inst.horizon, 0.0);
    std::size_t failures = 0;
    for (const auto& rec : records) {
        s.per_seed_final.push_back(rec.final_regret());
        s.per_seed_violated.push_back(rec.optimism_violated);
        failures += rec.optimism_violated;
        for (std::size_t t = 0; t < rec.regret_curve.size(); ++t) s.mean_regret_curve[t] += rec.regret_curve[t];
    }
    for (auto& v : s.mean_regret_curve) v /= n;
    double sum = 0.0;
    for (double v : s.per_seed_final) sum += v;
    s.mean_final_regret = sum / n;
    if (seeds.size() > 1) {
        double ss = 0.0;
        for (double v : s.per_seed_final) ss += (v - s.mean_final_regret) * (v - s.mean_final_regret);
        s.stderr_final_regret = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    s.optimism_failure_rate = static_cast<double>(failures) / n;
    return s;
}

}  // namespace klbandit
