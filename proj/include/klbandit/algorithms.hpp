// algorithms.hpp
// Online agents behind a single step interface: fold in the last observation,
// emit the next policy. kl_ucb is the optimistic softmax agent; the other
// three kinds are experiment baselines.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "klbandit/core.hpp"
#include "klbandit/objective.hpp"

namespace klbandit {

enum class AgentKind { kl_ucb, reference_only, greedy_softmax, classic_ucb_argmax };

inline std::string_view to_string(AgentKind k) {
    switch (k) {
        case AgentKind::kl_ucb: return "kl_ucb";
        case AgentKind::reference_only: return "reference_only";
        case AgentKind::greedy_softmax: return "greedy_softmax";
        case AgentKind::classic_ucb_argmax: return "classic_ucb_argmax";
    }
    return "?";
}

inline AgentKind parse_agent_kind(std::string_view s) {
    if (s == "kl_ucb") return AgentKind::kl_ucb;
    if (s == "reference_only") return AgentKind::reference_only;
    if (s == "greedy_softmax") return AgentKind::greedy_softmax;
    if (s == "classic_ucb_argmax") return AgentKind::classic_ucb_argmax;
    throw InvalidArgument("unknown agent kind '" + std::string(s) + "'");
}

struct AgentHyper {
    double confidence_delta{kDefaultConfidenceDelta};
    std::uint64_t horizon{1};
    std::size_t num_arms{2};
    double eta{1.0};
    Policy reference = Policy::uniform(2);

    static AgentHyper from_instance(const BanditInstance& inst, double confidence_delta) {
        return AgentHyper{confidence_delta, inst.horizon, inst.num_arms, inst.eta, inst.reference};
    }
};

// Sufficient statistics after t observations. counts[a] is N_t(a).
struct AgentState {
    std::vector<std::uint64_t> counts;
    std::vector<double> reward_sums;
    std::uint64_t t{0};
    AgentHyper hyper;

    static AgentState initial(AgentHyper hyper) {
        AgentState s;
        s.counts.assign(hyper.num_arms, 0);
        s.reward_sums.assign(hyper.num_arms, 0.0);
        s.hyper = std::move(hyper);
        return s;
    }
};

// f_hat(a) = reward_sums(a) / (N(a) v 1); unpulled arms read 0.
inline std::vector<double> empirical_means(const AgentState& state) {
    std::vector<double> f(state.counts.size());
    for (std::size_t a = 0; a < f.size(); ++a)
        f[a] = state.reward_sums[a] / static_cast<double>(std::max<std::uint64_t>(state.counts[a], 1));
    return f;
}

// Confidence width for an arm pulled n times: sqrt(2 log(T K / delta) / (n v 1)).
inline double bonus_for_count(const AgentHyper& h, std::uint64_t n) {
    const double log_term =
        std::log(static_cast<double>(h.horizon) * static_cast<double>(h.num_arms) / h.confidence_delta);
    return std::sqrt(2.0 * log_term / static_cast<double>(std::max<std::uint64_t>(n, 1)));
}

inline std::vector<double> bonus(const AgentState& state) {
    std::vector<double> b(state.counts.size());
    for (std::size_t a = 0; a < b.size(); ++a) b[a] = bonus_for_count(state.hyper, state.counts[a]);
    return b;
}

// [f_hat + b] clipped to [0,1], regardless of the instance's reward range.
inline std::vector<double> optimistic_estimates(const AgentState& state) {
    auto f = empirical_means(state);
    for (std::size_t a = 0; a < f.size(); ++a)
        f[a] = std::clamp(f[a] + bonus_for_count(state.hyper, state.counts[a]), 0.0, 1.0);
    return f;
}

inline Policy kl_ucb_policy(const AgentState& state) {
    return gibbs_policy(state.hyper.reference, optimistic_estimates(state), state.hyper.eta);
}

namespace detail {

inline Policy greedy_softmax_policy(const AgentState& state) {
    return gibbs_policy(state.hyper.reference, empirical_means(state), state.hyper.eta);
}

// Ties go to the lowest arm index.
inline Policy ucb_argmax_policy(const AgentState& state) {
    const auto f = empirical_means(state);
    ArmIndex best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < f.size(); ++a) {
        const double v = f[a] + bonus_for_count(state.hyper, state.counts[a]);
        if (v > best_val) {
            best_val = v;
            best = a;
        }
    }
    return Policy::point_mass(f.size(), best);
}

}  // namespace detail

inline Policy agent_policy(AgentKind kind, const AgentState& state) {
    switch (kind) {
        case AgentKind::kl_ucb: return kl_ucb_policy(state);
        case AgentKind::reference_only: return state.hyper.reference;
        case AgentKind::greedy_softmax: return detail::greedy_softmax_policy(state);
        case AgentKind::classic_ucb_argmax: return detail::ucb_argmax_policy(state);
    }
    throw InvalidArgument("unknown agent kind");
}

struct StepResult {
    AgentState state;
    Policy policy;
};

// One protocol step. With t = 0 no observation may be passed and the initial
// policy is returned; afterwards (action, reward) of the previous round are
// folded in first, so the emitted policy is built from N_t.
inline StepResult agent_step(AgentKind kind, AgentState state, std::optional<ArmIndex> last_action,
                             std::optional<double> last_reward) {
    const bool has_obs = last_action.has_value();
    if (has_obs != last_reward.has_value())
        throw InvalidArgument("agent_step: action and reward must be given together");
    if (has_obs) {
        if (*last_action >= state.counts.size()) throw InvalidArgument("agent_step: action out of range");
        state.counts[*last_action] += 1;
        state.reward_sums[*last_action] += *last_reward;
        state.t += 1;
    } else if (state.t != 0) {
        throw InvalidArgument("agent_step: observation required after round 0");
    }
    Policy next = agent_policy(kind, state);
    return StepResult{std::move(state), std::move(next)};
}

}  // namespace klbandit
