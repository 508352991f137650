// core.hpp
// Shared domain types: policies, bandit instances, noise models, run config,
// the error hierarchy and the seeded RNG plumbing used by the simulator.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace klbandit {

using ArmIndex = std::size_t;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A BanditInstance / Policy / config invariant does not hold.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// An operation was called outside its domain (e.g. t too small for delta_schedule).
class PreconditionFailed : public Error {
public:
    using Error::Error;
};

// Non-finite arithmetic or a violated runtime invariant inside a simulation.
class NumericalError : public Error {
public:
    using Error::Error;
};

inline constexpr double kPolicySumTolerance = 1e-12;

// Probability vector over arms. Every instance satisfies sum = 1 +- 1e-12 and
// nonnegative entries; there is no way to build one that does not.
class Policy {
public:
    // Validates an already-normalized vector.
    static Policy from_probs(std::vector<double> probs) {
        check(probs);
        return Policy(std::move(probs));
    }

    // Normalizes nonnegative weights (at least one strictly positive).
    static Policy from_weights(std::vector<double> weights) {
        if (weights.empty()) throw InvalidArgument("policy must have at least one arm");
        double total = 0.0;
        for (std::size_t a = 0; a < weights.size(); ++a) {
            if (!(weights[a] >= 0.0) || !std::isfinite(weights[a]))
                throw InvalidArgument("policy weight " + std::to_string(a) + " is negative or non-finite");
            total += weights[a];
        }
        if (!(total > 0.0)) throw InvalidArgument("policy weights sum to zero");
        for (auto& w : weights) w /= total;
        return from_probs(std::move(weights));
    }

    static Policy uniform(std::size_t num_arms) {
        if (num_arms == 0) throw InvalidArgument("policy must have at least one arm");
        return Policy(std::vector<double>(num_arms, 1.0 / static_cast<double>(num_arms)));
    }

    static Policy point_mass(std::size_t num_arms, ArmIndex arm) {
        if (arm >= num_arms) throw InvalidArgument("point mass arm out of range");
        std::vector<double> p(num_arms, 0.0);
        p[arm] = 1.0;
        return Policy(std::move(p));
    }

    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](ArmIndex a) const { return probs_[a]; }
    std::span<const double> probs() const noexcept { return probs_; }
    const std::vector<double>& vec() const noexcept { return probs_; }

    bool strictly_positive() const noexcept {
        for (double p : probs_)
            if (!(p > 0.0)) return false;
        return true;
    }

    double min() const noexcept {
        double m = std::numeric_limits<double>::infinity();
        for (double p : probs_) m = std::min(m, p);
        return m;
    }

    friend bool operator==(const Policy&, const Policy&) = default;

private:
    explicit Policy(std::vector<double> probs) : probs_(std::move(probs)) {}

    static void check(const std::vector<double>& probs) {
        if (probs.empty()) throw InvalidArgument("policy must have at least one arm");
        double total = 0.0;
        for (std::size_t a = 0; a < probs.size(); ++a) {
            const double p = probs[a];
            if (!std::isfinite(p) || p < 0.0 || p > 1.0)
                throw InvalidArgument("policy entry " + std::to_string(a) + " is outside [0,1]");
            total += p;
        }
        if (std::abs(total - 1.0) > kPolicySumTolerance)
            throw InvalidArgument("policy entries do not sum to 1");
    }

    std::vector<double> probs_;
};

// (A, r, eta, pi_ref, T). Use make() for a validated instance; the aggregate
// form exists so tests can construct invalid ones for validate_instance.
struct BanditInstance {
    std::size_t num_arms{0};
    std::vector<double> means;
    double eta{1.0};
    Policy reference = Policy::uniform(1);
    std::uint64_t horizon{1};

    static BanditInstance make(std::vector<double> means, double eta, std::uint64_t horizon);
    static BanditInstance make(std::vector<double> means, double eta, Policy reference, std::uint64_t horizon);
};

struct ValidationReport {
    std::vector<std::string> warnings;

    bool means_outside_unit_interval() const {
        for (const auto& w : warnings)
            if (w == kMeansOutsideUnit) return true;
        return false;
    }

    static constexpr std::string_view kMeansOutsideUnit = "means outside [0,1]";
};

// Throws InvalidArgument naming the first violated invariant. Means outside
// [0,1] are accepted with a warning; the lower-bound constructions need them.
inline ValidationReport validate_instance(const BanditInstance& inst) {
    ValidationReport report;
    if (inst.num_arms < 2) throw InvalidArgument("num_arms must be at least 2");
    if (inst.means.size() != inst.num_arms) throw InvalidArgument("means must have num_arms entries");
    for (std::size_t a = 0; a < inst.means.size(); ++a)
        if (!std::isfinite(inst.means[a])) throw InvalidArgument("mean " + std::to_string(a) + " is not finite");
    if (!std::isfinite(inst.eta) || !(inst.eta > 0.0)) throw InvalidArgument("eta must be positive");
    if (inst.reference.size() != inst.num_arms) throw InvalidArgument("reference must have num_arms entries");
    if (!inst.reference.strictly_positive()) throw InvalidArgument("reference must be strictly positive");
    if (inst.horizon < 1) throw InvalidArgument("horizon must be positive");
    for (double m : inst.means) {
        if (m < 0.0 || m > 1.0) {
            report.warnings.emplace_back(ValidationReport::kMeansOutsideUnit);
            break;
        }
    }
    return report;
}

inline BanditInstance BanditInstance::make(std::vector<double> means, double eta, Policy reference,
                                           std::uint64_t horizon) {
    BanditInstance inst;
    inst.num_arms = means.size();
    inst.means = std::move(means);
    inst.eta = eta;
    inst.reference = std::move(reference);
    inst.horizon = horizon;
    validate_instance(inst);
    return inst;
}

inline BanditInstance BanditInstance::make(std::vector<double> means, double eta, std::uint64_t horizon) {
    const std::size_t k = means.size();
    return make(std::move(means), eta, Policy::uniform(k == 0 ? 1 : k), horizon);
}

inline bool means_in_unit_interval(const BanditInstance& inst) {
    for (double m : inst.means)
        if (m < 0.0 || m > 1.0) return false;
    return true;
}

// `none` is a zero-variance model used to exercise the optimism tracker with
// exact empirical means; it is not 1-sub-Gaussian noise in any useful sense.
enum class NoiseKind { unit_gaussian, bernoulli, none };

struct NoiseModel {
    NoiseKind kind{NoiseKind::unit_gaussian};
};

inline std::string_view to_string(NoiseKind k) {
    switch (k) {
        case NoiseKind::unit_gaussian: return "unit_gaussian";
        case NoiseKind::bernoulli: return "bernoulli";
        case NoiseKind::none: return "none";
    }
    return "?";
}

inline NoiseKind parse_noise_kind(std::string_view s) {
    if (s == "unit_gaussian" || s == "gaussian") return NoiseKind::unit_gaussian;
    if (s == "bernoulli") return NoiseKind::bernoulli;
    if (s == "none") return NoiseKind::none;
    throw InvalidArgument("unknown noise model '" + std::string(s) + "'");
}

inline constexpr double kDefaultConfidenceDelta = 0.1;

struct RunConfig {
    std::uint64_t seed{0};
    double confidence_delta{kDefaultConfidenceDelta};
    bool record_policies{false};
};

inline void validate_run_config(const RunConfig& cfg) {
    if (!(cfg.confidence_delta > 0.0 && cfg.confidence_delta < 1.0))
        throw InvalidArgument("confidence_delta must lie in (0,1)");
}

// ---------------------------------------------------------------------------
// Seeding. Per-run streams are a pure function of (master seed, stream index),
// so a run's draws never depend on which other runs share its batch.

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
    return splitmix64(master ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
    const std::uint64_t s = derive_seed(seed, stream);
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Engine(seq);
}

// 53-bit uniform in [0,1) from one engine output.
inline double uniform01(Engine& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Draws additive noise (or a Bernoulli reward) from a dedicated engine.
class NoiseSource {
public:
    NoiseSource(NoiseModel model, std::uint64_t seed, std::uint64_t stream = 1)
        : model_(model), eng_(make_engine(seed, stream)) {}

    // Observed reward for an arm with the given mean.
    double observe(double mean) {
        switch (model_.kind) {
            case NoiseKind::unit_gaussian: return mean + gauss_(eng_);
            case NoiseKind::bernoulli: return uniform01(eng_) < mean ? 1.0 : 0.0;
            case NoiseKind::none: return mean;
        }
        return mean;
    }

    double standard_normal() { return gauss_(eng_); }

private:
    NoiseModel model_;
    Engine eng_;
    std::normal_distribution<double> gauss_{0.0, 1.0};
};

}  // namespace klbandit
