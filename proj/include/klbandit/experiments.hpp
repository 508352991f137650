// experiments.hpp
// Declarative (eta, K, T, agent) sweeps, the two-model regret scaling fit
// (a log^2 T versus b sqrt T), and Bayes regret on the fast family.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "klbandit/algorithms.hpp"
#include "klbandit/core.hpp"
#include "klbandit/instances.hpp"
#include "klbandit/io.hpp"
#include "klbandit/parallel.hpp"
#include "klbandit/simulator.hpp"

namespace klbandit {

enum class InstanceSource { random, slow_family, fast_family, file };

inline std::string_view to_string(InstanceSource s) {
    switch (s) {
        case InstanceSource::random: return "random";
        case InstanceSource::slow_family: return "slow_family";
        case InstanceSource::fast_family: return "fast_family";
        case InstanceSource::file: return "file";
    }
    return "?";
}

inline InstanceSource parse_instance_source(std::string_view s) {
    if (s == "random") return InstanceSource::random;
    if (s == "slow_family" || s == "slow") return InstanceSource::slow_family;
    if (s == "fast_family" || s == "fast") return InstanceSource::fast_family;
    if (s == "file") return InstanceSource::file;
    throw InvalidArgument("unknown instance source '" + std::string(s) + "'");
}

struct ExperimentConfig {
    std::vector<double> etas;
    std::vector<std::size_t> arms;
    std::vector<std::uint64_t> horizons;
    std::vector<AgentKind> agents;
    std::size_t seeds_per_cell{1};
    NoiseModel noise{};
    double confidence_delta{kDefaultConfidenceDelta};
    InstanceSource instance_source{InstanceSource::random};
    std::size_t family_member{0};  // which slow-family instance a cell runs on
    std::string instance_file;     // source = file: first record with num_arms == K
    std::uint64_t master_seed{0};
    std::size_t threads{0};  // 0 = hardware concurrency
    std::string output_path;
};

inline void validate_experiment(const ExperimentConfig& cfg) {
    if (cfg.etas.empty()) throw InvalidArgument("grid: eta list is empty");
    if (cfg.arms.empty()) throw InvalidArgument("grid: arms list is empty");
    if (cfg.horizons.empty()) throw InvalidArgument("grid: horizon list is empty");
    if (cfg.agents.empty()) throw InvalidArgument("grid: agent list is empty");
    if (cfg.seeds_per_cell < 1) throw InvalidArgument("seeds_per_cell must be at least 1");
    if (!(cfg.confidence_delta > 0.0 && cfg.confidence_delta < 1.0))
        throw InvalidArgument("confidence_delta must lie in (0,1)");
    if (cfg.instance_source == InstanceSource::fast_family && cfg.noise.kind != NoiseKind::unit_gaussian)
        throw InvalidArgument("the fast family is defined with unit Gaussian noise only");
    if (cfg.instance_source == InstanceSource::file && cfg.instance_file.empty())
        throw InvalidArgument("instance_source = file needs instance_file");
}

// INI layout:
//   [grid]  eta = 1, 1e6   arms = 8   horizon = 4096, 16384   agents = kl_ucb
//   [run]   seeds_per_cell, noise, confidence_delta, instance_source,
//           family_member, instance_file, seed, threads, output_path
inline ExperimentConfig parse_experiment_config(std::istream& in) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }
    ExperimentConfig cfg;
    auto str = [&](const char* path) { return tree.get_optional<std::string>(path); };
    auto to_u64 = [](const std::string& s, const char* what) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return static_cast<std::uint64_t>(v);
        } catch (const std::logic_error&) {
            throw InvalidArgument(std::string("config: bad integer for ") + what + ": '" + s + "'");
        }
    };
    if (auto v = str("grid.eta")) cfg.etas = parse_double_list(*v);
    if (auto v = str("grid.arms"))
        for (const auto& w : parse_word_list(*v)) cfg.arms.push_back(to_u64(w, "arms"));
    if (auto v = str("grid.horizon"))
        for (const auto& w : parse_word_list(*v)) cfg.horizons.push_back(to_u64(w, "horizon"));
    if (auto v = str("grid.agents"))
        for (const auto& w : parse_word_list(*v)) cfg.agents.push_back(parse_agent_kind(w));
    if (auto v = str("run.seeds_per_cell")) cfg.seeds_per_cell = to_u64(*v, "seeds_per_cell");
    if (auto v = str("run.noise")) cfg.noise.kind = parse_noise_kind(*v);
    if (auto v = str("run.confidence_delta")) {
        const auto d = parse_double_list(*v);
        if (d.size() != 1) throw InvalidArgument("config: confidence_delta must be a single number");
        cfg.confidence_delta = d[0];
    }
    if (auto v = str("run.instance_source")) cfg.instance_source = parse_instance_source(*v);
    if (auto v = str("run.family_member")) cfg.family_member = to_u64(*v, "family_member");
    if (auto v = str("run.seed")) cfg.master_seed = to_u64(*v, "seed");
    if (auto v = str("run.threads")) cfg.threads = to_u64(*v, "threads");
    if (auto v = str("run.output_path")) cfg.output_path = *v;
    if (auto v = str("run.instance_file")) cfg.instance_file = *v;
    return cfg;
}

struct SweepRow {
    double eta{0.0};
    std::size_t num_arms{0};
    std::uint64_t horizon{0};
    AgentKind agent{AgentKind::kl_ucb};
    double mean_regret{0.0};
    double stderr_regret{0.0};
    double optimism_failure_rate{0.0};
    double regime_threshold{0.0};  // sqrt(T/K)
    std::string error;             // empty unless the cell failed
    std::vector<double> mean_regret_curve;
};

inline bool operator<(const SweepRow& a, const SweepRow& b) {
    return std::tuple(a.eta, a.num_arms, a.horizon, to_string(a.agent)) <
           std::tuple(b.eta, b.num_arms, b.horizon, to_string(b.agent));
}

inline std::vector<std::uint64_t> cell_seeds(std::uint64_t master, std::size_t count) {
    std::vector<std::uint64_t> s(count);
    for (std::size_t i = 0; i < count; ++i) s[i] = derive_seed(master, i);
    return s;
}

// Instance for one (cell, seed). Random instances depend only on (master, K)
// so every eta/T/agent sees the same means; fast-family cells draw a fresh
// prior sample per seed, which turns the cell mean into a Bayes regret.
inline BanditInstance cell_instance(const ExperimentConfig& cfg, double eta, std::size_t k, std::uint64_t horizon,
                                    std::uint64_t run_seed, const std::vector<BanditInstance>& loaded = {}) {
    switch (cfg.instance_source) {
        case InstanceSource::file:
            for (const auto& inst : loaded)
                if (inst.num_arms == k) return BanditInstance::make(inst.means, eta, inst.reference, horizon);
            throw InvalidArgument("instance file has no record with num_arms = " + std::to_string(k));
        case InstanceSource::random: return random_instance(k, eta, horizon, derive_seed(cfg.master_seed, k));
        case InstanceSource::slow_family: {
            auto fam = slow_hard_family(k, horizon, eta);
            if (cfg.family_member >= fam.instances.size())
                throw InvalidArgument("family_member out of range for K = " + std::to_string(k));
            return std::move(fam.instances[cfg.family_member]);
        }
        case InstanceSource::fast_family:
            return fast_family_sample(k, eta, horizon, derive_seed(run_seed, 0xBA7E5)).instance;
    }
    throw InvalidArgument("unknown instance source");
}

struct RunOutcome {
    double final_regret{0.0};
    bool violated{false};
    std::vector<double> curve;
};

// Mean / standard error / failure rate / mean curve over per-seed outcomes,
// reduced in seed order.
inline void reduce_outcomes(const std::vector<RunOutcome>& outs, SweepRow& row) {
    const auto n = static_cast<double>(outs.size());
    double sum = 0.0;
    std::size_t fails = 0;
    row.mean_regret_curve.assign(outs.empty() ? 0 : outs.front().curve.size(), 0.0);
    for (const auto& o : outs) {
        sum += o.final_regret;
        fails += o.violated;
        for (std::size_t t = 0; t < o.curve.size() && t < row.mean_regret_curve.size(); ++t)
            row.mean_regret_curve[t] += o.curve[t];
    }
    for (auto& v : row.mean_regret_curve) v /= n;
    row.mean_regret = sum / n;
    double ss = 0.0;
    for (const auto& o : outs) ss += (o.final_regret - row.mean_regret) * (o.final_regret - row.mean_regret);
    row.stderr_regret = outs.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
    row.optimism_failure_rate = static_cast<double>(fails) / n;
}

// One row per grid cell, sorted by (eta, K, T, agent). Cells and seeds run as
// one flat parallel job list; a failing cell becomes an error row.
inline std::vector<SweepRow> regime_sweep(const ExperimentConfig& cfg, bool keep_curves = false) {
    validate_experiment(cfg);
    std::vector<SweepRow> rows;
    for (double eta : cfg.etas)
        for (std::size_t k : cfg.arms)
            for (std::uint64_t horizon : cfg.horizons)
                for (AgentKind agent : cfg.agents) {
                    SweepRow r;
                    r.eta = eta;
                    r.num_arms = k;
                    r.horizon = horizon;
                    r.agent = agent;
                    r.regime_threshold = std::sqrt(static_cast<double>(horizon) / static_cast<double>(k));
                    rows.push_back(std::move(r));
                }

    std::vector<BanditInstance> loaded;
    if (cfg.instance_source == InstanceSource::file) {
        std::ifstream f(cfg.instance_file);
        if (!f) throw Error("cannot read instance file '" + cfg.instance_file + "'");
        loaded = read_instances(f);
    }
    const auto seeds = cell_seeds(cfg.master_seed, cfg.seeds_per_cell);
    const std::size_t per_cell = seeds.size();
    std::vector<RunOutcome> outcomes(rows.size() * per_cell);
    auto errors = parallel_for(outcomes.size(), cfg.threads, [&](std::size_t job) {
        const SweepRow& row = rows[job / per_cell];
        const std::uint64_t seed = seeds[job % per_cell];
        const auto inst = cell_instance(cfg, row.eta, row.num_arms, row.horizon, seed, loaded);
        RunConfig rc;
        rc.seed = seed;
        rc.confidence_delta = cfg.confidence_delta;
        auto rec = run(inst, row.agent, rc, cfg.noise);
        RunOutcome& out = outcomes[job];
        out.final_regret = rec.final_regret();
        out.violated = rec.optimism_violated;
        if (keep_curves) out.curve = std::move(rec.regret_curve);
    });

    for (std::size_t c = 0; c < rows.size(); ++c) {
        for (std::size_t s = 0; s < per_cell && rows[c].error.empty(); ++s) {
            if (auto& e = errors[c * per_cell + s]) {
                try {
                    std::rethrow_exception(e);
                } catch (const std::exception& ex) {
                    rows[c].error = "seed " + std::to_string(seeds[s]) + ": " + ex.what();
                }
            }
        }
        if (!rows[c].error.empty()) continue;
        std::vector<RunOutcome> cell(outcomes.begin() + static_cast<std::ptrdiff_t>(c * per_cell),
                                     outcomes.begin() + static_cast<std::ptrdiff_t>((c + 1) * per_cell));
        reduce_outcomes(cell, rows[c]);
    }
    std::stable_sort(rows.begin(), rows.end());
    return rows;
}

inline constexpr const char* kSweepCsvHeader =
    "eta,K,T,agent,mean_regret,stderr,optimism_failure_rate,regime_threshold,error";

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << kSweepCsvHeader << '\n';
    for (const auto& r : rows) {
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        out << format_double(r.eta) << ',' << r.num_arms << ',' << r.horizon << ',' << to_string(r.agent) << ',';
        if (r.error.empty())
            out << format_double(r.mean_regret) << ',' << format_double(r.stderr_regret) << ','
                << format_double(r.optimism_failure_rate);
        else
            out << ",,";
        out << ',' << format_double(r.regime_threshold) << ',' << err << '\n';
    }
}

// Reads rows written by write_sweep_csv (curves are not part of the file).
inline std::vector<SweepRow> read_sweep_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InvalidArgument("summary CSV is empty");
    if (line.rfind("eta,K,T,agent,mean_regret", 0) != 0) throw InvalidArgument("summary CSV has an unexpected header");
    std::vector<SweepRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string cur;
        for (char ch : line) {
            if (ch == ',') {
                f.push_back(cur);
                cur.clear();
            } else {
                cur += ch;
            }
        }
        f.push_back(cur);
        if (f.size() < 8) throw InvalidArgument("summary CSV line " + std::to_string(lineno) + " is short");
        SweepRow r;
        try {
            r.eta = std::stod(f[0]);
            r.num_arms = std::stoull(f[1]);
            r.horizon = std::stoull(f[2]);
            r.agent = parse_agent_kind(f[3]);
            r.error = f.size() > 8 ? f[8] : "";
            if (r.error.empty()) {
                r.mean_regret = std::stod(f[4]);
                r.stderr_regret = std::stod(f[5]);
                r.optimism_failure_rate = std::stod(f[6]);
            }
            r.regime_threshold = std::stod(f[7]);
        } catch (const std::logic_error&) {
            throw InvalidArgument("summary CSV line " + std::to_string(lineno) + " is malformed");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

enum class ScalingModel { logsq, sqrt };

inline std::string_view to_string(ScalingModel m) { return m == ScalingModel::logsq ? "logsq" : "sqrt"; }

struct ScalingFit {
    double c_logsq{0.0};
    double c_sqrt{0.0};
    double resid_logsq{0.0};
    double resid_sqrt{0.0};
    ScalingModel better_model{ScalingModel::sqrt};
};

// No-intercept least squares for regret ~ a log^2 T and regret ~ b sqrt T.
// Ties go to sqrt.
inline ScalingFit scaling_fit(std::span<const std::pair<double, double>> series) {
    std::set<double> distinct;
    for (const auto& [t, y] : series) {
        if (!(t >= 1.0)) throw InvalidArgument("scaling_fit: horizons must be >= 1");
        distinct.insert(t);
    }
    if (distinct.size() < 3) throw InvalidArgument("scaling_fit: need at least 3 distinct T values");
    double num_l = 0, den_l = 0, num_s = 0, den_s = 0;
    for (const auto& [t, y] : series) {
        const double l2 = std::log(t) * std::log(t);
        num_l += y * l2;
        den_l += l2 * l2;
        num_s += y * std::sqrt(t);
        den_s += t;
    }
    ScalingFit fit;
    fit.c_logsq = den_l > 0 ? num_l / den_l : 0.0;
    fit.c_sqrt = num_s / den_s;
    for (const auto& [t, y] : series) {
        const double el = y - fit.c_logsq * std::log(t) * std::log(t);
        const double es = y - fit.c_sqrt * std::sqrt(t);
        fit.resid_logsq += el * el;
        fit.resid_sqrt += es * es;
    }
    fit.better_model = fit.resid_logsq < fit.resid_sqrt ? ScalingModel::logsq : ScalingModel::sqrt;
    return fit;
}

struct GroupFit {
    double eta{0.0};
    std::size_t num_arms{0};
    AgentKind agent{AgentKind::kl_ucb};
    std::size_t points{0};
    std::optional<ScalingFit> fit;  // empty when fewer than 3 distinct T
};

// Fits each (eta, K, agent) group of a summary table over its T values.
inline std::vector<GroupFit> fit_sweep_rows(const std::vector<SweepRow>& rows) {
    std::map<std::tuple<double, std::size_t, std::string>, std::vector<std::pair<double, double>>> groups;
    for (const auto& r : rows) {
        if (!r.error.empty()) continue;
        groups[{r.eta, r.num_arms, std::string(to_string(r.agent))}].emplace_back(static_cast<double>(r.horizon),
                                                                                   r.mean_regret);
    }
    std::vector<GroupFit> out;
    for (const auto& [key, series] : groups) {
        GroupFit g;
        g.eta = std::get<0>(key);
        g.num_arms = std::get<1>(key);
        g.agent = parse_agent_kind(std::get<2>(key));
        g.points = series.size();
        std::set<double> distinct;
        for (const auto& p : series) distinct.insert(p.first);
        if (distinct.size() >= 3) g.fit = scaling_fit(series);
        out.push_back(std::move(g));
    }
    return out;
}

struct BayesRegret {
    double mean{0.0};
    double stderr_{0.0};
    std::vector<double> per_sample;  // per prior sample, averaged over its seeds
};

// kl_ucb on instances drawn from the fast family's uniform prior.
inline BayesRegret bayes_regret_fast_family(std::size_t num_arms, double eta, std::uint64_t horizon,
                                            std::size_t prior_samples, std::size_t seeds_per_sample,
                                            std::uint64_t master_seed, std::size_t threads = 0,
                                            double confidence_delta = kDefaultConfidenceDelta) {
    require_fast_regime(num_arms, eta, horizon);
    if (prior_samples < 1 || seeds_per_sample < 1) throw InvalidArgument("need at least one sample and one seed");
    const std::size_t jobs = prior_samples * seeds_per_sample;
    std::vector<double> finals(jobs);
    auto errors = parallel_for(jobs, threads, [&](std::size_t job) {
        const std::size_t sample = job / seeds_per_sample;
        const std::size_t rep = job % seeds_per_sample;
        const auto fam = fast_family_sample(num_arms, eta, horizon, derive_seed(master_seed, sample));
        RunConfig rc;
        rc.seed = derive_seed(derive_seed(master_seed, sample), 0x5EED0000ULL + rep);
        rc.confidence_delta = confidence_delta;
        finals[job] = run(fam.instance, AgentKind::kl_ucb, rc, NoiseModel{NoiseKind::unit_gaussian}).final_regret();
    });
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    BayesRegret out;
    out.per_sample.assign(prior_samples, 0.0);
    for (std::size_t j = 0; j < jobs; ++j) out.per_sample[j / seeds_per_sample] += finals[j];
    for (auto& v : out.per_sample) v /= static_cast<double>(seeds_per_sample);
    const auto n = static_cast<double>(prior_samples);
    for (double v : out.per_sample) out.mean += v;
    out.mean /= n;
    if (prior_samples > 1) {
        double ss = 0.0;
        for (double v : out.per_sample) ss += (v - out.mean) * (v - out.mean);
        out.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    return out;
}

}  // namespace klbandit
