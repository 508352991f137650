// klbandit command line: run, sweep, instances, verify, fit.
// Exit status: 0 ok, 1 check failure or runtime error, 2 usage error.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "klbandit/klbandit.hpp"

using namespace klbandit;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Writes to the file at `path`, or stdout when it is empty or "-".
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (path.empty() || path == "-") return;
        file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
        if (!*file_) throw Error("cannot open '" + path + "' for writing");
        path_ = path;
    }
    std::ostream& get() { return file_ ? *file_ : std::cout; }
    void close() {
        if (!file_) {
            std::cout.flush();
            return;
        }
        file_->close();
        if (!*file_) throw Error("write to '" + path_ + "' failed");
    }

private:
    std::unique_ptr<std::ofstream> file_;
    std::string path_;
};

InstanceSource parse_family(const std::string& s) {
    try {
        return parse_instance_source(s);
    } catch (const InvalidArgument&) {
        throw UsageError("--family must be random, slow, fast or file");
    }
}

void write_plot(const std::string& path, const std::vector<CurveSeries>& series) {
    if (path.empty()) return;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    write_regret_svg(f, series);
}

struct RunOpts {
    double eta{1.0};
    std::size_t arms{8};
    std::uint64_t horizon{1000};
    std::string agent{"kl_ucb"};
    std::uint64_t seed{0};
    double delta{kDefaultConfidenceDelta};
    std::string noise{"unit_gaussian"};
    std::string family{"random"};
    std::size_t member{0};
    std::string in;
    std::string out;
    std::string plot;
};

int cmd_run(const RunOpts& o) {
    BanditInstance inst;
    const auto src = parse_family(o.family);
    NoiseModel noise{parse_noise_kind(o.noise)};
    if (!o.in.empty()) {
        std::ifstream f(o.in);
        if (!f) throw UsageError("cannot read '" + o.in + "'");
        auto all = read_instances(f);
        if (o.member >= all.size()) throw UsageError("--member out of range for " + o.in);
        inst = std::move(all[o.member]);
    } else if (src == InstanceSource::file) {
        throw UsageError("--family file needs --in");
    } else if (src == InstanceSource::fast_family) {
        if (noise.kind != NoiseKind::unit_gaussian) throw UsageError("the fast family only runs with unit_gaussian noise");
        inst = fast_family_sample(o.arms, o.eta, o.horizon, o.seed).instance;
    } else if (src == InstanceSource::slow_family) {
        auto fam = slow_hard_family(o.arms, o.horizon, o.eta);
        for (const auto& w : fam.warnings) std::cerr << "warning: " << w << '\n';
        if (o.member >= fam.instances.size()) throw UsageError("--member out of range");
        inst = std::move(fam.instances[o.member]);
    } else {
        inst = random_instance(o.arms, o.eta, o.horizon, derive_seed(o.seed, o.arms));
    }
    for (const auto& w : validate_instance(inst).warnings) std::cerr << "warning: " << w << '\n';

    RunConfig rc;
    rc.seed = o.seed;
    rc.confidence_delta = o.delta;
    const auto rec = run(inst, parse_agent_kind(o.agent), rc, noise);
    Sink sink(o.out);
    write_run_csv(sink.get(), rec);
    sink.close();
    write_plot(o.plot, {{o.agent, rec.regret_curve}});
    std::cerr << "final regret " << format_double(rec.final_regret(), 8) << ", optimism "
              << (rec.optimism_violated ? "violated" : "held") << '\n';
    return kOk;
}

struct SweepOpts {
    std::string config;
    std::vector<double> etas;
    std::vector<std::size_t> arms;
    std::vector<std::uint64_t> horizons;
    std::vector<std::string> agents;
    std::size_t seeds{0};
    std::uint64_t seed{0};
    double delta{0.0};
    std::string noise;
    std::string family;
    std::size_t member{0};
    std::string in;
    std::size_t threads{0};
    std::string out;
    std::string plot;
};

int cmd_sweep(const SweepOpts& o, const CLI::App& sub) {
    ExperimentConfig cfg;
    if (!o.config.empty()) {
        std::ifstream f(o.config);
        if (!f) throw UsageError("cannot read config '" + o.config + "'");
        cfg = parse_experiment_config(f);
    }
    // Flags given on the command line override the config file.
    auto given = [&](const char* name) { return sub.count(name) > 0; };
    if (given("--eta")) cfg.etas = o.etas;
    if (given("--arms")) cfg.arms = o.arms;
    if (given("--horizon")) cfg.horizons = o.horizons;
    if (given("--agent")) {
        cfg.agents.clear();
        for (const auto& a : o.agents) cfg.agents.push_back(parse_agent_kind(a));
    }
    if (given("--seeds")) cfg.seeds_per_cell = o.seeds;
    if (given("--seed")) cfg.master_seed = o.seed;
    if (given("--delta")) cfg.confidence_delta = o.delta;
    if (given("--noise")) cfg.noise.kind = parse_noise_kind(o.noise);
    if (given("--family")) cfg.instance_source = parse_family(o.family);
    if (given("--member")) cfg.family_member = o.member;
    if (given("--in")) {
        cfg.instance_file = o.in;
        if (!given("--family")) cfg.instance_source = InstanceSource::file;
    }
    if (given("--threads")) cfg.threads = o.threads;
    if (given("--out")) cfg.output_path = o.out;
    if (cfg.agents.empty()) cfg.agents.push_back(AgentKind::kl_ucb);
    if (cfg.instance_source == InstanceSource::fast_family && cfg.noise.kind != NoiseKind::unit_gaussian)
        throw UsageError("the fast family only runs with unit_gaussian noise");
    validate_experiment(cfg);

    const auto rows = regime_sweep(cfg, !o.plot.empty());
    Sink sink(cfg.output_path);
    write_sweep_csv(sink.get(), rows);
    sink.close();
    if (!o.plot.empty()) {
        std::vector<CurveSeries> series;
        for (const auto& r : rows) {
            if (!r.error.empty()) continue;
            series.push_back({std::string(to_string(r.agent)) + " eta=" + format_double(r.eta, 4) +
                                  " K=" + std::to_string(r.num_arms) + " T=" + std::to_string(r.horizon),
                              r.mean_regret_curve});
        }
        write_plot(o.plot, series);
    }
    std::size_t errors = 0;
    for (const auto& r : rows) errors += !r.error.empty();
    if (errors) std::cerr << errors << " cell(s) failed; see the error column\n";
    return errors ? kCheckFailed : kOk;
}

struct InstancesOpts {
    std::string family{"slow"};
    std::size_t arms{9};
    std::uint64_t horizon{1000};
    double eta{1.0};
    std::uint64_t seed{0};
    std::size_t count{1};
    std::string out;
};

int cmd_instances(const InstancesOpts& o) {
    std::vector<InstanceRecord> recs;
    switch (parse_family(o.family)) {
        case InstanceSource::slow_family: {
            auto fam = slow_hard_family(o.arms, o.horizon, o.eta);
            for (const auto& w : fam.warnings) std::cerr << "warning: " << w << '\n';
            for (auto& inst : fam.instances)
                recs.push_back({std::move(inst), {{"family", "slow"}, {"delta", format_double(fam.delta)}}});
            break;
        }
        case InstanceSource::fast_family:
            for (std::size_t i = 0; i < o.count; ++i) {
                auto s = fast_family_sample(o.arms, o.eta, o.horizon, derive_seed(o.seed, i));
                std::string signs;
                for (int m : s.mu) signs += (signs.empty() ? "" : " ") + std::to_string(m);
                recs.push_back({std::move(s.instance),
                                {{"family", "fast"},
                                 {"alpha", format_double(s.alpha)},
                                 {"delta_t", format_double(s.delta_t)},
                                 {"signs", signs},
                                 {"noise", "unit_gaussian"}}});
            }
            break;
        case InstanceSource::random:
            for (std::size_t i = 0; i < o.count; ++i)
                recs.push_back({random_instance(o.arms, o.eta, o.horizon, derive_seed(o.seed, i)), {{"family", "random"}}});
            break;
        case InstanceSource::file:
            throw UsageError("instances generates families; use slow, fast or random");
    }
    Sink sink(o.out);
    write_instances(sink.get(), recs);
    sink.close();
    return kOk;
}

int cmd_verify(std::uint64_t seed) {
    const auto rows = run_oracle_suite(seed);
    bool ok = true;
    std::printf("%-42s %6s %8s %12s  %s\n", "check", "cases", "failed", "worst", "note");
    for (const auto& r : rows) {
        std::printf("%-42s %6zu %8zu %12.4g  %s%s\n", r.name.c_str(), r.cases, r.failures, r.worst,
                    r.passed() ? "PASS " : "FAIL ", r.note.c_str());
        ok = ok && r.passed();
    }
    return ok ? kOk : kCheckFailed;
}

int cmd_fit(const std::string& in) {
    std::ifstream f(in);
    if (!f) throw UsageError("cannot read '" + in + "'");
    const auto groups = fit_sweep_rows(read_sweep_csv(f));
    std::printf("%-12s %4s %-20s %6s %14s %14s %14s %14s %s\n", "eta", "K", "agent", "points", "c_logsq", "c_sqrt",
                "resid_logsq", "resid_sqrt", "better");
    for (const auto& g : groups) {
        std::printf("%-12s %4zu %-20s %6zu ", format_double(g.eta, 6).c_str(), g.num_arms,
                    std::string(to_string(g.agent)).c_str(), g.points);
        if (!g.fit) {
            std::printf("%14s %14s %14s %14s %s\n", "-", "-", "-", "-", "(need 3 distinct T)");
            continue;
        }
        std::printf("%14.6g %14.6g %14.6g %14.6g %s\n", g.fit->c_logsq, g.fit->c_sqrt, g.fit->resid_logsq,
                    g.fit->resid_sqrt, std::string(to_string(g.fit->better_model)).c_str());
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"KL-regularized bandit simulator and experiment harness"};
    app.require_subcommand(1);

    RunOpts ro;
    auto* run_cmd = app.add_subcommand("run", "single run, per-step CSV");
    run_cmd->add_option("--eta", ro.eta, "inverse temperature")->capture_default_str();
    run_cmd->add_option("--arms", ro.arms, "number of arms (K; the fast family doubles it)")->capture_default_str();
    run_cmd->add_option("--horizon", ro.horizon, "rounds T")->capture_default_str();
    run_cmd->add_option("--agent", ro.agent, "kl_ucb | reference_only | greedy_softmax | classic_ucb_argmax")
        ->capture_default_str();
    run_cmd->add_option("--seed", ro.seed, "run seed")->capture_default_str();
    run_cmd->add_option("--delta", ro.delta, "confidence parameter")->capture_default_str();
    run_cmd->add_option("--noise", ro.noise, "unit_gaussian | bernoulli | none")->capture_default_str();
    run_cmd->add_option("--family", ro.family, "random | slow | fast | file")->capture_default_str();
    run_cmd->add_option("--member", ro.member, "instance index within the family or --in file");
    run_cmd->add_option("--in", ro.in, "instance file (overrides --family)");
    run_cmd->add_option("--out", ro.out, "CSV path (default stdout)");
    run_cmd->add_option("--plot", ro.plot, "SVG regret-curve path");

    SweepOpts so;
    auto* sweep_cmd = app.add_subcommand("sweep", "grid sweep, summary CSV");
    sweep_cmd->add_option("--config", so.config, "INI file with [grid] and [run] sections");
    sweep_cmd->add_option("--eta", so.etas, "eta values")->delimiter(',');
    sweep_cmd->add_option("--arms", so.arms, "K values")->delimiter(',');
    sweep_cmd->add_option("--horizon", so.horizons, "T values")->delimiter(',');
    sweep_cmd->add_option("--agent", so.agents, "agents")->delimiter(',');
    sweep_cmd->add_option("--seeds", so.seeds, "seeds per cell");
    sweep_cmd->add_option("--seed", so.seed, "master seed");
    sweep_cmd->add_option("--delta", so.delta, "confidence parameter");
    sweep_cmd->add_option("--noise", so.noise, "unit_gaussian | bernoulli | none");
    sweep_cmd->add_option("--family", so.family, "random | slow | fast | file");
    sweep_cmd->add_option("--in", so.in, "instance file for --family file (one record per K)");
    sweep_cmd->add_option("--member", so.member, "slow-family instance index");
    sweep_cmd->add_option("--threads", so.threads, "worker threads (0 = all cores)");
    sweep_cmd->add_option("--out", so.out, "CSV path (default stdout)");
    sweep_cmd->add_option("--plot", so.plot, "SVG of mean regret curves");

    InstancesOpts io;
    auto* inst_cmd = app.add_subcommand("instances", "emit generated instance families");
    inst_cmd->add_option("--family", io.family, "slow | fast | random")->capture_default_str();
    inst_cmd->add_option("--arms", io.arms, "K")->capture_default_str();
    inst_cmd->add_option("--horizon", io.horizon, "T")->capture_default_str();
    inst_cmd->add_option("--eta", io.eta, "inverse temperature")->capture_default_str();
    inst_cmd->add_option("--seed", io.seed, "seed for sampled families")->capture_default_str();
    inst_cmd->add_option("--count", io.count, "samples for fast/random")->capture_default_str();
    inst_cmd->add_option("--out", io.out, "output path (default stdout)");

    std::uint64_t verify_seed = 0;
    auto* verify_cmd = app.add_subcommand("verify", "run the oracle checks");
    verify_cmd->add_option("--seed", verify_seed, "sweep seed")->capture_default_str();

    std::string fit_in;
    auto* fit_cmd = app.add_subcommand("fit", "fit log^2 T and sqrt T models to a sweep CSV");
    fit_cmd->add_option("--in", fit_in, "summary CSV from sweep")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*run_cmd) return cmd_run(ro);
        if (*sweep_cmd) return cmd_sweep(so, *sweep_cmd);
        if (*inst_cmd) return cmd_instances(io);
        if (*verify_cmd) return cmd_verify(verify_seed);
        if (*fit_cmd) return cmd_fit(fit_in);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const PreconditionFailed& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kCheckFailed;
    }
    return kUsage;
}
