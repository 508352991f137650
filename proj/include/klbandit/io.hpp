// io.hpp
// Text formats:
//   * instance records: INI sections [instance_N] with keys num_arms, means,
//     eta, reference, horizon (vectors space-separated, doubles at %.17g so
//     a write/read cycle is exact). Extra keys are ignored on read.
//   * per-step run CSV:  step,action,reward,cum_regret
//   * per-seed batch CSV: seed,final_regret,optimism_violated
//   * regret-curve SVG (optional plot output).
#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "klbandit/core.hpp"
#include "klbandit/simulator.hpp"

namespace klbandit {

inline std::string format_double(double v, int digits = 17) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

inline std::vector<double> parse_double_list(const std::string& text) {
    std::string s = text;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream in(s);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw InvalidArgument("cannot parse number '" + tok + "'");
        }
    }
    return out;
}

inline std::vector<std::string> parse_word_list(const std::string& text) {
    std::string s = text;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

struct InstanceRecord {
    BanditInstance instance;
    std::vector<std::pair<std::string, std::string>> extras;  // annotations such as family, delta
};

inline void write_instance(std::ostream& out, const BanditInstance& inst, std::size_t index,
                           const std::vector<std::pair<std::string, std::string>>& extras = {}) {
    auto join = [](std::span<const double> v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += ' ';
            s += format_double(v[i]);
        }
        return s;
    };
    out << "[instance_" << index << "]\n";
    out << "num_arms = " << inst.num_arms << '\n';
    out << "means = " << join(inst.means) << '\n';
    out << "eta = " << format_double(inst.eta) << '\n';
    out << "reference = " << join(inst.reference.probs()) << '\n';
    out << "horizon = " << inst.horizon << '\n';
    for (const auto& [k, v] : extras) out << k << " = " << v << '\n';
    out << '\n';
}

inline void write_instances(std::ostream& out, const std::vector<InstanceRecord>& records) {
    for (std::size_t i = 0; i < records.size(); ++i) write_instance(out, records[i].instance, i, records[i].extras);
}

// Reads every [instance_*] section in file order.
inline std::vector<BanditInstance> read_instances(std::istream& in) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw InvalidArgument(std::string("instance file: ") + e.what());
    }
    std::vector<BanditInstance> out;
    for (const auto& [name, sec] : tree) {
        if (name.rfind("instance", 0) != 0) continue;
        auto get = [&](const char* key) {
            auto v = sec.get_optional<std::string>(key);
            if (!v) throw InvalidArgument("instance section '" + name + "' lacks key '" + key + "'");
            return *v;
        };
        BanditInstance inst;
        try {
            inst.num_arms = std::stoull(get("num_arms"));
            inst.eta = std::stod(get("eta"));
            inst.horizon = std::stoull(get("horizon"));
        } catch (const std::logic_error&) {
            throw InvalidArgument("instance section '" + name + "' has a malformed scalar");
        }
        inst.means = parse_double_list(get("means"));
        inst.reference = Policy::from_probs(parse_double_list(get("reference")));
        validate_instance(inst);
        out.push_back(std::move(inst));
    }
    return out;
}

inline void write_run_csv(std::ostream& out, const RunRecord& rec) {
    out << "step,action,reward,cum_regret\n";
    for (std::size_t t = 0; t < rec.actions.size(); ++t) {
        out << (t + 1) << ',' << rec.actions[t] << ',' << format_double(rec.rewards[t]) << ','
            << format_double(rec.regret_curve[t]) << '\n';
    }
}

inline void write_batch_csv(std::ostream& out, const BatchSummary& s) {
    out << "seed,final_regret,optimism_violated\n";
    for (std::size_t i = 0; i < s.per_seed_final.size(); ++i)
        out << s.seeds[i] << ',' << format_double(s.per_seed_final[i]) << ',' << (s.per_seed_violated[i] ? 1 : 0)
            << '\n';
}

struct CurveSeries {
    std::string label;
    std::vector<double> curve;
};

// Self-contained SVG with one polyline per series, linear axes.
inline void write_regret_svg(std::ostream& out, const std::vector<CurveSeries>& series,
                             const std::string& title = "cumulative regret") {
    const double w = 800, h = 500, ml = 70, mr = 200, mt = 40, mb = 50;
    std::size_t max_len = 1;
    double max_y = 0.0;
    for (const auto& s : series) {
        max_len = std::max(max_len, s.curve.size());
        for (double v : s.curve) max_y = std::max(max_y, v);
    }
    if (max_y <= 0.0) max_y = 1.0;
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    const double pw = w - ml - mr, ph = h - mt - mb;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << ml << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\"" << mt + ph
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << h - 12
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">t (max " << max_len
        << ")</text>\n";
    out << "<text x=\"" << 8 << "\" y=\"" << mt + 10 << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << format_double(max_y, 4) << "</text>\n";
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& c = series[si].curve;
        const char* color = colors[si % 10];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        const std::size_t stride = std::max<std::size_t>(1, c.size() / 1000);
        for (std::size_t t = 0; t < c.size(); t += stride) {
            const double x = ml + pw * static_cast<double>(t + 1) / static_cast<double>(max_len);
            const double y = mt + ph * (1.0 - c[t] / max_y);
            out << format_double(x, 6) << ',' << format_double(y, 6) << ' ';
        }
        out << "\"/>\n";
        out << "<text x=\"" << ml + pw + 10 << "\" y=\"" << mt + 16 * (si + 1) << "\" fill=\"" << color
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << series[si].label << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace klbandit
