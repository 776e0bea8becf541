#include "twistlab/config.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace twistlab {

using nlohmann::json;

std::string RunConfig::to_json() const {
    json j;
    j["geometry"] = {{"shape", geometry.shape}, {"a", geometry.a}, {"b", geometry.b},
                     {"h", geometry.h},         {"beta", geometry.beta},
                     {"R", geometry.R},         {"L", geometry.L},
                     {"h3", geometry.h3}};
    j["solver"] = {{"cg_tol", solver.cg_tol},
                   {"dt_cap", solver.dt_cap},
                   {"dt_frac", solver.dt_frac},
                   {"rannacher_halfsteps", solver.rannacher_halfsteps},
                   {"lanczos_modes", solver.lanczos_modes}};
    j["experiment"] = {{"t_min", experiment.t_min},
                       {"t_max", experiment.t_max},
                       {"time_ratio", experiment.time_ratio},
                       {"source_x3", experiment.source_x3},
                       {"seed", experiment.seed},
                       {"mc_paths", experiment.mc_paths},
                       {"mc_delta", experiment.mc_delta},
                       {"trials", experiment.trials}};
    j["output_dir"] = output_dir;
    return j.dump(2);
}

RunConfig RunConfig::from_json(const std::string& text) {
    json j = json::parse(text);
    RunConfig c;
    if (j.contains("geometry")) {
        const auto& g = j["geometry"];
        c.geometry.shape = g.value("shape", c.geometry.shape);
        c.geometry.a = g.value("a", c.geometry.a);
        c.geometry.b = g.value("b", c.geometry.b);
        c.geometry.h = g.value("h", c.geometry.h);
        c.geometry.beta = g.value("beta", c.geometry.beta);
        c.geometry.R = g.value("R", c.geometry.R);
        c.geometry.L = g.value("L", c.geometry.L);
        c.geometry.h3 = g.value("h3", c.geometry.h3);
    }
    if (j.contains("solver")) {
        const auto& s = j["solver"];
        c.solver.cg_tol = s.value("cg_tol", c.solver.cg_tol);
        c.solver.dt_cap = s.value("dt_cap", c.solver.dt_cap);
        c.solver.dt_frac = s.value("dt_frac", c.solver.dt_frac);
        c.solver.rannacher_halfsteps =
            s.value("rannacher_halfsteps", c.solver.rannacher_halfsteps);
        c.solver.lanczos_modes = s.value("lanczos_modes", c.solver.lanczos_modes);
    }
    if (j.contains("experiment")) {
        const auto& e = j["experiment"];
        c.experiment.t_min = e.value("t_min", c.experiment.t_min);
        c.experiment.t_max = e.value("t_max", c.experiment.t_max);
        c.experiment.time_ratio = e.value("time_ratio", c.experiment.time_ratio);
        c.experiment.source_x3 =
            e.value("source_x3", c.experiment.source_x3);
        c.experiment.seed = e.value("seed", c.experiment.seed);
        c.experiment.mc_paths = e.value("mc_paths", c.experiment.mc_paths);
        c.experiment.mc_delta = e.value("mc_delta", c.experiment.mc_delta);
        c.experiment.trials = e.value("trials", c.experiment.trials);
    }
    c.output_dir = j.value("output_dir", c.output_dir);
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return from_json(text);
}

std::string RunConfig::hash() const {
    std::string s = to_json();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows,
               const std::string& provenance) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    if (!provenance.empty()) out << "# " << provenance << "\n";
    for (std::size_t k = 0; k < columns.size(); ++k)
        out << columns[k] << (k + 1 < columns.size() ? "," : "\n");
    char buf[32];
    for (const auto& row : rows) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.12g", row[k]);
            out << buf << (k + 1 < row.size() ? "," : "\n");
        }
    }
}

void write_report_json(const std::string& path, const ExperimentReport& rep) {
    json j;
    j["tag"] = rep.tag;
    j["provenance"] = rep.provenance;
    j["exponents"] = rep.exponents;
    j["exponent_cis"] = rep.exponent_cis;
    j["envelopes"] = rep.envelopes;
    j["flags"] = rep.flags;
    j["all_pass"] = rep.all_pass();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << j.dump(2) << "\n";
}

void emit_plot_data(const std::string& stem, const ExperimentReport& rep) {
    write_csv(stem + ".dat", rep.columns, rep.samples, rep.provenance);
    std::ofstream out(stem + ".plot");
    if (!out) throw std::runtime_error("cannot open output file: " + stem + ".plot");
    if (rep.samples.empty())
        out << "# warning: empty report, no data\n";
    out << "# log-log plot commands for " << rep.tag << "\n";
    out << "set logscale xy\n";
    out << "plot '" << stem << ".dat' using 1:3 with linespoints\n";
    for (auto& [name, slope] : rep.exponents)
        out << "# fitted " << name << " = " << slope << "\n";
    out << "# reference slopes\n";
    out << "replot x**(-0.5) title 't^{-1/2}'\n";
    out << "replot x**(-1.5) title 't^{-3/2}'\n";
    for (auto& [name, c] : rep.envelopes)
        out << "# envelope " << name << " = " << c << "\n";
}

} // namespace twistlab
