#ifndef TWISTLAB_CONFIG_HPP
#define TWISTLAB_CONFIG_HPP

#include <string>
#include <vector>

#include "twistlab/report.hpp"

namespace twistlab {

struct GeometryConfig {
    std::string shape = "ellipse"; // ellipse | rectangle | disc
    double a = 0.7;
    double b = 0.5;
    double h = 0.05;
    double beta = 3.0;
    double R = 1.0;
    double L = 16.0;
    double h3 = 0.125;
};

struct SolverConfig {
    double cg_tol = 1e-10;
    double dt_cap = 0.05;
    double dt_frac = 0.05;
    int rannacher_halfsteps = 4;
    int lanczos_modes = 12;
};

struct ExperimentConfig {
    double t_min = 1.0;
    double t_max = 64.0;
    double time_ratio = 1.4142135623730951;
    std::vector<double> source_x3 = {0.0, 2.0, 6.0};
    unsigned seed = 7;
    long mc_paths = 200000;
    double mc_delta = 0.01;
    int trials = 100;
};

struct RunConfig {
    GeometryConfig geometry;
    SolverConfig solver;
    ExperimentConfig experiment;
    std::string output_dir = "out";

    std::string to_json() const;
    static RunConfig from_json(const std::string& text);
    static RunConfig load(const std::string& path);
    /// FNV-1a hash of the canonical serialization, hex-encoded.
    std::string hash() const;
};

/// 12-significant-digit CSV with a header row.
void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows,
               const std::string& provenance);

void write_report_json(const std::string& path, const ExperimentReport& rep);

/// Plain-text plot data plus a renderer-agnostic command script.
void emit_plot_data(const std::string& stem, const ExperimentReport& rep);

} // namespace twistlab

#endif
