#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "twistlab/config.hpp"
#include "twistlab/experiments.hpp"
#include "twistlab/greens.hpp"
#include "twistlab/montecarlo.hpp"
#include "twistlab/nash.hpp"
#include "twistlab/variational.hpp"

using namespace twistlab;
namespace fs = std::filesystem;

namespace {

ShapeDescriptor shape_of(const RunConfig& cfg) {
    ShapeDescriptor s;
    if (cfg.geometry.shape == "ellipse")
        s.kind = ShapeKind::Ellipse;
    else if (cfg.geometry.shape == "rectangle" || cfg.geometry.shape == "square")
        s.kind = ShapeKind::Rectangle;
    else if (cfg.geometry.shape == "disc")
        s.kind = ShapeKind::Disc;
    else
        throw std::invalid_argument("unknown shape: " + cfg.geometry.shape);
    s.a = cfg.geometry.a;
    s.b = cfg.geometry.b;
    return s;
}

EvolveOptions evolve_opts(const RunConfig& cfg) {
    EvolveOptions o;
    o.dt_cap = cfg.solver.dt_cap;
    o.dt_frac = cfg.solver.dt_frac;
    o.cg_tol = cfg.solver.cg_tol;
    o.rannacher_halfsteps = cfg.solver.rannacher_halfsteps;
    return o;
}

struct Lab {
    RunConfig cfg;
    ShapeDescriptor shape;
    CrossSection cs;
    TwistProfile tw;
    SpMat lap2d;
    EigenBasis2D basis;

    explicit Lab(const RunConfig& c, bool twisted_mode)
        : cfg(c),
          shape(shape_of(c)),
          cs(shape, c.geometry.h, twisted_mode),
          tw(c.geometry.beta, c.geometry.R),
          lap2d(assemble_lap2d(cs)),
          basis(eigenpairs_2d(lap2d, cs, c.solver.lanczos_modes + 1,
                              c.experiment.seed)) {}

    TubeGrid grid() const { return TubeGrid(cs, cfg.geometry.L, cfg.geometry.h3); }
    std::string provenance() const {
        return "config=" + cfg.hash() + " h=" + std::to_string(cfg.geometry.h) +
               " h3=" + std::to_string(cfg.geometry.h3) +
               " L=" + std::to_string(cfg.geometry.L) +
               " beta=" + std::to_string(cfg.geometry.beta) +
               " seed=" + std::to_string(cfg.experiment.seed);
    }
};

std::vector<double> config_times(const RunConfig& cfg) {
    return geometric_times(cfg.experiment.t_min, cfg.experiment.t_max,
                           cfg.experiment.time_ratio);
}

int finish(const RunConfig& cfg, ExperimentReport& rep, const std::string& name,
           const Lab& lab) {
    rep.provenance = lab.provenance();
    fs::create_directories(cfg.output_dir);
    write_csv(cfg.output_dir + "/" + name + ".csv", rep.columns, rep.samples,
              rep.provenance);
    write_report_json(cfg.output_dir + "/" + name + ".json", rep);
    emit_plot_data(cfg.output_dir + "/" + name, rep);
    std::cout << name << (rep.all_pass() ? ": pass" : ": FAIL") << "\n";
    return rep.all_pass() ? 0 : 1;
}

int cmd_eigen(const RunConfig& cfg) {
    Lab lab(cfg, false);
    ExperimentReport rep;
    rep.tag = "eigen";
    rep.columns = {"j", "E_j"};
    for (int j = 0; j < lab.basis.m; ++j)
        rep.add_row({static_cast<double>(j + 1), lab.basis.values[j]});
    double hopf = hopf_ratio_check(lab.basis.vectors.col(0), lab.cs);
    rep.envelopes["hopf_ratio"] = hopf;
    rep.flags["ground_simple"] = lab.basis.ground_simple;
    rep.flags["hopf_finite"] = std::isfinite(hopf);
    return finish(cfg, rep, "eigen", lab);
}

int cmd_kernel1d(const RunConfig& cfg) {
    Lab lab(cfg, false);
    Grid1D g1(cfg.geometry.L, cfg.geometry.h3);
    GroundStates gs = ground_states(lab.tw, g1);
    Kernel1D k1(lab.tw, g1);
    std::vector<double> times = config_times(cfg);
    RatioEnvelope env = kernel1d_envelope_check(k1, gs.g0, times, {0.0, 1.0, 3.0});
    ExperimentReport rep;
    rep.tag = "kernel1d";
    rep.columns = {"c_emp", "slope", "slope_ci"};
    rep.add_row({env.c_emp, env.slope, env.slope_ci});
    rep.envelopes["c_emp"] = env.c_emp;
    rep.exponents["slope"] = env.slope;
    rep.flags["envelope_finite"] = std::isfinite(env.c_emp) && env.c_emp > 0;
    return finish(cfg, rep, "kernel1d", lab);
}

int cmd_refkernel(const RunConfig& cfg) {
    Lab lab(cfg, cfg.geometry.beta != 0.0);
    TubeGrid grid = lab.grid();
    Grid1D g1(cfg.geometry.L, cfg.geometry.h3);
    GroundStates gs = ground_states(lab.tw, g1);
    Kernel1D k1(lab.tw, g1);
    WeightField w0 = weight_field(grid, lab.basis, gs.g0, 0);
    std::vector<std::int64_t> nodes;
    for (double z : cfg.experiment.source_x3) nodes.push_back(grid.node_near(z));
    ExperimentReport rep =
        ref_envelope_check(grid, lab.basis, k1, w0, !lab.tw.is_straight(),
                           config_times(cfg), nodes, cfg.solver.lanczos_modes);
    rep.flags["envelope_finite"] = true;
    if (rep.envelopes.count("c_emp"))
        rep.flags["envelope_finite"] = std::isfinite(rep.envelopes["c_emp"]);
    return finish(cfg, rep, "refkernel", lab);
}

int cmd_kernel3d(const RunConfig& cfg) {
    Lab lab(cfg, cfg.geometry.beta != 0.0);
    TubeGrid grid = lab.grid();
    TwistedOperator op(grid, lab.tw, lab.basis);
    std::vector<std::int64_t> sources;
    for (double z : cfg.experiment.source_x3) sources.push_back(grid.node_near(z));
    ExperimentReport rep =
        envelope_check_main(op, sources, config_times(cfg), evolve_opts(cfg));
    if (rep.exponents.count("slope")) {
        double target = lab.tw.is_straight() ? -0.5 : -1.5;
        double tol = lab.tw.is_straight() ? 0.1 : 0.15;
        rep.flags["slope_in_range"] = std::abs(rep.exponents["slope"] - target) <= tol;
    }
    rep.flags["envelope_finite"] = std::isfinite(rep.envelopes["c_emp"]);
    return finish(cfg, rep, "kernel3d", lab);
}

int cmd_greens(const RunConfig& cfg) {
    Lab lab(cfg, true);
    TubeGrid grid = lab.grid();
    TwistedOperator op(grid, lab.tw, lab.basis);
    SpMat refm = reference_shifted_matrix(grid, lab.tw, lab.basis);
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    std::int64_t y0 = grid.node_near(0.0);
    for (double z : {-6.0, -2.0, 2.0, 6.0}) pairs.emplace_back(grid.node_near(z), y0);
    ExperimentReport rep = green_ratio_check(op.shifted_matrix(), refm, grid, pairs);
    rep.flags["ratio_finite"] = std::isfinite(rep.envelopes["C_emp"]);
    return finish(cfg, rep, "greens", lab);
}

int cmd_nash(const RunConfig& cfg) {
    Lab lab(cfg, false);
    XiScalingResult res = xi_scaling_check({0.5, 2.0, 8.0}, {1.0, 4.0, 16.0, 64.0},
                                           geometric_times(1e-3, 1e3, 1.2));
    ExperimentReport rep;
    rep.tag = "nash";
    rep.columns = {"kappa", "C_xi", "C_vartheta"};
    for (auto& [kappa, c] : res.C_xi)
        rep.add_row({kappa, c, res.C_vartheta.at(kappa)});
    rep.flags["kappa_uniform"] = res.pass;
    return finish(cfg, rep, "nash", lab);
}

int cmd_hardy(const RunConfig& cfg) {
    Lab lab(cfg, cfg.geometry.beta != 0.0);
    TubeGrid grid = lab.grid();
    TwistedOperator op(grid, lab.tw, lab.basis);
    ExperimentReport rep;
    rep.tag = "hardy";
    rep.columns = {"weight", "c_emp"};
    if (!lab.tw.is_straight()) {
        double c1 = hardy_constant(op, HardyWeight::ThetaDotSq);
        rep.add_row({0.0, c1});
        rep.envelopes["c_thetadot"] = c1;
        rep.flags["thetadot_positive"] = c1 > 0.0;
    }
    double c2 = hardy_constant(op, HardyWeight::InverseOneX3Sq);
    rep.add_row({1.0, c2});
    rep.envelopes["c_poly"] = c2;
    if (!lab.tw.is_straight()) rep.flags["poly_positive"] = c2 > 0.0;
    return finish(cfg, rep, "hardy", lab);
}

Vec default_bump(const TubeGrid& grid, double halfwidth, double center) {
    Vec V = Vec::Zero(grid.n_nodes());
    for (std::int64_t k = 0; k < grid.n_nodes(); ++k)
        if (std::abs(grid.x3_of(k) - center) <= halfwidth) V[k] = 1.0;
    return V;
}

int cmd_spectral(const RunConfig& cfg) {
    Lab lab(cfg, cfg.geometry.beta != 0.0);
    TubeGrid grid = lab.grid();
    TwistedOperator op(grid, lab.tw, lab.basis);
    Vec V = default_bump(grid, 1.0, 0.0);
    ExperimentReport rep = lieb_bound_check(op, V, {0.5, 1.0, 2.0, 4.0, 8.0});
    rep.flags["L_emp_finite"] = std::isfinite(rep.envelopes["L_emp"]);
    return finish(cfg, rep, "spectral", lab);
}

int cmd_sobolev(const RunConfig& cfg, double p) {
    Lab lab(cfg, cfg.geometry.beta != 0.0);
    TubeGrid grid = lab.grid();
    TwistedOperator op(grid, lab.tw, lab.basis);
    Grid1D g1(cfg.geometry.L, cfg.geometry.h3);
    GroundStates gs = ground_states(lab.tw, g1);
    WeightField w0 = weight_field(grid, lab.basis, gs.g0, 0);
    ExperimentReport rep = sobolev_check(op, w0, p, cfg.experiment.trials,
                                         cfg.experiment.seed);
    if (!lab.tw.is_straight())
        rep.flags["C_p_positive"] = rep.envelopes["C_p_emp"] > 0.0;
    return finish(cfg, rep, "sobolev", lab);
}

int cmd_mc(const RunConfig& cfg) {
    Lab lab(cfg, cfg.geometry.beta != 0.0);
    ExperimentReport rep;
    rep.tag = "mc";
    rep.columns = {"t", "p_hat", "stderr", "khat"};
    for (double t : config_times(cfg)) {
        if (t > 16.0) break; // variance budget
        BridgeEstimate est = survival_probability(
            lab.shape, lab.tw, {0.0, 0.0, 0.0}, t, cfg.experiment.mc_paths,
            cfg.experiment.mc_delta, cfg.experiment.seed);
        rep.add_row({t, est.p_hat, est.stderr_, est.khat(lab.basis.E1())});
    }
    rep.flags["nonempty"] = !rep.samples.empty();
    return finish(cfg, rep, "mc", lab);
}

int cmd_report(const RunConfig& cfg) {
    nlohmann::json summary;
    bool all = true;
    int count = 0;
    if (fs::exists(cfg.output_dir))
        for (const auto& ent : fs::directory_iterator(cfg.output_dir)) {
            if (ent.path().extension() != ".json") continue;
            if (ent.path().filename() == "summary.json") continue;
            std::ifstream in(ent.path());
            nlohmann::json j = nlohmann::json::parse(in);
            if (!j.contains("all_pass")) continue;
            summary[ent.path().stem().string()] = j;
            all = all && j["all_pass"].get<bool>();
            ++count;
        }
    summary["all_pass"] = all;
    summary["report_count"] = count;
    fs::create_directories(cfg.output_dir);
    std::ofstream out(cfg.output_dir + "/summary.json");
    out << summary.dump(2) << "\n";
    std::cout << "aggregated " << count << " reports: "
              << (all ? "pass" : "FAIL") << "\n";
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for heat kernels of twisted tubes"};
    app.require_subcommand(1);

    std::string config_path;
    RunConfig cfg;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--shape", cfg.geometry.shape, "ellipse|rectangle|square|disc");
    auto* oa = app.add_option("--a", cfg.geometry.a, "cross-section semi-axis a");
    auto* ob = app.add_option("--b", cfg.geometry.b, "cross-section semi-axis b");
    auto* oh = app.add_option("--h", cfg.geometry.h, "cross-section spacing");
    auto* obeta = app.add_option("--beta", cfg.geometry.beta, "twist amplitude");
    auto* oR = app.add_option("--R", cfg.geometry.R, "twist support half-width");
    auto* oL = app.add_option("--L", cfg.geometry.L, "tube half-length");
    auto* oh3 = app.add_option("--h3", cfg.geometry.h3, "longitudinal spacing");
    auto* oseed = app.add_option("--seed", cfg.experiment.seed, "RNG seed");
    auto* otmin = app.add_option("--t-min", cfg.experiment.t_min, "first sample time");
    auto* otmax = app.add_option("--t-max", cfg.experiment.t_max, "last sample time");
    auto* opaths = app.add_option("--paths", cfg.experiment.mc_paths, "MC path count");
    auto* odelta = app.add_option("--delta", cfg.experiment.mc_delta, "MC resolution");
    auto* oout = app.add_option("--out", cfg.output_dir, "output directory");
    double p = 4.0;
    auto* shape_opt = app.get_option("--shape");

    auto* c_eigen = app.add_subcommand("eigen", "cross-section eigenpairs");
    auto* c_k1 = app.add_subcommand("kernel1d", "1D kernel envelope");
    auto* c_ref = app.add_subcommand("refkernel", "tensor reference kernel envelope");
    auto* c_k3 = app.add_subcommand("kernel3d", "twisted kernel diagonal envelope");
    auto* c_gr = app.add_subcommand("greens", "Green function equivalence");
    auto* c_nash = app.add_subcommand("nash", "rate-function scaling checks");
    auto* c_hardy = app.add_subcommand("hardy", "Hardy constants");
    auto* c_spec = app.add_subcommand("spectral", "eigenvalue counting bound");
    auto* c_sob = app.add_subcommand("sobolev", "weighted Sobolev inequality");
    c_sob->add_option("--p", p, "exponent p in [2,6]");
    auto* c_mc = app.add_subcommand("mc", "Brownian-bridge survival estimates");
    auto* c_rep = app.add_subcommand("report", "aggregate JSON reports");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (!config_path.empty()) {
            RunConfig loaded = RunConfig::load(config_path);
            // command-line overrides win over the file
            auto keep = [&](CLI::Option* o) { return o->count() > 0; };
            if (!keep(shape_opt)) cfg.geometry.shape = loaded.geometry.shape;
            if (!keep(oa)) cfg.geometry.a = loaded.geometry.a;
            if (!keep(ob)) cfg.geometry.b = loaded.geometry.b;
            if (!keep(oh)) cfg.geometry.h = loaded.geometry.h;
            if (!keep(obeta)) cfg.geometry.beta = loaded.geometry.beta;
            if (!keep(oR)) cfg.geometry.R = loaded.geometry.R;
            if (!keep(oL)) cfg.geometry.L = loaded.geometry.L;
            if (!keep(oh3)) cfg.geometry.h3 = loaded.geometry.h3;
            if (!keep(oseed)) cfg.experiment.seed = loaded.experiment.seed;
            if (!keep(otmin)) cfg.experiment.t_min = loaded.experiment.t_min;
            if (!keep(otmax)) cfg.experiment.t_max = loaded.experiment.t_max;
            if (!keep(opaths)) cfg.experiment.mc_paths = loaded.experiment.mc_paths;
            if (!keep(odelta)) cfg.experiment.mc_delta = loaded.experiment.mc_delta;
            if (!keep(oout)) cfg.output_dir = loaded.output_dir;
            cfg.solver = loaded.solver;
            cfg.experiment.source_x3 = loaded.experiment.source_x3;
            cfg.experiment.trials = loaded.experiment.trials;
        }
        if (cfg.geometry.shape == "square") {
            cfg.geometry.shape = "rectangle";
            if (oa->count() == 0) cfg.geometry.a = 0.5; // unit square default
            cfg.geometry.b = cfg.geometry.a;
        }

        if (c_eigen->parsed()) return cmd_eigen(cfg);
        if (c_k1->parsed()) return cmd_kernel1d(cfg);
        if (c_ref->parsed()) return cmd_refkernel(cfg);
        if (c_k3->parsed()) return cmd_kernel3d(cfg);
        if (c_gr->parsed()) return cmd_greens(cfg);
        if (c_nash->parsed()) return cmd_nash(cfg);
        if (c_hardy->parsed()) return cmd_hardy(cfg);
        if (c_spec->parsed()) return cmd_spectral(cfg);
        if (c_sob->parsed()) return cmd_sobolev(cfg, p);
        if (c_mc->parsed()) return cmd_mc(cfg);
        if (c_rep->parsed()) return cmd_report(cfg);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
