#include "mfgq/errors.hpp"
#include "mfgq/harness.hpp"
#include "mfgq/stepper.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

namespace {

using namespace mfgq;
using json = nlohmann::json;

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct Common {
    std::string selection = "smooth";
    std::size_t k = 1;
    std::optional<double> lambda;
    std::optional<double> radius;
    double horizon = 1.0;
    std::vector<std::string> sets;
    bool serial = false;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--selection", c.selection, "perstep | meanfield | smooth | fixed:M")->capture_default_str();
    app->add_option("--k", c.k, "compression period")->capture_default_str();
    app->add_option("--lambda", c.lambda, "lambda in the radius and selection rules");
    app->add_option("--radius", c.radius, "support radius R, overrides the lambda rule");
    app->add_option("--t", c.horizon, "final time")->capture_default_str();
    app->add_option("--set", c.sets, "model parameter override key=value (repeatable)");
    app->add_flag("--serial", c.serial, "use the serial reference kernels");
}

ParameterMap parse_sets(const std::vector<std::string>& sets) {
    ParameterMap out;
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw ValidationError("--set expects key=value, got " + s);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s.substr(eq + 1), &used);
        } catch (const std::exception&) {
            throw ValidationError("--set value is not a number: " + s);
        }
        if (used != s.size() - eq - 1) throw ValidationError("--set value is not a number: " + s);
        out[s.substr(0, eq)] = v;
    }
    return out;
}

StepperConfig make_config(const Common& c, double dt) {
    StepperConfig cfg;
    cfg.dt = dt;
    cfg.horizon = c.horizon;
    cfg.compression_period = c.k;
    cfg.selection = Selection::parse(c.selection);
    cfg.lambda = c.lambda;
    cfg.radius_override = c.radius;
    cfg.exec = c.serial ? Exec::Serial : Exec::Parallel;
    return cfg;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot open " + path);
    return os;
}

void print_slopes(const ConvergenceReport& report) {
    std::ostringstream os;
    write_slopes_csv(os, report);
    std::cout << os.str();
}

void write_outputs(const ConvergenceReport& report, const std::string& out, const std::string& slopes,
                   const std::string& svg, bool wall_time, bool against_work) {
    if (!out.empty()) {
        auto os = open_out(out);
        write_report_csv(os, report, wall_time);
    }
    if (!slopes.empty()) {
        auto os = open_out(slopes);
        write_slopes_csv(os, report);
    }
    if (!svg.empty()) {
        auto os = open_out(svg);
        const Observable o = report.rows.empty() ? Observable::Mean : report.rows.front().observable;
        write_svg_chart(os, error_series(report, o, against_work), report.model + " " + to_string(o),
                        against_work ? "work" : "dt", report.relative_errors ? "relative error" : "error");
    }
}

struct RunArgs {
    std::string model;
    std::string scheme = "gq1";
    double dt = 0.01;
    std::string out, diagnostics, pdf_out;
    std::size_t pdf_points = 401;
};

int cmd_run(const RunArgs& a, const Common& c) {
    const auto problem = builtin(a.model, parse_sets(c.sets));
    const Scheme scheme = parse_scheme(a.scheme);
    StepperConfig cfg = make_config(c, a.dt);
    cfg.order = scheme == Scheme::GQ1 ? 1 : 2;
    if (!cfg.radius_override && problem.radius_hint) cfg.radius_override = problem.radius_hint;
    cfg.validate();
    const auto q0 = initial_measure(problem.initial, problem.model.domain);

    const auto t0 = std::chrono::steady_clock::now();
    const auto run = run_scheme(problem.model, q0, cfg, scheme);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (!a.out.empty()) {
        auto os = open_out(a.out);
        write_csv(os, run.measure);
    }
    if (!a.diagnostics.empty()) {
        auto os = open_out(a.diagnostics);
        write_diagnostics_csv(os, run.diagnostics);
    }
    if (!a.pdf_out.empty()) {
        if (run.measure.is_signed()) throw SignedMeasureError();
        auto os = open_out(a.pdf_out);
        double lo = run.measure.points().front(), hi = run.measure.points().back();
        if (problem.model.domain.is_circle()) lo = 0.0, hi = problem.model.domain.period;
        if (!(hi > lo)) lo -= 1.0, hi += 1.0;
        write_density_csv(os, run.measure, lo, hi, a.pdf_points);
    }

    std::size_t max_m = 0;
    for (const auto& d : run.diagnostics) max_m = d.compressed ? std::max(max_m, d.m) : max_m;
    json summary{{"model", a.model},
                 {"scheme", to_string(scheme)},
                 {"dt", cfg.dt},
                 {"t", cfg.horizon},
                 {"selection", cfg.selection.to_string()},
                 {"steps", cfg.steps()},
                 {"points", run.measure.size()},
                 {"max_m", max_m},
                 {"mass", run.measure.total_mass()},
                 {"mean", expectation(run.measure, [](double x) { return x; })},
                 {"second_moment", expectation(run.measure, [](double x) { return x * x; })},
                 {"work", run.work},
                 {"sum_m3", run.sum_m_cubed},
                 {"wall_time", wall},
                 {"parameters", problem.parameters}};
    std::cout << summary.dump(2) << '\n';
    return 0;
}

std::vector<double> dyadic(int from, int to) {
    std::vector<double> out;
    for (int e = from; e <= to; ++e) out.push_back(std::ldexp(1.0, -e));
    return out;
}

struct ConvArgs {
    std::string model;
    std::vector<std::string> schemes{"gq1", "gq1e", "gq2"};
    std::vector<double> dt_grid;
    std::vector<std::string> observables;
    bool relative = false;
    std::string out, slopes, svg;
    bool no_wall_time = false;
};

int cmd_convergence(const ConvArgs& a, const Common& c) {
    const auto problem = builtin(a.model, parse_sets(c.sets));
    ConvergenceOptions opt;
    opt.dt_grid = a.dt_grid.empty() ? dyadic(3, 9) : a.dt_grid;
    opt.schemes.clear();
    for (const auto& s : a.schemes) opt.schemes.push_back(parse_scheme(s));
    if (!a.observables.empty()) {
        opt.observables.clear();
        for (const auto& o : a.observables) opt.observables.push_back(parse_observable(o));
    } else if (problem.model.domain.is_circle()) {
        opt.observables = {Observable::Sin, Observable::Sin2};
    }
    if (!problem.model.factored) std::erase(opt.schemes, Scheme::GQ2);
    opt.base = make_config(c, opt.dt_grid.front());
    opt.relative_slopes = a.relative;
    const auto report = run_convergence(problem, opt);
    write_outputs(report, a.out, a.slopes, a.svg, !a.no_wall_time, false);
    print_slopes(report);
    return 0;
}

struct MlmcArgs {
    std::uint64_t seed = MlmcOptions{}.seed;
    std::vector<double> dt_grid;
    std::vector<double> tolerances{0.04, 0.02, 0.01, 0.005, 0.0025, 0.00125};
    std::size_t replicates = 10;
    std::string out, slopes, svg;
    bool no_wall_time = false;
};

int cmd_compare_mlmc(const MlmcArgs& a, const Common& c) {
    MlmcComparisonOptions opt;
    opt.dt_grid = a.dt_grid.empty() ? dyadic(5, 11) : a.dt_grid;
    opt.tolerances = a.tolerances;
    opt.base = make_config(c, opt.dt_grid.front());
    opt.mlmc.seed = a.seed;
    opt.mlmc.replicates = a.replicates;
    opt.mlmc.exec = opt.base.exec;
    const auto report = compare_mlmc(opt, parse_sets(c.sets));
    write_outputs(report, a.out, a.slopes, a.svg, !a.no_wall_time, true);
    print_slopes(report);
    return 0;
}

struct BurgersArgs {
    double dt = 3e-4;
    double ell = 1e-3;
    std::string scheme = "gq1e";
    std::string out;
};

int cmd_burgers(const BurgersArgs& a, const Common& c) {
    const auto r = run_burgers(a.dt, a.ell, parse_scheme(a.scheme), make_config(c, a.dt), parse_sets(c.sets));
    std::ofstream file;
    if (!a.out.empty()) file = open_out(a.out);
    std::ostream& os = a.out.empty() ? std::cout : file;
    os << "dt,ell,l1_error,l1_step_error,n_points,mean_error,second_moment_error\n";
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%zu,%.17g,%.17g\n", r.dt, a.ell, r.l1_error,
                  r.l1_step_error, r.n_points, r.mean_error, r.second_moment_error);
    os << buf;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gauss quadrature time-marching for mean-field SDEs"};
    app.set_config("--config", "", "TOML or INI file; command-line flags take precedence");
    app.require_subcommand(1);

    Common common;
    RunArgs run;
    ConvArgs conv;
    MlmcArgs mlmc;
    BurgersArgs burgers;

    auto* run_cmd = app.add_subcommand("run", "propagate one model to the final time");
    run_cmd->add_option("--model", run.model, "builtin model name")->required();
    run_cmd->add_option("--scheme", run.scheme, "gq1 | gq1e | gq2")->capture_default_str();
    run_cmd->add_option("--dt", run.dt, "time step")->capture_default_str();
    run_cmd->add_option("--out", run.out, "final measure as CSV x,w");
    run_cmd->add_option("--diagnostics", run.diagnostics, "per-step CSV");
    run_cmd->add_option("--pdf-out", run.pdf_out, "density CSV x,cdf,pdf from a monotone cdf spline");
    run_cmd->add_option("--pdf-points", run.pdf_points)->capture_default_str();
    add_common(run_cmd, common);

    auto* conv_cmd = app.add_subcommand("convergence", "error and work against dt, with slope fits");
    conv_cmd->add_option("--model", conv.model, "builtin model name")->required();
    conv_cmd->add_option("--schemes", conv.schemes)->delimiter(',')->capture_default_str();
    conv_cmd->add_option("--dt-grid", conv.dt_grid, "strictly decreasing, default 2^-3..2^-9")->delimiter(',');
    conv_cmd->add_option("--observables", conv.observables, "mean, second_moment, sin, sin2")->delimiter(',');
    conv_cmd->add_flag("--relative", conv.relative, "fit slopes on relative error");
    conv_cmd->add_option("--out", conv.out, "report CSV");
    conv_cmd->add_option("--slopes", conv.slopes, "slopes CSV");
    conv_cmd->add_option("--svg", conv.svg, "log-log chart of the first observable");
    conv_cmd->add_flag("--no-wall-time", conv.no_wall_time, "omit the wall_time column");
    add_common(conv_cmd, common);

    auto* mlmc_cmd = app.add_subcommand("compare-mlmc", "quadrature schemes against MLMC on GBM");
    mlmc_cmd->add_option("--seed", mlmc.seed)->capture_default_str();
    mlmc_cmd->add_option("--dt-grid", mlmc.dt_grid, "default 2^-5..2^-11")->delimiter(',');
    mlmc_cmd->add_option("--tolerances", mlmc.tolerances)->delimiter(',')->capture_default_str();
    mlmc_cmd->add_option("--replicates", mlmc.replicates)->capture_default_str();
    mlmc_cmd->add_option("--out", mlmc.out, "report CSV");
    mlmc_cmd->add_option("--slopes", mlmc.slopes, "slopes CSV");
    mlmc_cmd->add_option("--svg", mlmc.svg, "error against work chart");
    mlmc_cmd->add_flag("--no-wall-time", mlmc.no_wall_time, "omit the wall_time column");
    add_common(mlmc_cmd, common);

    auto* burgers_cmd = app.add_subcommand("burgers", "regularized Burgers model against the exact cdf");
    burgers_cmd->add_option("--dt", burgers.dt)->capture_default_str();
    burgers_cmd->add_option("--ell", burgers.ell)->capture_default_str();
    burgers_cmd->add_option("--scheme", burgers.scheme)->capture_default_str();
    burgers_cmd->add_option("--out", burgers.out, "CSV instead of stdout");
    add_common(burgers_cmd, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (*run_cmd) return cmd_run(run, common);
        if (*conv_cmd) return cmd_convergence(conv, common);
        if (*mlmc_cmd) return cmd_compare_mlmc(mlmc, common);
        if (*burgers_cmd) return cmd_burgers(burgers, common);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitValidation;
}
