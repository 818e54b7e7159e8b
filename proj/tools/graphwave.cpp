#include "graphwave/commands.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <cstdlib>
#include <iostream>
#include <string>

namespace {

void apply_thread_cap() {
    const char* env = std::getenv("GRAPHWAVE_THREADS");
    if (env == nullptr) return;
    try {
        const int n = std::stoi(env);
        if (n >= 1) omp_set_num_threads(n);
    } catch (const std::exception&) {
        std::cerr << "graphwave: ignoring GRAPHWAVE_THREADS='" << env << "'\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    apply_thread_cap();

    CLI::App app{"Wave equations on metric graphs with local Kelvin-Voigt damping"};
    app.require_subcommand(1);
    app.set_version_flag("--version", GRAPHWAVE_VERSION);

    std::string spec_path;
    std::string out_dir = "out";
    std::optional<std::string> validate_out;

    auto* validate = app.add_subcommand("validate", "check hypotheses and predict the decay regime");
    validate->add_option("spec", spec_path, "network JSON")->required();
    validate->add_option("--out", validate_out, "directory for validation.json and the manifest");

    graphwave::SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "Crank-Nicolson run with energy trace and decay fit");
    simulate->add_option("spec", spec_path, "network JSON")->required();
    simulate->add_option("--cells", sim.cells, "uniform cells per edge");
    simulate->add_option("--dt", sim.dt, "time step (default: half the smallest cell)");
    simulate->add_option("--T", sim.T, "final time (default 50, or 200 for a power fit)");
    simulate->add_option("--u0", sim.u0, "initial displacement: modes, zero or a JSON file");
    simulate->add_option("--v0", sim.v0, "initial velocity: modes, zero or a JSON file");
    simulate->add_option("--fit", sim.fit, "auto, exponential, power or none")
        ->check(CLI::IsMember({"auto", "exponential", "power", "none"}));
    simulate->add_option("--t0", sim.t0, "fit window start (default T/10)");
    simulate->add_option("--t1", sim.t1, "fit window end (default T)");
    simulate->add_option("--sample-every", sim.sample_every, "record every k-th step")->check(CLI::PositiveNumber);
    simulate->add_option("--out", out_dir, "output directory");

    graphwave::SpectrumOptions spec_opts;
    auto* spectrum = app.add_subcommand("spectrum", "all eigenvalues of the discrete generator");
    spectrum->add_option("spec", spec_path, "network JSON")->required();
    spectrum->add_option("--cells", spec_opts.cells, "uniform cells per edge");
    spectrum->add_flag("--dump-matrices", spec_opts.dump_matrices, "write M, K, Ka as MatrixMarket");
    spectrum->add_option("--out", out_dir, "output directory");

    graphwave::ResolventOptions res;
    auto* resolvent = app.add_subcommand("resolvent", "resolvent norm scan along the imaginary axis");
    resolvent->add_option("spec", spec_path, "network JSON")->required();
    resolvent->add_option("--cells", res.cells, "uniform cells per edge");
    resolvent->add_option("--beta-min", res.beta_min, "lower end (default beta-max / 10)");
    resolvent->add_option("--beta-max", res.beta_max, "upper end (default: resolved band limit)");
    resolvent->add_option("--points", res.points, "grid points")->check(CLI::Range(4, 100000));
    resolvent->add_option("--out", out_dir, "output directory");

    graphwave::ReportOptions rep;
    auto* report = app.add_subcommand("report", "predicted vs measured regime");
    report->add_option("spec", spec_path, "network JSON")->required();
    report->add_option("--cells", rep.cells, "uniform cells per edge");
    report->add_option("--T", rep.T, "final time of the decay run");
    report->add_option("--points", rep.points, "resolvent grid points")->check(CLI::Range(4, 100000));
    report->add_flag("--refine", rep.refine, "repeat the scan on a doubled mesh");
    report->add_option("--out-dir,--out", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : graphwave::exit_parse_error;
    }

    if (*validate) return graphwave::cmd_validate(spec_path, validate_out, std::cout, std::cerr);
    if (*simulate) return graphwave::cmd_simulate(spec_path, sim, out_dir, std::cout, std::cerr);
    if (*spectrum) return graphwave::cmd_spectrum(spec_path, spec_opts, out_dir, std::cout, std::cerr);
    if (*resolvent) return graphwave::cmd_resolvent(spec_path, res, out_dir, std::cout, std::cerr);
    return graphwave::cmd_report(spec_path, rep, out_dir, std::cout, std::cerr);
}
