// Acceptance suite: one PASS/FAIL line per criterion. Tolerances and time
// budgets are pinned below; the exit status is nonzero if any criterion fails.
#include "graphwave/commands.hpp"
#include "graphwave/damping.hpp"
#include "graphwave/simulate.hpp"
#include "graphwave/spectral.hpp"
#include "support.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace graphwave;
using namespace graphwave::test;
namespace fs = std::filesystem;

namespace {

constexpr double dissipation_tol = 1e-8;       // relative to E(0), per step
constexpr double conservation_tol = 1e-10;     // relative energy drift, undamped
constexpr int cn_steps = 10000;
constexpr double modal_tol = 5e-3;             // relative eigenvalue error
constexpr double stability_margin = -1e-8;     // max Re lambda must be below this
constexpr double condition_limit = 1e12;
constexpr double flat_slope = 0.1;             // |s| for the exponential case
constexpr double exp_r2_min = 0.98;
constexpr double poly_slope_lo = 0.3;
constexpr double poly_slope_hi = 0.7;
constexpr double slope_doubling_tol = 0.15;    // |s(2h) - s(h)| over the common band
constexpr double power_lo = 3.2;
constexpr double power_hi = 4.8;
constexpr double permutation_tol = 1e-13;
constexpr double eigen_match_tol = 1e-10;      // relative to max(1, |lambda|)
constexpr int scan_points = 48;

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* format, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, x);
    return buf;
}

bool within_budget(Clock::time_point t0, double budget, Outcome& o) {
    const double s = since(t0);
    o.detail += "; " + fmt("%.1f s", s) + " (budget " + fmt("%.0f s", budget) + ")";
    return s <= budget;
}

double max_step_residual(const EnergyTrace& trace) {
    double worst = 0.0;
    for (std::size_t k = 1; k < trace.samples.size(); ++k) {
        const auto& a = trace.samples[k - 1];
        const auto& b = trace.samples[k];
        worst = std::max(worst, std::abs((b.E - a.E) / (b.t - a.t) + b.D_mid));
    }
    return worst / trace.samples.front().E;
}

ResolventScan full_band_scan(const DiscreteSystem& sys) {
    const double limit = resolved_band_limit(*sys.mesh);
    return resolvent_scan(sys, limit / 10.0, limit, scan_points);
}

Outcome dissipation_law() {
    Outcome o{true, ""};
    double worst_residual = 0.0;
    double worst_time = 0.0;
    for (const auto& [name, spec] : canonical_networks()) {
        const auto t0 = Clock::now();
        const auto sys = system_for(spec, 64);
        const double dt = default_time_step(*sys.mesh);
        const auto trace = run(sys, undamped_modes_state(sys, 2), dt, cn_steps * dt);
        const double r = max_step_residual(trace);
        const double t = since(t0);
        worst_residual = std::max(worst_residual, r);
        worst_time = std::max(worst_time, t);
        if (trace.samples.size() != cn_steps + 1 || r > dissipation_tol || t > 10.0) {
            o.pass = false;
            o.detail += name + " failed; ";
        }
    }
    o.detail += "max |dE/dt + D_mid| / E0 = " + fmt("%.2e", worst_residual) + ", slowest network " +
                fmt("%.1f s", worst_time);
    return o;
}

Outcome conservation_control() {
    const auto t0 = Clock::now();
    const auto sys = system_for(undamped_string(), 64);
    const double dt = default_time_step(*sys.mesh);
    const auto trace = run(sys, undamped_modes_state(sys, 2), dt, cn_steps * dt);
    const double E0 = trace.samples.front().E;
    double drift = 0.0;
    for (const auto& s : trace.samples) drift = std::max(drift, std::abs(s.E - E0) / E0);
    Outcome o{drift <= conservation_tol, "max |E - E0| / E0 = " + fmt("%.2e", drift)};
    o.pass = within_budget(t0, 5.0, o) && o.pass;
    return o;
}

Outcome spectral_oracle() {
    // a = 0.1 keeps the five lowest modes underdamped; the upper half-plane
    // eigenvalues are compared with the continuum roots of
    // lambda^2 + a mu lambda + mu = 0, mu = (n pi)^2. Underdamped roots have
    // |lambda| = n pi, so they are ordered by modulus: Im alone interleaves
    // the modes (Im lambda_6 < Im lambda_3).
    const auto t0 = Clock::now();
    const double a = 0.1;
    const auto s = eigenvalues(system_for(single_kv_string(a), 128));
    std::vector<Complex> upper;
    for (const auto& l : s.eigenvalues)
        if (l.imag() > 0.0) upper.push_back(l);
    std::sort(upper.begin(), upper.end(), [](Complex x, Complex y) { return std::abs(x) < std::abs(y); });
    double worst = 0.0;
    for (int n = 1; n <= 5 && n <= static_cast<int>(upper.size()); ++n) {
        const double mu = std::pow(n * std::numbers::pi, 2);
        const Complex oracle = (-a * mu + std::sqrt(Complex(a * a * mu * mu - 4.0 * mu, 0.0))) / 2.0;
        worst = std::max(worst, std::abs(upper[static_cast<std::size_t>(n - 1)] - oracle) / std::abs(oracle));
    }
    Outcome o{upper.size() >= 5 && worst <= modal_tol, "max relative error " + fmt("%.2e", worst)};
    o.pass = within_budget(t0, 10.0, o) && o.pass;
    return o;
}

Outcome asymptotic_stability() {
    const auto t0 = Clock::now();
    Outcome o{true, ""};
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& [name, spec] : canonical_networks()) {
        const auto s = eigenvalues(system_for(spec, 64));
        worst = std::max(worst, s.max_real_part());
        if (!(s.max_real_part() < stability_margin)) {
            o.pass = false;
            o.detail += name + " failed; ";
        }
    }
    o.detail += "max Re lambda over networks = " + fmt("%.3e", worst);
    o.pass = within_budget(t0, 30.0, o) && o.pass;
    return o;
}

Outcome well_posedness() {
    const auto t0 = Clock::now();
    Outcome o{true, ""};
    double worst_cond = 0.0;
    double worst_form = -std::numeric_limits<double>::infinity();
    WellPosednessOptions opts;
    opts.samples = 100;
    opts.condition_limit = condition_limit;
    for (const auto& [name, spec] : canonical_networks()) {
        const auto w = check_generator_wellposed(system_for(spec, 64), opts);
        worst_cond = std::max({worst_cond, w.condition_zero, w.condition_one});
        worst_form = std::max(worst_form, w.max_dissipation);
        if (!(w.zero_in_resolvent && w.one_in_resolvent && w.dissipative)) {
            o.pass = false;
            o.detail += name + " failed; ";
        }
    }
    o.detail += "max cond " + fmt("%.2e", worst_cond) + ", max Re<Az,z>/|z|^2 " + fmt("%.2e", worst_form);
    o.pass = within_budget(t0, 5.0, o) && o.pass;
    return o;
}

Outcome exponential_case() {
    const auto t0 = Clock::now();
    const NetworkSpec spec = kv_star_continuous();
    const Network net = build_network(spec);
    const bool hypotheses = check_property_P(net.graph, net.damping).overall &&
                            classify_continuity(net.graph, net.damping).kind == ContinuityCase::I;
    const auto coarse = system_for(spec, 64);
    const auto fine = system_for(spec, 128);
    const double s64 = full_band_scan(coarse).slope;
    const double s128 = full_band_scan(fine).slope;
    const auto trace = run(coarse, undamped_modes_state(coarse, 2), default_time_step(*coarse.mesh), 50.0);
    double r2 = 0.0;
    std::string fit_note;
    try {
        const auto fit = fit_exponential(trace, 5.0, 50.0);
        r2 = fit.r2;
        fit_note = "omega " + fmt("%.3f", fit.rate) + ", r2 " + fmt("%.4f", r2);
    } catch (const Error& e) {
        fit_note = e.what();
    }
    Outcome o;
    o.pass = hypotheses && std::abs(s64) <= flat_slope && std::abs(s128) <= flat_slope && r2 >= exp_r2_min;
    o.detail = std::string(hypotheses ? "(P) and continuity hold" : "hypotheses FAIL") + "; slope s(64) " +
               fmt("%.3f", s64) + ", s(128) " + fmt("%.3f", s128) + " (need |s| <= 0.1); " + fit_note;
    o.pass = within_budget(t0, 120.0, o) && o.pass;
    return o;
}

Outcome polynomial_case() {
    const auto t0 = Clock::now();
    const NetworkSpec spec = elastic_kv_chain();
    const auto coarse = system_for(spec, 64);
    const auto fine = system_for(spec, 128);
    const double limit = resolved_band_limit(*coarse.mesh);
    const double s64 = resolvent_scan(coarse, limit / 10.0, limit, scan_points).slope;
    const double s128_common = resolvent_scan(fine, limit / 10.0, limit, scan_points).slope;
    const double s128 = full_band_scan(fine).slope;
    const auto trace = run(coarse, undamped_modes_state(coarse, 2), default_time_step(*coarse.mesh), 200.0);
    double p = 0.0;
    std::string fit_note;
    try {
        const auto fit = fit_power(trace, 20.0, 200.0);
        p = fit.rate;
        fit_note = "p " + fmt("%.2f", p) + " (r2 " + fmt("%.3f", fit.r2) + ")";
    } catch (const Error& e) {
        fit_note = e.what();
    }
    auto in_band = [](double s) { return s >= poly_slope_lo && s <= poly_slope_hi; };
    Outcome o;
    o.pass = in_band(s64) && in_band(s128_common) && in_band(s128) &&
             std::abs(s128_common - s64) <= slope_doubling_tol && p >= power_lo && p <= power_hi;
    o.detail = "slope s(64) " + fmt("%.3f", s64) + ", s(128) on the same band " + fmt("%.3f", s128_common) +
               ", s(128) full band " + fmt("%.3f", s128) + "; " + fit_note;
    o.pass = within_budget(t0, 300.0, o) && o.pass;
    return o;
}

Outcome property_checker() {
    const auto t0 = Clock::now();
    GraphSpec chain;
    chain.vertices = {{"R", true, true}, {"O", false, false}, {"E", true, false}};
    chain.edges = {{"p", "R", "O", 1.0}, {"c", "O", "E", 1.0}};
    const auto g = build_graph(chain);
    auto lin = [](double slope) { return DampingProfile::piecewise({0.0, 1.0}, {{0.0, slope}}); };
    const double v0 =
        check_property_P(g, {DampingProfile::constant(1.0, 1.0), DampingProfile::constant(2.0, 1.0)}).nodes[0].node_value;
    const double v1 = check_property_P(g, {lin(1.0), lin(2.0)}).nodes[0].node_value;
    const double v2 = check_property_P(g, {lin(2.0), lin(1.0)}).nodes[0].node_value;
    bool hand = v0 == 0.0 && v1 == -1.0 && v2 == 1.0;

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int agree = 0;
    for (int trial = 0; trial < 20; ++trial) {
        GraphSpec spec;
        spec.vertices = {{"v0", true, true}, {"v1", false, false}};
        spec.edges = {{"e0", "v0", "v1", 1.0}};
        std::vector<int> degree{1, 1};
        const int extra = 3 + static_cast<int>(u(rng) * 6);
        for (int k = 2; k < 2 + extra; ++k) {
            const int parent = 1 + static_cast<int>(u(rng) * (k - 1));
            const std::string a = "v" + std::to_string(parent);
            const std::string b = "v" + std::to_string(k);
            spec.vertices.push_back({b, false, false});
            if (u(rng) < 0.4)
                spec.edges.push_back({"e" + std::to_string(k), b, a, 0.5 + u(rng)});
            else
                spec.edges.push_back({"e" + std::to_string(k), a, b, 0.5 + u(rng)});
            ++degree[static_cast<std::size_t>(parent)];
            degree.push_back(1);
        }
        for (std::size_t v = 1; v < degree.size(); ++v) spec.vertices[v].dirichlet = degree[v] == 1;
        DampingAssignment declared;
        for (const auto& e : spec.edges)
            declared.push_back(DampingProfile::piecewise({0.0, e.length}, {{1.0 + u(rng), u(rng) - 0.5, 0.2 * u(rng)}}));

        auto tree_spec = spec;
        tree_spec.mode = GraphMode::tree;
        auto graph_spec = spec;
        graph_spec.mode = GraphMode::graph;
        const auto tree = build_graph(tree_spec);
        const auto graph = build_graph(graph_spec);
        DampingAssignment tree_damping;
        for (const auto& e : tree.edges())
            tree_damping.push_back(e.reoriented ? declared[e.id.value].reflected() : declared[e.id.value]);
        const auto pt = check_property_P(tree, tree_damping);
        const auto pg = check_property_P(graph, declared);
        bool same = pt.nodes.size() == pg.nodes.size();
        for (std::size_t i = 0; same && i < pt.nodes.size(); ++i)
            same = pt.nodes[i].vertex == pg.nodes[i].vertex && pt.nodes[i].satisfied == pg.nodes[i].satisfied &&
                   std::abs(pt.nodes[i].node_value - pg.nodes[i].node_value) <= 1e-12;
        agree += same ? 1 : 0;
    }
    Outcome o{hand && agree == 20, "hand examples " + std::string(hand ? "exact" : "WRONG") + " (" +
                                       fmt("%g", v0) + ", " + fmt("%g", v1) + ", " + fmt("%g", v2) +
                                       "); random trees agreeing " + std::to_string(agree) + "/20"};
    o.pass = within_budget(t0, 1.0, o) && o.pass;
    return o;
}

Outcome tree_graph_equivalence() {
    const auto t0 = Clock::now();
    Outcome o{true, ""};
    double worst_matrix = 0.0;
    double worst_eigen = 0.0;
    std::vector<NetworkSpec> trees{three_edge_star(), two_level_tree(), kv_star_continuous()};
    // declare some edges toward the root so that tree mode has to flip them
    std::swap(trees[1].graph.edges[1].from, trees[1].graph.edges[1].to);
    std::swap(trees[1].graph.edges[3].from, trees[1].graph.edges[3].to);
    trees[1].damping[3] = trees[1].damping[3].reflected();
    std::swap(trees[2].graph.edges[0].from, trees[2].graph.edges[0].to);
    trees[2].damping[0] = trees[2].damping[0].reflected();
    for (const auto& tree_spec : trees) {
        auto graph_spec = tree_spec;
        graph_spec.graph.mode = GraphMode::graph;
        const auto a = system_for(tree_spec, 16);
        const auto b = system_for(graph_spec, 16);
        const auto perm = dof_permutation(*a.mesh, *b.mesh);
        if (perm.empty() || a.n() != b.n() || a.K.nonZeros() != b.K.nonZeros() ||
            a.Ka.nonZeros() != b.Ka.nonZeros() || a.M.nonZeros() != b.M.nonZeros()) {
            o.pass = false;
            o.detail += "DOF structure differs; ";
            continue;
        }
        worst_matrix = std::max({worst_matrix, permuted_difference(a.M, b.M, perm),
                                 permuted_difference(a.K, b.K, perm), permuted_difference(a.Ka, b.Ka, perm)});
        const auto ea = eigenvalues(a).eigenvalues;
        const auto eb = eigenvalues(b).eigenvalues;
        for (const auto& l : ea) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& m : eb) best = std::min(best, std::abs(l - m));
            worst_eigen = std::max(worst_eigen, best / std::max(1.0, std::abs(l)));
        }
    }
    o.pass = o.pass && worst_matrix <= permutation_tol && worst_eigen <= eigen_match_tol;
    o.detail += "max permuted matrix difference " + fmt("%.1e", worst_matrix) + ", max eigenvalue mismatch " +
                fmt("%.1e", worst_eigen);
    o.pass = within_budget(t0, 10.0, o) && o.pass;
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
    const auto t0 = Clock::now();
    const fs::path base = fs::temp_directory_path() / "graphwave_acceptance";
    fs::remove_all(base);
    const std::string spec = std::string(GRAPHWAVE_NETWORKS) + "/elastic_kv_chain.json";
    std::ostringstream out, err;
    ReportOptions opts;
    const int c1 = cmd_report(spec, opts, (base / "run1").string(), out, err);
    const int c2 = cmd_report(spec, opts, (base / "run2").string(), out, err);
    std::size_t files = 0;
    bool identical = c1 == c2;
    for (const auto& entry : fs::directory_iterator(base / "run1")) {
        ++files;
        const fs::path twin = base / "run2" / entry.path().filename();
        identical = identical && fs::exists(twin) && slurp(entry.path()) == slurp(twin);
    }
    std::size_t files2 = 0;
    for ([[maybe_unused]] const auto& entry : fs::directory_iterator(base / "run2")) ++files2;
    identical = identical && files == files2 && files >= 5;
    Outcome o{identical, std::to_string(files) + " output files byte-identical across two runs: " +
                             (identical ? "yes" : "NO") + " (exit codes " + std::to_string(c1) + ", " +
                             std::to_string(c2) + ")"};
    o.detail += "; " + fmt("%.1f s", since(t0));
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"dissipation law on five canonical networks", dissipation_law},
        {"energy conservation without damping", conservation_control},
        {"spectral modal oracle, constant damping", spectral_oracle},
        {"asymptotic stability of damped networks", asymptotic_stability},
        {"well-posedness and dissipativity of the generator", well_posedness},
        {"continuous damping: bounded resolvent, exponential decay", exponential_case},
        {"damping jump: resolvent growth beta^(1/2), energy ~ t^-4", polynomial_case},
        {"property (P) checker and graph form agreement", property_checker},
        {"tree/graph pipeline equivalence", tree_graph_equivalence},
        {"report determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("[%s] %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
