#include "graphwave/commands.hpp"

#include "graphwave/discretize.hpp"
#include "graphwave/error.hpp"
#include "graphwave/simulate.hpp"

#include <Eigen/Core>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>

namespace graphwave {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr std::uint64_t wellposed_seed = WellPosednessOptions{}.seed;
constexpr int decay_modes = 2;

bool is_parse_error(Errc code) {
    return code == Errc::invalid_spec || code == Errc::invalid_profile || code == Errc::nonpositive_length;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void write_json(const json& doc, const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(Errc::invalid_argument, "cannot open '" + path.string() + "' for writing");
    os << doc.dump(2) << '\n';
}

fs::path prepare_dir(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw Error(Errc::invalid_argument, "cannot create '" + dir + "': " + ec.message());
    return p;
}

void write_manifest(const fs::path& dir, const std::string& command, const std::string& spec_path,
                    const NetworkSpec& spec, const json& flags, const std::vector<std::string>& outputs) {
    json m;
    m["tool"] = "graphwave";
    m["command"] = command;
    m["spec_path"] = spec_path;
    m["flags"] = flags;
    m["resolved_spec"] = network_to_json(spec);
    m["seeds"] = json{{"wellposedness", wellposed_seed}, {"undamped_modes", 7}, {"lanczos", 0x5eed}};
    m["versions"] = json{{"graphwave", GRAPHWAVE_VERSION},
                         {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                       "." + std::to_string(EIGEN_MINOR_VERSION)},
                         {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                               std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                               std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    json outs = json::array();
    for (const auto& o : outputs) outs.push_back(o);
    outs.push_back("manifest.json");
    m["outputs"] = outs;
    write_json(m, dir / "manifest.json");
}

NetworkSpec with_cells(NetworkSpec spec, const std::optional<int>& cells) {
    if (cells) {
        spec.resolution.cells_per_edge = *cells;
        spec.resolution.per_edge.assign(spec.resolution.per_edge.size(), std::nullopt);
    }
    return spec;
}

MeshResolution doubled(const MeshResolution& r) {
    MeshResolution out = r;
    if (out.cells_per_edge) *out.cells_per_edge *= 2;
    out.cells_per_unit_length *= 2.0;
    for (auto& c : out.per_edge)
        if (c) *c *= 2;
    return out;
}

DiscreteSystem discretize(const Network& net, const MeshResolution& res) {
    auto mesh = std::make_shared<const Mesh>(build_mesh(net.graph, res, net.damping));
    DiscreteSystem sys = assemble(mesh, net.damping);
    check_positive_definite(sys);
    return sys;
}

EdgeFunction parse_edge_function(const json& doc, double length, const std::string& where) {
    if (!doc.is_object() || !doc.contains("kind") || !doc["kind"].is_string())
        throw Error(Errc::invalid_spec, where + ": expected an object with a string 'kind'");
    const std::string kind = doc["kind"].get<std::string>();
    EdgeFunction f;
    if (kind == "zero") return f;
    if (kind == "sine") {
        f.kind = EdgeFunction::Kind::sine;
        f.amplitude = doc.value("amplitude", 1.0);
        f.mode = doc.value("mode", 1.0);
        return f;
    }
    if (kind == "pp") {
        f.kind = EdgeFunction::Kind::polynomial;
        f.breaks = doc.at("breaks").get<std::vector<double>>();
        f.coeffs = doc.at("coeffs").get<std::vector<std::vector<double>>>();
        if (f.breaks.size() != f.coeffs.size() + 1 || std::abs(f.breaks.back() - length) > 1e-12 * length)
            throw Error(Errc::invalid_spec, where + ": breaks must span [0, length] with one more entry than coeffs");
        return f;
    }
    throw Error(Errc::invalid_spec, where + ": unknown function kind '" + kind + "'");
}

/// Per-edge functions keyed by edge id, in the declared edge direction.
FieldSpec load_field(const std::string& path, const Network& net) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::invalid_spec, "cannot open '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(Errc::invalid_spec, path + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("edges") || !doc["edges"].is_object())
        throw Error(Errc::invalid_spec, path + ": expected {\"edges\": {<edge id>: <function>}}");
    FieldSpec field(net.graph.edge_count());
    for (auto it = doc["edges"].begin(); it != doc["edges"].end(); ++it) {
        const Edge* edge = nullptr;
        for (const auto& e : net.graph.edges())
            if (e.label == it.key()) edge = &e;
        if (edge == nullptr) throw Error(Errc::invalid_spec, path + ": unknown edge '" + it.key() + "'");
        try {
            EdgeFunction f = parse_edge_function(*it, edge->length, path + ": edges." + it.key());
            f.reflected = edge->reoriented;
            field[edge->id.value] = std::move(f);
        } catch (const json::exception& e) {
            throw Error(Errc::invalid_spec, path + ": edges." + it.key() + ": " + e.what());
        }
    }
    return field;
}

State make_initial(const DiscreteSystem& sys, const Network& net, const SimulateOptions& opts) {
    if (opts.u0 == "modes" && opts.v0 == "zero") return undamped_modes_state(sys, decay_modes);
    State s{Eigen::VectorXd::Zero(sys.n()), Eigen::VectorXd::Zero(sys.n()), 0.0};
    auto field = [&](const std::string& what, Eigen::VectorXd& target) {
        if (what == "zero") return;
        if (what == "modes") {
            target = undamped_modes_state(sys, decay_modes).u;
            return;
        }
        const FieldSpec f = load_field(what, net);
        const FieldSpec zero(net.graph.edge_count());
        target = initial_state(*sys.mesh, f, zero).u;
    };
    field(opts.u0, s.u);
    field(opts.v0, s.v);
    return s;
}

json fit_json(const DecayFit& f) {
    json j{{"model", f.model == DecayModel::exponential ? "exponential" : "power"},
           {"window", {f.t0, f.t1}},
           {"r2", f.r2},
           {"samples_used", f.samples_used},
           {"max_abs_residual", f.max_abs_residual},
           {"intercept", f.intercept}};
    if (f.model == DecayModel::exponential)
        j["omega"] = f.rate;
    else
        j["exponent"] = f.rate;
    return j;
}

json spectrum_summary(const SpectrumResult& s) {
    return json{{"method", s.method},
                {"count", s.eigenvalues.size()},
                {"max_real_part", s.max_real_part()},
                {"max_residual", s.max_residual()}};
}

json scan_summary(const ResolventScan& scan) {
    json peaks = json::array();
    for (std::size_t i = 0; i < scan.peak_betas.size(); ++i)
        peaks.push_back(json{{"beta", scan.peak_betas[i]}, {"norm", scan.peak_norms[i]}});
    return json{{"beta_min", scan.grid.front()},
                {"beta_max", scan.grid.back()},
                {"points", scan.grid.size()},
                {"slope", scan.slope},
                {"slope_source", scan.slope_source},
                {"fit_band", {scan.fit_lo, scan.fit_hi}},
                {"fit_points", scan.fit_points},
                {"peaks", peaks}};
}

json verdict_json(const StabilityVerdict& v) {
    json j{{"asymptotically_stable", v.asymptotically_stable},
           {"max_real_part", v.max_real_part},
           {"spectral_gap", v.spectral_gap},
           {"classification", to_string(v.classification)},
           {"slope", v.slope},
           {"peak_match_fraction", v.peak_match_fraction},
           {"messages", v.messages}};
    j["alpha_estimate"] = v.alpha_estimate ? json(*v.alpha_estimate) : json(nullptr);
    return j;
}

template <class Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const Error& e) {
        err << "graphwave: " << e.what() << '\n';
        return is_parse_error(e.code()) ? exit_parse_error : exit_failure;
    } catch (const std::exception& e) {
        err << "graphwave: " << e.what() << '\n';
        return exit_failure;
    }
}

void put(json& j, const char* key, const std::optional<double>& x) { j[key] = x ? json(*x) : json(nullptr); }
void put(json& j, const char* key, const std::optional<int>& x) { j[key] = x ? json(*x) : json(nullptr); }

}  // namespace

ValidationSummary summarize_validation(const Network& net) {
    ValidationSummary s;
    s.structure = validate_structure(net.graph, net.damping, net.strict_leaves);
    s.property = check_property_P(net.graph, net.damping, net.tolerances.node);
    s.continuity = classify_continuity(net.graph, net.damping, net.tolerances.continuity);
    s.pass = s.structure.pass && s.property.overall;
    if (!s.structure.has_kv_edge) {
        s.predicted = {"not asymptotically stable", Regime::not_asymptotically_stable};
    } else if (s.pass) {
        if (s.continuity.kind == ContinuityCase::I)
            s.predicted = {"exponential", Regime::exponential};
        else
            s.predicted = {"polynomial t^-2", Regime::polynomial};
    }
    return s;
}

json validation_json(const Network& net, const ValidationSummary& s) {
    const MetricGraph& g = net.graph;
    json components = json::array();
    for (const auto& c : s.structure.elastic_components) {
        json edges = json::array();
        for (auto e : c.edges) edges.push_back(g.edge(e).label);
        json vertices = json::array();
        for (auto v : c.vertices) vertices.push_back(g.vertex(v).label);
        components.push_back(json{{"edges", edges},
                                  {"vertices", vertices},
                                  {"is_tree", c.is_tree},
                                  {"leaf_attachment_ok", c.leaf_attachment_ok}});
    }
    json edges = json::array();
    for (std::size_t i = 0; i < s.property.edges.size(); ++i) {
        const auto& b = s.property.edges[i];
        edges.push_back(json{{"id", g.edges()[i].label},
                             {"sup_a", b.sup_a},
                             {"sup_da", finite_or_null(b.sup_da)},
                             {"da_bounded", b.da_bounded},
                             {"sup_d2a", finite_or_null(b.sup_d2a)},
                             {"d2a_bounded", b.d2a_bounded}});
    }
    json nodes = json::array();
    for (const auto& n : s.property.nodes)
        nodes.push_back(
            json{{"vertex", g.vertex(n.vertex).label}, {"node_value", n.node_value}, {"satisfied", n.satisfied}});
    json continuity = json::array();
    for (const auto& n : s.continuity.nodes)
        continuity.push_back(
            json{{"vertex", g.vertex(n.vertex).label}, {"values", n.values}, {"continuous", n.continuous}});
    json reoriented = json::array();
    for (const auto& e : g.edges())
        if (e.reoriented) reoriented.push_back(e.label);

    return json{{"mode", to_string(g.mode())},
                {"structure",
                 {{"pass", s.structure.pass},
                  {"has_kv_edge", s.structure.has_kv_edge},
                  {"elastic_components", components},
                  {"messages", s.structure.messages}}},
                {"property",
                 {{"form", g.mode() == GraphMode::tree ? "P" : "P'"},
                  {"overall", s.property.overall},
                  {"edges", edges},
                  {"nodes", nodes},
                  {"messages", s.property.messages}}},
                {"continuity",
                 {{"case", s.continuity.kind == ContinuityCase::I ? "I" : "II"}, {"nodes", continuity}}},
                {"reoriented_edges", reoriented},
                {"predicted", s.predicted.label},
                {"pass", s.pass}};
}

int cmd_validate(const std::string& spec_path, const std::optional<std::string>& out_dir, std::ostream& out,
                 std::ostream& err) {
    return guarded(err, [&] {
        const NetworkSpec spec = load_network(spec_path);
        Network net = [&] {
            try {
                return build_network(spec);
            } catch (const Error& e) {
                if (is_parse_error(e.code())) throw;
                out << "structure: FAIL\n  " << e.what() << '\n';
                throw;
            }
        }();
        const ValidationSummary s = summarize_validation(net);

        out << "structure: " << (s.structure.pass ? "pass" : "FAIL") << '\n';
        for (const auto& m : s.structure.messages) out << "  " << m << '\n';
        out << "property (" << (net.graph.mode() == GraphMode::tree ? "P" : "P'")
            << "): " << (s.property.overall ? "pass" : "FAIL") << '\n';
        for (const auto& m : s.property.messages) out << "  " << m << '\n';
        out << "continuity: case " << (s.continuity.kind == ContinuityCase::I ? "I" : "II") << '\n';
        out << "predicted: " << s.predicted.label << '\n';

        if (out_dir) {
            const fs::path dir = prepare_dir(*out_dir);
            write_json(validation_json(net, s), dir / "validation.json");
            write_manifest(dir, "validate", spec_path, spec, json::object(), {"validation.json"});
        }
        return s.pass ? exit_pass : exit_failure;
    });
}

int cmd_simulate(const std::string& spec_path, const SimulateOptions& opts, const std::string& out_dir,
                 std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const NetworkSpec spec = with_cells(load_network(spec_path), opts.cells);
        const Network net = build_network(spec);
        const DiscreteSystem sys = discretize(net, net.resolution);
        const State init = make_initial(sys, net, opts);

        std::string model = opts.fit;
        if (model == "auto")
            model = summarize_validation(net).predicted.regime == Regime::polynomial ? "power" : "exponential";
        const double T = opts.T.value_or(model == "power" ? 200.0 : 50.0);
        const double dt = opts.dt.value_or(default_time_step(*sys.mesh));
        const EnergyTrace trace = run(sys, init, dt, T, opts.sample_every);

        const fs::path dir = prepare_dir(out_dir);
        write_trace_csv(trace, (dir / "trace.csv").string());

        json result{{"dofs", sys.n()},
                    {"dt", dt},
                    {"T", T},
                    {"steps", static_cast<long long>(std::llround(T / dt))},
                    {"E0", trace.samples.front().E},
                    {"E_final", trace.samples.back().E},
                    {"max_dissipation_residual", max_dissipation_residual(trace)}};
        bool ok = true;
        if (opts.sample_every == 1) {
            const bool diss = check_dissipation(trace, net.tolerances.dissipation);
            result["dissipation_ok"] = diss;
            ok = diss;
        }
        if (model != "none") {
            const double t0 = opts.t0.value_or(T / 10.0);
            const double t1 = opts.t1.value_or(T);
            try {
                const DecayFit fit = model == "power" ? fit_power(trace, t0, t1) : fit_exponential(trace, t0, t1);
                result["fit"] = fit_json(fit);
                out << (model == "power" ? "power fit: p = " : "exponential fit: omega = ") << fit.rate
                    << ", r2 = " << fit.r2 << '\n';
            } catch (const Error& e) {
                result["fit"] = nullptr;
                result["fit_error"] = e.what();
                out << "fit: " << e.what() << '\n';
            }
        }
        write_json(result, dir / "fit.json");

        json flags;
        put(flags, "cells", opts.cells);
        put(flags, "dt", opts.dt);
        put(flags, "T", opts.T);
        flags["u0"] = opts.u0;
        flags["v0"] = opts.v0;
        flags["fit"] = opts.fit;
        put(flags, "t0", opts.t0);
        put(flags, "t1", opts.t1);
        flags["sample_every"] = opts.sample_every;
        write_manifest(dir, "simulate", spec_path, spec, flags, {"trace.csv", "fit.json"});
        out << "dissipation identity: " << (ok ? "holds" : "VIOLATED") << '\n';
        return ok ? exit_pass : exit_failure;
    });
}

int cmd_spectrum(const std::string& spec_path, const SpectrumOptions& opts, const std::string& out_dir,
                 std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const NetworkSpec spec = with_cells(load_network(spec_path), opts.cells);
        const Network net = build_network(spec);
        const DiscreteSystem sys = discretize(net, net.resolution);
        const SpectrumResult s = eigenvalues(sys);

        const fs::path dir = prepare_dir(out_dir);
        std::vector<std::string> outputs{"spectrum.csv", "spectrum.json"};
        write_spectrum_csv(s, (dir / "spectrum.csv").string());
        json summary = spectrum_summary(s);
        summary["dofs"] = sys.n();
        write_json(summary, dir / "spectrum.json");
        if (opts.dump_matrices) {
            write_matrix_market(sys.M, (dir / "M.mtx").string());
            write_matrix_market(sys.K, (dir / "K.mtx").string());
            write_matrix_market(sys.Ka, (dir / "Ka.mtx").string());
            outputs.insert(outputs.end(), {"M.mtx", "K.mtx", "Ka.mtx"});
        }
        json flags;
        put(flags, "cells", opts.cells);
        flags["dump_matrices"] = opts.dump_matrices;
        write_manifest(dir, "spectrum", spec_path, spec, flags, outputs);
        out << s.eigenvalues.size() << " eigenvalues, max Re = " << s.max_real_part()
            << ", max residual = " << s.max_residual() << '\n';
        return s.max_residual() <= 1e-8 ? exit_pass : exit_failure;
    });
}

int cmd_resolvent(const std::string& spec_path, const ResolventOptions& opts, const std::string& out_dir,
                  std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const NetworkSpec spec = with_cells(load_network(spec_path), opts.cells);
        const Network net = build_network(spec);
        const DiscreteSystem sys = discretize(net, net.resolution);
        const double bmax = opts.beta_max.value_or(resolved_band_limit(*sys.mesh));
        const double bmin = opts.beta_min.value_or(bmax / 10.0);
        const ResolventScan scan = resolvent_scan(sys, bmin, bmax, opts.points);

        const fs::path dir = prepare_dir(out_dir);
        write_scan_csv(scan, (dir / "scan.csv").string());
        write_json(scan_summary(scan), dir / "scan.json");
        json flags;
        put(flags, "cells", opts.cells);
        put(flags, "beta_min", opts.beta_min);
        put(flags, "beta_max", opts.beta_max);
        flags["points"] = opts.points;
        write_manifest(dir, "resolvent", spec_path, spec, flags, {"scan.csv", "scan.json"});
        out << "resolvent slope s = " << scan.slope << " (" << scan.slope_source << ", " << scan.fit_points
            << " points)\n";
        return exit_pass;
    });
}

int cmd_report(const std::string& spec_path, const ReportOptions& opts, const std::string& out_dir,
               std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const NetworkSpec spec = with_cells(load_network(spec_path), opts.cells);
        const Network net = build_network(spec);
        const ValidationSummary vs = summarize_validation(net);
        const DiscreteSystem sys = discretize(net, net.resolution);
        const fs::path dir = prepare_dir(out_dir);
        std::vector<std::string> outputs{"validation.json"};
        write_json(validation_json(net, vs), dir / "validation.json");

        json report;
        report["predicted"] = vs.predicted.label;
        report["dofs"] = sys.n();

        const SpectrumResult spectrum = eigenvalues(sys);
        write_spectrum_csv(spectrum, (dir / "spectrum.csv").string());
        outputs.push_back("spectrum.csv");
        report["spectrum"] = spectrum_summary(spectrum);

        const bool damped = !sys.undamped();
        std::optional<ResolventScan> scan;
        if (damped) {
            const double bmax = resolved_band_limit(*sys.mesh);
            scan = resolvent_scan(sys, bmax / 10.0, bmax, opts.points);
            write_scan_csv(*scan, (dir / "scan.csv").string());
            outputs.push_back("scan.csv");
            report["scan"] = scan_summary(*scan);
            if (opts.refine) {
                const DiscreteSystem fine = discretize(net, doubled(net.resolution));
                const ResolventScan fscan = resolvent_scan(fine, bmax / 10.0, bmax, opts.points);
                report["refinement"] = json{{"slope_coarse", scan->slope},
                                            {"slope_fine", fscan.slope},
                                            {"slope_change", std::abs(fscan.slope - scan->slope)}};
            }
        }
        ResolventScan empty;
        empty.slope = 0.0;
        const StabilityVerdict verdict = classify_stability(spectrum, scan ? *scan : empty, net.tolerances.thresholds);
        report["verdict"] = verdict_json(verdict);
        report["resolvent_slope"] = scan ? json(scan->slope) : json(nullptr);

        const bool power = vs.predicted.regime == Regime::polynomial;
        const double T = opts.T.value_or(power ? 200.0 : 50.0);
        const EnergyTrace trace = run(sys, undamped_modes_state(sys, decay_modes), default_time_step(*sys.mesh), T);
        write_trace_csv(trace, (dir / "trace.csv").string());
        outputs.push_back("trace.csv");
        const bool dissipation_ok = check_dissipation(trace, net.tolerances.dissipation);
        report["dissipation_ok"] = dissipation_ok;

        std::optional<DecayFit> fit;
        if (damped) {
            try {
                fit = power ? fit_power(trace, T / 10.0, T) : fit_exponential(trace, T / 10.0, T);
                report["decay_fit"] = fit_json(*fit);
            } catch (const Error& e) {
                report["decay_fit"] = nullptr;
                report["decay_fit_error"] = e.what();
            }
        }
        if (fit && power)
            report["measured_decay_exponent"] = fit->rate;
        else if (fit)
            report["measured_rate"] = fit->rate;

        bool agreement = false;
        std::string reason;
        switch (vs.predicted.regime.value_or(Regime::inconclusive)) {
            case Regime::not_asymptotically_stable:
                agreement = !verdict.asymptotically_stable;
                reason = agreement ? "spectrum reaches the imaginary axis" : "spectrum is strictly stable";
                break;
            case Regime::exponential:
                agreement = verdict.asymptotically_stable && verdict.classification == Regime::exponential && fit &&
                            fit->r2 >= 0.98;
                reason = "needs bounded resolvent and an exponential fit with r2 >= 0.98";
                break;
            case Regime::polynomial:
                agreement = verdict.asymptotically_stable && verdict.classification == Regime::polynomial && fit &&
                            fit->rate >= 3.2 && fit->rate <= 4.8;
                reason = "needs resolvent slope in the polynomial band and energy exponent in [3.2, 4.8]";
                break;
            default:
                reason = "no regime predicted: hypotheses not met";
                break;
        }
        agreement = agreement && dissipation_ok;
        report["agreement"] = agreement;
        report["agreement_rule"] = reason;
        write_json(report, dir / "report.json");
        outputs.push_back("report.json");

        json flags;
        put(flags, "cells", opts.cells);
        put(flags, "T", opts.T);
        flags["points"] = opts.points;
        flags["refine"] = opts.refine;
        write_manifest(dir, "report", spec_path, spec, flags, outputs);

        out << "predicted: " << vs.predicted.label << '\n';
        out << "measured: " << to_string(verdict.classification);
        if (scan) out << " (resolvent slope " << scan->slope << ")";
        if (fit) out << (power ? ", energy exponent " : ", energy rate ") << fit->rate << " (r2 " << fit->r2 << ")";
        out << '\n' << "agreement: " << (agreement ? "yes" : "NO") << '\n';
        return agreement ? exit_pass : exit_failure;
    });
}

}  // namespace graphwave
