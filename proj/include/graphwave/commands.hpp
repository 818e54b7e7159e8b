#pragma once

#include "graphwave/damping.hpp"
#include "graphwave/graph.hpp"
#include "graphwave/network.hpp"
#include "graphwave/spectral.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <optional>
#include <string>

namespace graphwave {

inline constexpr int exit_pass = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_parse_error = 2;

struct Prediction {
    /// "exponential", "polynomial t^-2", "not asymptotically stable" or "none".
    std::string label = "none";
    std::optional<Regime> regime;
};

struct ValidationSummary {
    ValidationReport structure;
    PropertyReport property;
    ContinuityReport continuity;
    Prediction predicted;
    bool pass = false;
};

/// Structural check, property (P) and the continuity case, combined into the
/// regime the decay theorem predicts. No theorem applies when the structural
/// hypotheses or (P) fail; an undamped network is predicted to be not
/// asymptotically stable.
[[nodiscard]] ValidationSummary summarize_validation(const Network& net);
[[nodiscard]] nlohmann::json validation_json(const Network& net, const ValidationSummary& summary);

struct SimulateOptions {
    std::optional<int> cells;  // uniform cells per edge, overrides the spec
    std::optional<double> dt;
    std::optional<double> T;
    std::string u0 = "modes";  // "modes", "zero" or a JSON file of per-edge functions
    std::string v0 = "zero";
    std::string fit = "auto";  // "auto", "exponential", "power" or "none"
    std::optional<double> t0;
    std::optional<double> t1;
    int sample_every = 1;
};

struct SpectrumOptions {
    std::optional<int> cells;
    bool dump_matrices = false;
};

struct ResolventOptions {
    std::optional<int> cells;
    std::optional<double> beta_min;
    std::optional<double> beta_max;
    int points = 48;
};

struct ReportOptions {
    std::optional<int> cells;
    std::optional<double> T;
    int points = 48;
    bool refine = false;  // repeat the scan on a doubled mesh over the same band
};

/// Every command returns exit_pass, exit_failure or exit_parse_error and
/// writes its outputs plus manifest.json into out_dir (created if needed).
int cmd_validate(const std::string& spec_path, const std::optional<std::string>& out_dir, std::ostream& out,
                 std::ostream& err);
int cmd_simulate(const std::string& spec_path, const SimulateOptions& opts, const std::string& out_dir,
                 std::ostream& out, std::ostream& err);
int cmd_spectrum(const std::string& spec_path, const SpectrumOptions& opts, const std::string& out_dir,
                 std::ostream& out, std::ostream& err);
int cmd_resolvent(const std::string& spec_path, const ResolventOptions& opts, const std::string& out_dir,
                  std::ostream& out, std::ostream& err);
int cmd_report(const std::string& spec_path, const ReportOptions& opts, const std::string& out_dir,
               std::ostream& out, std::ostream& err);

}  // namespace graphwave
