#include "graphwave/error.hpp"

namespace graphwave {

const char* to_string(Errc code) noexcept {
    switch (code) {
        case Errc::invalid_spec: return "InvalidSpec";
        case Errc::disconnected_graph: return "DisconnectedGraph";
        case Errc::cycle_in_tree_mode: return "CycleInTreeMode";
        case Errc::bad_root_degree: return "BadRootDegree";
        case Errc::self_loop: return "SelfLoop";
        case Errc::nonpositive_length: return "NonpositiveLength";
        case Errc::invalid_dirichlet: return "InvalidDirichlet";
        case Errc::unknown_vertex: return "UnknownVertex";
        case Errc::invalid_profile: return "InvalidProfile";
        case Errc::out_of_domain: return "OutOfDomain";
        case Errc::resolution_too_coarse: return "ResolutionTooCoarse";
        case Errc::quadrature_degree_overflow: return "QuadratureDegreeOverflow";
        case Errc::singular_mass: return "SingularMass";
        case Errc::incompatible_initial_data: return "IncompatibleInitialData";
        case Errc::linear_solve_failure: return "LinearSolveFailure";
        case Errc::window_too_short: return "WindowTooShort";
        case Errc::energy_underflow: return "EnergyUnderflow";
        case Errc::dense_threshold_exceeded: return "DenseThresholdExceeded";
        case Errc::eigensolver_failure: return "EigensolverFailure";
        case Errc::singular_shift: return "SingularShift";
        case Errc::band_too_narrow: return "BandTooNarrow";
        case Errc::invalid_argument: return "InvalidArgument";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace graphwave
