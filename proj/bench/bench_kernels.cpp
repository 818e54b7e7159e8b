// Serial reference kernels against their OpenMP versions: edge-parallel
// assembly and the beta-grid resolvent scan.
#include "graphwave/discretize.hpp"
#include "graphwave/network.hpp"
#include "graphwave/spectral.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>

using namespace graphwave;

namespace {

// A comb: a K-V spine with elastic teeth, large enough to give the
// parallel loops some work.
NetworkSpec comb(int teeth) {
    NetworkSpec spec;
    spec.graph.mode = GraphMode::tree;
    spec.graph.vertices.push_back({"root", true, true});
    std::string prev = "root";
    for (int i = 0; i < teeth; ++i) {
        const std::string spine = "s" + std::to_string(i);
        const std::string tip = "t" + std::to_string(i);
        const bool last = i + 1 == teeth;
        spec.graph.vertices.push_back({spine, last, false});
        spec.graph.vertices.push_back({tip, true, false});
        spec.graph.edges.push_back({prev + "-" + spine, prev, spine, 1.0});
        spec.damping.push_back(DampingProfile::piecewise({0.0, 1.0}, {{0.5, 0.1, 0.05, 0.01}}));
        if (!last) {
            spec.graph.edges.push_back({spine + "-" + tip, spine, tip, 0.7});
            spec.damping.push_back(DampingProfile::zero(0.7));
        } else {
            spec.graph.vertices.pop_back();
        }
        prev = spine;
    }
    return spec;
}

template <class F>
double seconds(F&& f, int repeats) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < repeats; ++r) f();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count() / repeats;
}

}  // namespace

int main(int argc, char** argv) {
    const int teeth = argc > 1 ? std::atoi(argv[1]) : 40;
    const int cells = argc > 2 ? std::atoi(argv[2]) : 64;
    const Network net = build_network(comb(teeth));
    MeshResolution res;
    res.cells_per_edge = cells;
    auto mesh = std::make_shared<const Mesh>(build_mesh(net.graph, res, net.damping));

    std::printf("threads: %d, edges: %zu, cells/edge: %d\n", omp_get_max_threads(), net.graph.edge_count(), cells);

    const double t_serial = seconds([&] { (void)assemble(mesh, net.damping, Execution::serial); }, 5);
    const double t_parallel = seconds([&] { (void)assemble(mesh, net.damping, Execution::parallel); }, 5);
    const auto sys = assemble(mesh, net.damping);
    std::printf("assembly  n=%ld  serial %.4f s  parallel %.4f s  speedup %.2f\n", static_cast<long>(sys.n()),
                t_serial, t_parallel, t_serial / t_parallel);

    // the scan uses the sparse route here so that the comb size is not capped
    ScanOptions opts;
    opts.method = ResolventMethod::iterative;
    opts.refine_peaks = false;
    const double limit = resolved_band_limit(*mesh);
    const int points = 16;
    opts.exec = Execution::serial;
    const double s_serial = seconds([&] { (void)resolvent_scan(sys, limit / 10, limit, points, opts); }, 1);
    opts.exec = Execution::parallel;
    const double s_parallel = seconds([&] { (void)resolvent_scan(sys, limit / 10, limit, points, opts); }, 1);
    std::printf("scan      %d points  serial %.3f s  parallel %.3f s  speedup %.2f\n", points, s_serial, s_parallel,
                s_serial / s_parallel);
    return 0;
}
