#include "lgf/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lgf {

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw DimensionError("pearson: series lengths differ (" + std::to_string(x.size()) + " vs " +
                             std::to_string(y.size()) + ")");
    }
    if (x.size() < 2) throw ContractError("pearson: need at least 2 points");
    const std::size_t w = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < w; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(w);
    my /= static_cast<double>(w);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < w; ++i) {
        const double cx = x[i] - mx;
        const double cy = y[i] - my;
        sxy += cx * cy;
        sxx += cx * cx;
        syy += cy * cy;
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    // sqrt of the product (not product of sqrts): exact for perfectly linear
    // series, still symmetric in the arguments.
    const double rho = sxy / std::sqrt(sxx * syy);
    return std::clamp(rho, -1.0, 1.0);
}

GraphSnapshot build_snapshot(const WindowedSample& window, double delta) {
    if (delta < 0.0 || delta >= 1.0) {
        throw ContractError("build_snapshot: threshold must lie in [0, 1), got " + std::to_string(delta));
    }
    const std::size_t n = window.variable_count;
    GraphSnapshot snap;
    snap.node_count = n;
    snap.segments = window;
    snap.adjacency.assign(n * n, 0.0);

    std::vector<std::vector<double>> columns(n);
    for (std::size_t i = 0; i < n; ++i) columns[i] = window.variable_series(i);

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double rho = pearson(columns[i], columns[j]);
            if (std::abs(rho) >= delta) {
                snap.adjacency[i * n + j] = rho;
                snap.adjacency[j * n + i] = rho;
            }
        }
    }
    return snap;
}

std::vector<std::vector<std::size_t>> neighbor_sets(const GraphSnapshot& snapshot) {
    const std::size_t n = snapshot.node_count;
    std::vector<std::vector<std::size_t>> sets(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && snapshot.adj(i, j) != 0.0) sets[i].push_back(j);
        }
    }
    return sets;
}

}  // namespace lgf
