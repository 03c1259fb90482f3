#pragma once

#include <span>
#include <vector>

#include "lgf/dataset.hpp"
#include "lgf/error.hpp"

namespace lgf {

// One window's dynamic graph: symmetric thresholded correlation matrix with a
// zero diagonal, plus the raw window it was built from. Every nonzero entry
// has magnitude >= the threshold used at construction.
struct GraphSnapshot {
    std::vector<double> adjacency;  // N x N row-major
    WindowedSample segments;
    std::size_t node_count = 0;

    double adj(std::size_t i, std::size_t j) const { return adjacency[i * node_count + j]; }
};

// Pearson correlation of two equal-length series. Returns 0 when either
// series has zero centered norm (zero variance disconnects the node rather
// than fabricating structure). Result is clamped to [-1, 1] and the
// computation is symmetric in its arguments to the last bit.
double pearson(std::span<const double> x, std::span<const double> y);

// Correlations with magnitude >= delta survive (sign preserved); the diagonal
// is forced to zero.
GraphSnapshot build_snapshot(const WindowedSample& window, double delta);

// Neighbor indices per node: j is a neighbor of i iff A_ij != 0. Self never
// appears in its own set.
std::vector<std::vector<std::size_t>> neighbor_sets(const GraphSnapshot& snapshot);

}  // namespace lgf
