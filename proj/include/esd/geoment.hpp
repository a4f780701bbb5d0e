#pragma once

#include "esd/qcore.hpp"

#include <cstdint>
#include <vector>

namespace esd {

// Options for the alternating product-state maximization: seeded random
// restarts, sweep cap, and the absolute overlap-improvement tolerance
// that ends a run.
struct GEOptions {
    int restarts = 32;
    int max_sweeps = 500;
    double tolerance = 1e-10;
    std::uint64_t seed = 0;
};

// Result of one maximization.  energy == 1 - lambda_sq exactly, and the
// stored factors reproduce lambda_sq as |<product|psi>|^2.
struct GEResult {
    double lambda_sq;
    double energy;
    Partition partition;
    std::vector<VectorXcd> factors;  // one per block, in block order
    int sweeps;
    bool converged;
};

struct HierarchyLevel {
    int K;
    GEResult best;
    std::vector<GEResult> per_partition;  // enumeration order
};

// Levels ascending in K (2..N).  absolute_energies[i] is the best energy
// at levels[i].K; differences[i] = absolute_energies[i+1] -
// absolute_energies[i] must be >= -1e-6 (coarser splits entangle less).
struct HierarchyReport {
    std::vector<HierarchyLevel> levels;
    std::vector<double> absolute_energies;
    std::vector<double> differences;
    bool monotone;
    bool all_converged;
};

// largest squared overlap with a state product across the blocks of the
// given partition, by alternating per-block optimization
GEResult best_product_overlap(const PureState& psi, const Partition& partition,
                              const GEOptions& opts = {});

// relative geometric entanglement of one partition: 1 - lambda_sq
GEResult relative_ge(const PureState& psi, const Partition& partition,
                     const GEOptions& opts = {});

// absolute geometric entanglement at level K: minimum relative energy
// over all partitions into K blocks
GEResult absolute_ge(const PureState& psi, int K, const GEOptions& opts = {});

// full ladder K = N..2, warm-starting each level from the merged winner
// of the finer level so the ladder is monotone by construction
HierarchyReport hierarchy(const PureState& psi, const GEOptions& opts = {});

}  // namespace esd
