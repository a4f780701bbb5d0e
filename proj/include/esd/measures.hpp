#pragma once

#include "esd/qcore.hpp"

#include <cstdint>

namespace esd {

// Options for the two-qubit discord measurement search: a coarse grid
// over the Bloch sphere followed by compass-step refinement and seeded
// perturbation restarts.  grid is points per angle (>= 8); tolerance is
// the absolute tolerance on the minimized conditional entropy.
struct DiscordOptions {
    int grid = 64;
    double tolerance = 1e-6;
    int max_iterations = 500;
    std::uint64_t seed = 0;
};

struct DiscordResult {
    double value = 0.0;
    double theta_m = 0.0;  // minimizing measurement direction
    double phi_m = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct SigmaParts {
    double q_aa = 0.0;
    double q_pp = 0.0;
    double c4 = 0.0;
    double sigma = 0.0;  // q_aa + q_pp + c4
};

// concurrence of a two-qubit pure state: 2 |c00 c11 - c01 c10|
double concurrence_pure(const PureState& psi);

// signed auxiliary quantity q = s1 - s2 - s3 - s4 from the decreasing
// square roots of the eigenvalues of rho rho~; concurrence is max(0, q)
// and the sign of q carries the entanglement threshold information
double q_auxiliary(const DensityMatrix& rho);
double concurrence_mixed(const DensityMatrix& rho);

// multiqubit spin-flip overlap |<psi| sigma_y^n |psi*>| for even n;
// odd n is rejected (the overlap vanishes identically)
double n_concurrence(const PureState& psi);

// q_aa + q_pp + c4 for a four-qubit state split into an atom pair and a
// partner pair; conserved along the closed-form evolutions
SigmaParts invariant_sigma(const PureState& psi,
                           const std::vector<std::string>& atom_labels,
                           const std::vector<std::string>& partner_labels);

// discord of a pure state across a two-block partition equals the
// entanglement entropy of either block
double discord_pure_bipartition(const PureState& psi, const Partition& cut);

// left discord of a two-qubit state, minimizing over projective
// measurements on the second qubit
DiscordResult discord_two_qubit(const DensityMatrix& rho,
                                const DiscordOptions& opts = {});

}  // namespace esd
