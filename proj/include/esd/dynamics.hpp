#pragma once

#include "esd/measures.hpp"
#include "esd/qcore.hpp"

#include <optional>
#include <vector>

namespace esd {

// Two identical atom-mode pairs with exchange coupling J on resonance
// (atom frequency E equals the mode frequency omega).
struct JCParams {
    double J = 1.0;
    double E = 1.0;
    double omega = 1.0;
};

// closed-form joint state at scaled time jt = J*t, one excitation shared
// per pair; qubit layout {A1, P1, A2, P2}
PureState jc_state(double theta, double jt);

// the same evolution by numerically exponentiating the interaction-frame
// pair Hamiltonian; agrees with jc_state to rounding
PureState jc_evolve_numeric(double theta, double t, const JCParams& params);

// Discretized band of modes coupled to a single excited atom.  Gamma is
// the nominal decay rate of the flat band, W the half bandwidth around
// the transition frequency E, delta_omega the mode spacing; recurrences
// appear past horizon = 2 pi / delta_omega.
struct WWParams {
    VectorXd detunings;  // mode frequencies minus E
    VectorXd couplings;
    double Gamma = 0.0;
    double E = 0.0;
    double W = 0.0;
    double delta_omega = 0.0;
    double horizon = 0.0;

    int mode_count() const { return static_cast<int>(detunings.size()); }

    // N >= 2 evenly spaced modes on [-W, W] with flat coupling
    // sqrt(Gamma * delta_omega / (2 pi))
    static WWParams flat_band(int N, double Gamma, double W, double E = 0.0);
    // one mode on resonance: exact Rabi oscillation, infinite horizon
    static WWParams single_mode(double J1, double E = 0.0);
};

// Exact single-excitation propagator.  The star-shaped Hamiltonian is
// diagonalized through its secular equation, one eigenvalue per
// detuning interval, so construction is O(N^2) and each amplitude
// evaluation is a sum over eigenmodes.
class WWEngine {
  public:
    explicit WWEngine(WWParams params);

    const WWParams& params() const { return params_; }
    // excited-state amplitude, starting from xi(0) = 1
    cplx xi(double t) const;
    // amplitude of each field mode at time t
    VectorXcd mode_amplitudes(double t) const;

    const VectorXd& eigenvalues() const { return evals_; }
    // squared overlaps of the initial state with the eigenmodes; sum 1
    const VectorXd& weights() const { return weights_; }

  private:
    WWParams params_;
    VectorXd evals_;
    VectorXd weights_;
};

struct WWSolution {
    WWParams params;
    std::vector<double> times;
    VectorXcd xi;       // excited amplitude per stored time
    MatrixXcd lambdas;  // mode amplitudes, N x times
    bool horizon_warning = false;
};

// evolve and store amplitudes on a time grid; each stored column is
// checked for norm conservation |xi|^2 + sum |lambda|^2 = 1 to 1e-9
WWSolution ww_solve(const WWParams& params, const std::vector<double>& times);
WWSolution ww_solve(const WWEngine& engine, const std::vector<double>& times);

// subset of field modes kept on the observer's side of the partition
struct ModeSubset {
    std::vector<int> indices;
    static ModeSubset all(const WWParams& params);
    // modes within |detuning| <= delta_nu
    static ModeSubset window(const WWParams& params, double delta_nu);
    static ModeSubset of(std::vector<int> indices, const WWParams& params);
};

// captured weight sum_{k in subset} |lambda_k|^2 at a stored time
double chi_prime_sq(const WWSolution& sol, const ModeSubset& subset,
                    int time_index);

enum class ReducedPair { atoms, collective_modes };

// two-qubit state of the atom pair or of the pair of collective captured
// modes, for excited amplitude xi and captured weight chi2 per side
DensityMatrix two_atom_ww_reduced(double theta, cplx xi, double chi2,
                                  ReducedPair which);
DensityMatrix two_atom_ww_reduced(double theta, const WWSolution& sol,
                                  const ModeSubset& subset, int time_index,
                                  ReducedPair which);

// four-qubit pure state of atoms plus collective modes, layout
// {A1, C1, A2, C2}; chi2 defaults to 1 - |xi|^2 (nothing escapes)
PureState ww_four_qubit_state(double theta, cplx xi);
PureState ww_four_qubit_state(double theta, cplx xi, double chi2);

// closed-form disentanglement and revival times for exponential decay
// |xi|^2 = exp(-Gamma t); empty when the atom pair never disentangles
std::optional<double> esd_death_time(double theta, double Gamma);
// time at which the collective-mode pair becomes entangled; 0 when it is
// entangled from the start
std::optional<double> esb_birth_time(double theta, double Gamma);

// the same times located on the discretized model by bracketing and
// bisecting the sign of the auxiliary concurrence quantity
std::optional<double> death_time_numeric(double theta, const WWEngine& engine);
std::optional<double> birth_time_numeric(double theta, const WWEngine& engine);

// conserved combination for the closed-form models
SigmaParts invariant_sigma_jc(double theta, double jt);
SigmaParts invariant_sigma_ww(double theta, const WWSolution& sol,
                              int time_index);

// emitted line shape: Lorentzian of half width gamma centered on e
double spectrum(double nu, double gamma, double e = 0.0);
// weight captured by a detector window of half width delta_nu:
// (2/pi) atan(delta_nu / gamma)
double detection_probability(double delta_nu, double gamma);
// window half width (in units of the line half width) past which the
// collective-mode pair is entangled; defined for theta in [pi/4, pi/2)
double bandwidth_threshold(double theta);

struct PartitionScanRow {
    double delta_nu = 0.0;
    double chi2 = 0.0;          // captured weight in the window
    double c_collective = 0.0;  // concurrence of the collective-mode pair
    double chi2_product = 0.0;  // sum of |lambda_k|^4 over the window
};

struct PartitionScan {
    std::vector<PartitionScanRow> rows;
    double t_used = 0.0;
    double xi_sq = 0.0;        // residual excited population at t_used
    double gamma_line = 0.0;   // half width of the emitted line, Gamma / 2
    std::optional<double> threshold_ratio;  // bandwidth_threshold(theta)
    std::optional<double> predicted_dnu;    // threshold_ratio * gamma_line
    std::optional<double> located_dnu;      // first grid point with c > 0
};

// sweep the detector window over dnu_grid at the last stored time of a
// long-time solution (residual |xi|^2 must be below 1e-3)
PartitionScan partition_scan(double theta, const WWSolution& sol,
                             const std::vector<double>& dnu_grid);

}  // namespace esd
