#include "esd/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace esd {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_theta(double theta, const char* what) {
    if (!(theta >= 0.0) || !(theta <= kPi / 2.0))
        throw std::invalid_argument(std::string(what) +
                                    ": theta must lie in [0, pi/2]");
}

SubsystemLayout jc_layout() {
    return SubsystemLayout::qubits({"A1", "P1", "A2", "P2"});
}

SubsystemLayout ww_layout() {
    return SubsystemLayout::qubits({"A1", "C1", "A2", "C2"});
}

// four-qubit state cos(theta)|g0 g0> + sin(theta)|u u> with one shared
// excitation per pair, u = a|e0> + b|g1>; layout digit order A1 X1 A2 X2
VectorXcd pair_product_amp(double theta, cplx a, cplx b) {
    VectorXcd amp = VectorXcd::Zero(16);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    amp(0) = c;            // |g0 g0>
    amp(10) = s * a * a;   // |e0 e0>
    amp(9) = s * a * b;    // |e0 g1>
    amp(6) = s * b * a;    // |g1 e0>
    amp(5) = s * b * b;    // |g1 g1>
    return amp;
}

}  // namespace

PureState jc_state(double theta, double jt) {
    require_theta(theta, "jc_state");
    const cplx xi(std::cos(jt), 0.0);
    const cplx chi(0.0, -std::sin(jt));
    return PureState(jc_layout(), pair_product_amp(theta, xi, chi));
}

PureState jc_evolve_numeric(double theta, double t, const JCParams& params) {
    require_theta(theta, "jc_evolve_numeric");
    if (!(params.J > 0.0))
        throw std::invalid_argument("jc_evolve_numeric: J must be positive");
    if (std::abs(params.E - params.omega) >
        1e-12 * std::max(1.0, std::abs(params.E)))
        throw std::invalid_argument(
            "jc_evolve_numeric: atom and mode must be resonant (E == omega)");
    // interaction-frame pair Hamiltonian couples |e0> and |g1>
    MatrixXcd h = MatrixXcd::Zero(4, 4);
    h(1, 2) = params.J;  // pair basis g0, g1, e0, e1
    h(2, 1) = params.J;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigendecomposition failed");
    VectorXcd phases(4);
    for (int i = 0; i < 4; ++i)
        phases(i) = std::polar(1.0, -es.eigenvalues()(i) * t);
    const MatrixXcd u_pair = es.eigenvectors() * phases.asDiagonal() *
                             es.eigenvectors().adjoint();
    const MatrixXcd u = kron(u_pair, u_pair);
    return PureState(jc_layout(), u * jc_state(theta, 0.0).amp());
}

WWParams WWParams::flat_band(int N, double Gamma, double W, double E) {
    if (N < 2)
        throw std::invalid_argument("flat_band: need at least two modes");
    if (!(Gamma > 0.0) || !(W > 0.0))
        throw std::invalid_argument("flat_band: Gamma and W must be positive");
    WWParams p;
    p.Gamma = Gamma;
    p.E = E;
    p.W = W;
    p.delta_omega = 2.0 * W / static_cast<double>(N - 1);
    p.horizon = 2.0 * kPi / p.delta_omega;
    p.detunings.resize(N);
    p.couplings.resize(N);
    const double j = std::sqrt(Gamma * p.delta_omega / (2.0 * kPi));
    for (int k = 0; k < N; ++k) {
        p.detunings(k) = -W + p.delta_omega * static_cast<double>(k);
        p.couplings(k) = j;
    }
    return p;
}

WWParams WWParams::single_mode(double J1, double E) {
    if (!(J1 > 0.0))
        throw std::invalid_argument("single_mode: coupling must be positive");
    WWParams p;
    p.E = E;
    p.detunings = VectorXd::Zero(1);
    p.couplings = VectorXd::Constant(1, J1);
    p.horizon = std::numeric_limits<double>::infinity();
    return p;
}

WWEngine::WWEngine(WWParams params) : params_(std::move(params)) {
    const int n = params_.mode_count();
    if (n < 1) throw std::invalid_argument("WWEngine: need at least one mode");
    if (params_.couplings.size() != n)
        throw std::invalid_argument("WWEngine: detunings and couplings differ");
    VectorXd d = params_.detunings;
    VectorXd j = params_.couplings;
    {
        // sort modes by detuning; the secular equation needs ordered poles
        std::vector<int> order(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) order[static_cast<std::size_t>(k)] = k;
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return d(a) < d(b); });
        VectorXd ds(n), js(n);
        for (int k = 0; k < n; ++k) {
            ds(k) = d(order[static_cast<std::size_t>(k)]);
            js(k) = j(order[static_cast<std::size_t>(k)]);
        }
        d = ds;
        j = js;
    }
    const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
    for (int k = 0; k + 1 < n; ++k)
        if (d(k + 1) - d(k) < 1e-12 * scale)
            throw std::invalid_argument("WWEngine: detunings must be distinct");
    for (int k = 0; k < n; ++k)
        if (!(j(k) > 0.0))
            throw std::invalid_argument("WWEngine: couplings must be positive");

    // eigenvalues of the star Hamiltonian solve
    //   f(x) = x - sum_k J_k^2 / (x - D_k) = 0,
    // strictly increasing from -inf to +inf on each interval between
    // consecutive poles and on the two outer rays: n + 1 simple roots
    const double jn = j.norm();
    auto f = [&](double x) {
        double acc = x;
        for (int k = 0; k < n; ++k) acc -= j(k) * j(k) / (x - d(k));
        return acc;
    };
    auto bisect = [&](double lo, double hi) {
        for (int it = 0; it < 200 && hi - lo > 1e-16 * scale; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            (f(mid) < 0.0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    evals_.resize(n + 1);
    {
        double lo = d(0) - jn - 1.0;
        while (f(lo) >= 0.0) lo -= 2.0 * (d(0) - lo);
        evals_(0) = bisect(lo, d(0) - 1e-300);
    }
    for (int k = 0; k + 1 < n; ++k) {
        // nudge off the poles; f diverges to -inf and +inf at the ends
        const double eps = 1e-14 * scale + 1e-300;
        evals_(k + 1) = bisect(d(k) + eps, d(k + 1) - eps);
    }
    {
        double hi = d(n - 1) + jn + 1.0;
        while (f(hi) <= 0.0) hi += 2.0 * (hi - d(n - 1));
        evals_(n) = bisect(d(n - 1) + 1e-300, hi);
    }
    // residue weights 1 / f'(lambda); their sum is exactly 1
    weights_.resize(n + 1);
    for (int m = 0; m <= n; ++m) {
        double fp = 1.0;
        for (int k = 0; k < n; ++k) {
            const double r = evals_(m) - d(k);
            fp += j(k) * j(k) / (r * r);
        }
        weights_(m) = 1.0 / fp;
    }
    if (std::abs(weights_.sum() - 1.0) > 1e-9)
        throw std::runtime_error("WWEngine: eigenmode weights do not sum to 1");
    params_.detunings = std::move(d);
    params_.couplings = std::move(j);
}

cplx WWEngine::xi(double t) const {
    cplx acc(0.0, 0.0);
    for (Eigen::Index m = 0; m < evals_.size(); ++m)
        acc += weights_(m) * std::polar(1.0, -evals_(m) * t);
    return acc;
}

VectorXcd WWEngine::mode_amplitudes(double t) const {
    const int n = params_.mode_count();
    VectorXcd out = VectorXcd::Zero(n);
    // lambda_k(t) = J_k sum_m w_m e^{-i lambda_m t} / (lambda_m - D_k)
    for (Eigen::Index m = 0; m < evals_.size(); ++m) {
        const cplx ph = weights_(m) * std::polar(1.0, -evals_(m) * t);
        for (int k = 0; k < n; ++k)
            out(k) += ph / (evals_(m) - params_.detunings(k));
    }
    for (int k = 0; k < n; ++k) out(k) *= params_.couplings(k);
    return out;
}

WWSolution ww_solve(const WWParams& params, const std::vector<double>& times) {
    return ww_solve(WWEngine(params), times);
}

WWSolution ww_solve(const WWEngine& engine, const std::vector<double>& times) {
    if (times.empty())
        throw std::invalid_argument("ww_solve: need at least one time");
    for (double t : times)
        if (!(t >= 0.0))
            throw std::invalid_argument("ww_solve: times must be nonnegative");
    WWSolution sol;
    sol.params = engine.params();
    sol.times = times;
    sol.xi.resize(static_cast<Eigen::Index>(times.size()));
    sol.lambdas.resize(engine.params().mode_count(),
                       static_cast<Eigen::Index>(times.size()));
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto col = static_cast<Eigen::Index>(i);
        sol.xi(col) = engine.xi(times[i]);
        sol.lambdas.col(col) = engine.mode_amplitudes(times[i]);
        const double norm2 =
            std::norm(sol.xi(col)) + sol.lambdas.col(col).squaredNorm();
        if (std::abs(norm2 - 1.0) > 1e-9)
            throw std::runtime_error("ww_solve: excitation norm drifted");
        if (times[i] > engine.params().horizon) sol.horizon_warning = true;
    }
    return sol;
}

ModeSubset ModeSubset::all(const WWParams& params) {
    ModeSubset s;
    for (int k = 0; k < params.mode_count(); ++k) s.indices.push_back(k);
    return s;
}

ModeSubset ModeSubset::window(const WWParams& params, double delta_nu) {
    if (!(delta_nu >= 0.0))
        throw std::invalid_argument("window: delta_nu must be nonnegative");
    ModeSubset s;
    const double slack = 1e-12 * std::max(1.0, delta_nu);
    for (int k = 0; k < params.mode_count(); ++k)
        if (std::abs(params.detunings(k)) <= delta_nu + slack)
            s.indices.push_back(k);
    return s;
}

ModeSubset ModeSubset::of(std::vector<int> indices, const WWParams& params) {
    std::vector<char> seen(static_cast<std::size_t>(params.mode_count()), 0);
    for (int k : indices) {
        if (k < 0 || k >= params.mode_count())
            throw std::invalid_argument("mode subset index out of range");
        if (seen[static_cast<std::size_t>(k)]++)
            throw std::invalid_argument("mode subset indices must be distinct");
    }
    ModeSubset s;
    s.indices = std::move(indices);
    return s;
}

double chi_prime_sq(const WWSolution& sol, const ModeSubset& subset,
                    int time_index) {
    if (time_index < 0 ||
        time_index >= static_cast<int>(sol.times.size()))
        throw std::invalid_argument("chi_prime_sq: time index out of range");
    double acc = 0.0;
    for (int k : subset.indices)
        acc += std::norm(sol.lambdas(k, time_index));
    return acc;
}

DensityMatrix two_atom_ww_reduced(double theta, cplx xi, double chi2,
                                  ReducedPair which) {
    require_theta(theta, "two_atom_ww_reduced");
    const double xi2 = std::norm(xi);
    if (chi2 < -1e-9 || xi2 + chi2 > 1.0 + 1e-9)
        throw std::invalid_argument(
            "two_atom_ww_reduced: amplitudes exceed one excitation");
    const double chi = std::sqrt(std::max(0.0, chi2));
    const double mu = std::sqrt(std::max(0.0, 1.0 - xi2 - chi2));
    // per side: atom, captured collective mode, escaped remainder
    SubsystemLayout six =
        SubsystemLayout::qubits({"A1", "G1", "E1", "A2", "G2", "E2"});
    VectorXcd u = VectorXcd::Zero(8);  // local digits A, G, E
    u(4) = xi;  // excited atom
    u(2) = chi; // captured mode
    u(1) = mu;  // escaped
    VectorXcd amp = VectorXcd::Zero(64);
    const double c = std::cos(theta), s = std::sin(theta);
    amp(0) = c;
    for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b) amp(8 * a + b) += s * u(a) * u(b);
    PureState psi = PureState::normalized(six, std::move(amp));
    const std::vector<std::string> keep =
        which == ReducedPair::atoms ? std::vector<std::string>{"A1", "A2"}
                                    : std::vector<std::string>{"G1", "G2"};
    DensityMatrix rho = reduced_state(psi, keep);
    // these states are X-shaped in the computational basis; anything off
    // the diagonal and antidiagonal signals a construction error
    const MatrixXcd& m = rho.mat();
    for (int r = 0; r < 4; ++r)
        for (int col = 0; col < 4; ++col)
            if (r != col && r + col != 3 && std::abs(m(r, col)) > 1e-12)
                throw std::runtime_error(
                    "two_atom_ww_reduced: reduced state is not X-shaped");
    return rho;
}

DensityMatrix two_atom_ww_reduced(double theta, const WWSolution& sol,
                                  const ModeSubset& subset, int time_index,
                                  ReducedPair which) {
    if (time_index < 0 || time_index >= static_cast<int>(sol.times.size()))
        throw std::invalid_argument(
            "two_atom_ww_reduced: time index out of range");
    return two_atom_ww_reduced(theta, sol.xi(time_index),
                               chi_prime_sq(sol, subset, time_index), which);
}

PureState ww_four_qubit_state(double theta, cplx xi) {
    return ww_four_qubit_state(theta, xi, 1.0 - std::norm(xi));
}

PureState ww_four_qubit_state(double theta, cplx xi, double chi2) {
    require_theta(theta, "ww_four_qubit_state");
    const double xi2 = std::norm(xi);
    if (chi2 < -1e-9 || xi2 + chi2 > 1.0 + 1e-9)
        throw std::invalid_argument(
            "ww_four_qubit_state: amplitudes exceed one excitation");
    if (xi2 + chi2 < 1.0 - 1e-6)
        throw std::invalid_argument(
            "ww_four_qubit_state: atoms plus collective modes must carry the "
            "whole excitation");
    const cplx chi(std::sqrt(std::max(0.0, chi2)), 0.0);
    return PureState::normalized(ww_layout(),
                                 pair_product_amp(theta, xi, chi));
}

namespace {

double cot(double theta) { return std::cos(theta) / std::sin(theta); }

void require_open_theta(double theta, const char* what) {
    if (!(theta > 0.0) || !(theta <= kPi / 2.0))
        throw std::invalid_argument(std::string(what) +
                                    ": theta must lie in (0, pi/2]");
}

// sign of the auxiliary concurrence quantity as a function of time
double q_at(double theta, const WWEngine& engine, ReducedPair which,
            double t) {
    const cplx x = engine.xi(t);
    // norm conservation pins the captured weight when every mode is kept
    const double chi2 = std::max(0.0, 1.0 - std::norm(x));
    return q_auxiliary(two_atom_ww_reduced(theta, x, chi2, which));
}

std::optional<double> bisect_sign_change(double theta, const WWEngine& engine,
                                         ReducedPair which, double lo,
                                         double q_lo, double cap) {
    const double gamma = engine.params().Gamma;
    double hi = lo + 1.0 / gamma;
    double q_hi = q_at(theta, engine, which, hi);
    while (q_hi * q_lo > 0.0) {
        lo = hi;
        q_lo = q_hi;
        hi *= 2.0;
        if (hi > cap) return std::nullopt;
        q_hi = q_at(theta, engine, which, hi);
    }
    const double tol = 1e-8 / gamma;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double q_mid = q_at(theta, engine, which, mid);
        if (q_mid * q_lo <= 0.0)
            hi = mid;
        else {
            lo = mid;
            q_lo = q_mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

std::optional<double> esd_death_time(double theta, double Gamma) {
    require_open_theta(theta, "esd_death_time");
    if (!(Gamma > 0.0))
        throw std::invalid_argument("esd_death_time: Gamma must be positive");
    const double c = cot(theta);
    if (c >= 1.0) return std::nullopt;  // entangled at all times
    return -std::log(1.0 - c) / Gamma;
}

std::optional<double> esb_birth_time(double theta, double Gamma) {
    require_open_theta(theta, "esb_birth_time");
    if (!(Gamma > 0.0))
        throw std::invalid_argument("esb_birth_time: Gamma must be positive");
    const double c = cot(theta);
    if (c >= 1.0) return 0.0;  // collective pair entangled immediately
    return -std::log(c) / Gamma;
}

std::optional<double> death_time_numeric(double theta, const WWEngine& engine) {
    require_open_theta(theta, "death_time_numeric");
    if (!(engine.params().Gamma > 0.0))
        throw std::invalid_argument("death_time_numeric: needs a decaying band");
    const double cap = std::min(engine.params().horizon,
                                50.0 / engine.params().Gamma);
    const double q0 = q_at(theta, engine, ReducedPair::atoms, 0.0);
    if (q0 <= 0.0) return 0.0;
    return bisect_sign_change(theta, engine, ReducedPair::atoms, 0.0, q0, cap);
}

std::optional<double> birth_time_numeric(double theta, const WWEngine& engine) {
    require_open_theta(theta, "birth_time_numeric");
    if (!(engine.params().Gamma > 0.0))
        throw std::invalid_argument("birth_time_numeric: needs a decaying band");
    const double gamma = engine.params().Gamma;
    const double cap = std::min(engine.params().horizon, 50.0 / gamma);
    // probe just after the start: robust preparations are entangled at
    // once, fragile ones show a strictly negative stretch first
    const double t0 = 1e-3 / gamma;
    const double q0 = q_at(theta, engine, ReducedPair::collective_modes, t0);
    if (q0 > 0.0) return 0.0;
    return bisect_sign_change(theta, engine, ReducedPair::collective_modes, t0,
                              q0, cap);
}

SigmaParts invariant_sigma_jc(double theta, double jt) {
    return invariant_sigma(jc_state(theta, jt), {"A1", "A2"}, {"P1", "P2"});
}

SigmaParts invariant_sigma_ww(double theta, const WWSolution& sol,
                              int time_index) {
    if (time_index < 0 || time_index >= static_cast<int>(sol.times.size()))
        throw std::invalid_argument("invariant_sigma_ww: time index out of range");
    const double chi2 =
        chi_prime_sq(sol, ModeSubset::all(sol.params), time_index);
    const PureState psi = ww_four_qubit_state(theta, sol.xi(time_index), chi2);
    return invariant_sigma(psi, {"A1", "A2"}, {"C1", "C2"});
}

double spectrum(double nu, double gamma, double e) {
    if (!(gamma > 0.0))
        throw std::invalid_argument("spectrum: width must be positive");
    const double d = nu - e;
    return gamma / (kPi * (d * d + gamma * gamma));
}

double detection_probability(double delta_nu, double gamma) {
    if (!(gamma > 0.0))
        throw std::invalid_argument(
            "detection_probability: width must be positive");
    if (!(delta_nu >= 0.0))
        throw std::invalid_argument(
            "detection_probability: window must be nonnegative");
    return (2.0 / kPi) * std::atan(delta_nu / gamma);
}

double bandwidth_threshold(double theta) {
    if (!(theta >= kPi / 4.0) || !(theta < kPi / 2.0))
        throw std::invalid_argument(
            "bandwidth_threshold: theta must lie in [pi/4, pi/2)");
    return std::tan(kPi / 2.0 * (1.0 - cot(theta)));
}

PartitionScan partition_scan(double theta, const WWSolution& sol,
                             const std::vector<double>& dnu_grid) {
    require_open_theta(theta, "partition_scan");
    if (theta >= kPi / 2.0)
        throw std::invalid_argument("partition_scan: theta must be below pi/2");
    if (!(sol.params.W > 0.0))
        throw std::invalid_argument("partition_scan: needs a flat band");
    if (dnu_grid.empty())
        throw std::invalid_argument("partition_scan: empty window grid");
    for (double d : dnu_grid)
        if (!(d >= 0.0) || d > sol.params.W)
            throw std::invalid_argument(
                "partition_scan: windows must lie in [0, W]");
    const int ti = static_cast<int>(sol.times.size()) - 1;
    PartitionScan scan;
    scan.t_used = sol.times[static_cast<std::size_t>(ti)];
    scan.xi_sq = std::norm(sol.xi(ti));
    if (scan.xi_sq > 1e-3)
        throw std::invalid_argument(
            "partition_scan: residual excited population too large; evolve "
            "further before scanning");
    scan.gamma_line = sol.params.Gamma / 2.0;
    if (theta >= kPi / 4.0) {
        scan.threshold_ratio = bandwidth_threshold(theta);
        scan.predicted_dnu = *scan.threshold_ratio * scan.gamma_line;
    }
    const cplx x = sol.xi(ti);
    for (double dnu : dnu_grid) {
        const ModeSubset w = ModeSubset::window(sol.params, dnu);
        PartitionScanRow row;
        row.delta_nu = dnu;
        row.chi2 = chi_prime_sq(sol, w, ti);
        for (int k : w.indices)
            row.chi2_product += std::norm(sol.lambdas(k, ti)) *
                                std::norm(sol.lambdas(k, ti));
        row.c_collective = concurrence_mixed(two_atom_ww_reduced(
            theta, x, row.chi2, ReducedPair::collective_modes));
        if (row.c_collective > 0.0 && !scan.located_dnu)
            scan.located_dnu = dnu;
        scan.rows.push_back(row);
    }
    return scan;
}

}  // namespace esd
