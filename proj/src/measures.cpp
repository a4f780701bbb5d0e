#include "esd/measures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace esd {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_qubits(const SubsystemLayout& layout, int n, const char* what) {
    if (layout.count() != n)
        throw std::invalid_argument(std::string(what) + ": wrong subsystem count");
    for (int i = 0; i < n; ++i)
        if (layout.dim_of(i) != 2)
            throw std::invalid_argument(std::string(what) + ": qubits required");
}

// spin-flip overlap sum_x (-1)^popcount(x) conj(c_x) conj(c_{~x})
cplx spin_flip_overlap(const VectorXcd& c, int n) {
    const std::int64_t d = std::int64_t{1} << n;
    const std::int64_t mask = d - 1;
    cplx s(0.0, 0.0);
    for (std::int64_t x = 0; x < d; ++x) {
        const double sign =
            (__builtin_popcountll(static_cast<unsigned long long>(x)) & 1) ? -1.0
                                                                           : 1.0;
        s += sign * std::conj(c(x)) * std::conj(c(x ^ mask));
    }
    return s;
}

// sy x sy; real and symmetric because the two imaginary factors cancel
MatrixXcd double_spin_flip() {
    MatrixXcd yy = MatrixXcd::Zero(4, 4);
    yy(0, 3) = -1.0;
    yy(1, 2) = 1.0;
    yy(2, 1) = 1.0;
    yy(3, 0) = -1.0;
    return yy;
}

MatrixXcd hermitian_sqrt(const MatrixXcd& m) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigendecomposition failed");
    VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * lam.cwiseSqrt().asDiagonal() *
           es.eigenvectors().adjoint();
}

// eigenvalues of a 2x2 hermitian matrix without a solver
void herm2_eigs(const MatrixXcd& m, double& lo, double& hi) {
    const double tr = m(0, 0).real() + m(1, 1).real();
    const double df = m(0, 0).real() - m(1, 1).real();
    const double r = std::sqrt(df * df / 4.0 + std::norm(m(0, 1)));
    lo = tr / 2.0 - r;
    hi = tr / 2.0 + r;
}

double herm2_entropy(const MatrixXcd& m) {
    double lo, hi;
    herm2_eigs(m, lo, hi);
    VectorXd p(2);
    p << lo, hi;
    return entropy_of_spectrum(p);
}

}  // namespace

double n_concurrence(const PureState& psi) {
    const int n = psi.layout().count();
    require_qubits(psi.layout(), n, "n_concurrence");
    if (n % 2 != 0)
        throw std::invalid_argument(
            "n_concurrence: the spin-flip overlap vanishes identically for odd "
            "qubit counts");
    return std::abs(spin_flip_overlap(psi.amp(), n));
}

double concurrence_pure(const PureState& psi) {
    require_qubits(psi.layout(), 2, "concurrence_pure");
    return std::abs(spin_flip_overlap(psi.amp(), 2));
}

double q_auxiliary(const DensityMatrix& rho) {
    require_qubits(rho.layout(), 2, "q_auxiliary");
    // with S = sqrt(rho) hermitian and Y = sy x sy real, S rho~ S equals
    // M M^H for M = S Y S^T, so the four decreasing square roots are the
    // singular values of M; the SVD delivers the small ones at rounding
    // level rather than as square roots of clamped rounding noise
    const MatrixXcd s = hermitian_sqrt(rho.mat());
    const MatrixXcd m = s * double_spin_flip() * s.transpose();
    Eigen::JacobiSVD<MatrixXcd> svd(m);
    const VectorXd& sv = svd.singularValues();  // decreasing
    return sv(0) - sv(1) - sv(2) - sv(3);
}

double concurrence_mixed(const DensityMatrix& rho) {
    return std::max(0.0, q_auxiliary(rho));
}

SigmaParts invariant_sigma(const PureState& psi,
                           const std::vector<std::string>& atom_labels,
                           const std::vector<std::string>& partner_labels) {
    require_qubits(psi.layout(), 4, "invariant_sigma");
    if (atom_labels.size() != 2 || partner_labels.size() != 2)
        throw std::invalid_argument("invariant_sigma: two labels per pair");
    std::vector<int> all = psi.layout().indices_of(atom_labels);
    std::vector<int> pp = psi.layout().indices_of(partner_labels);
    all.insert(all.end(), pp.begin(), pp.end());
    std::sort(all.begin(), all.end());
    for (int i = 0; i < 4; ++i)
        if (all[static_cast<std::size_t>(i)] != i)
            throw std::invalid_argument(
                "invariant_sigma: atom and partner labels must partition the "
                "state");
    SigmaParts out;
    out.q_aa = q_auxiliary(reduced_state(psi, atom_labels));
    out.q_pp = q_auxiliary(reduced_state(psi, partner_labels));
    out.c4 = n_concurrence(psi);
    out.sigma = out.q_aa + out.q_pp + out.c4;
    return out;
}

double discord_pure_bipartition(const PureState& psi, const Partition& cut) {
    if (cut.block_count() != 2)
        throw std::invalid_argument(
            "discord_pure_bipartition needs a two-block partition");
    if (cut.subsystem_count() != psi.layout().count())
        throw std::invalid_argument("partition does not match layout");
    return von_neumann_entropy(reduced_state(psi, cut.block(0)));
}

namespace {

// average conditional entropy of qubit A after projecting qubit B onto
// the direction (theta_m, phi_m) and its antipode
double conditional_entropy(const MatrixXcd& rho, double tm, double pm) {
    const cplx n0(std::cos(tm / 2.0), 0.0);
    const cplx n1 = std::polar(std::sin(tm / 2.0), pm);
    double total = 0.0;
    for (int s = 0; s < 2; ++s) {
        // outcome vectors: n and its antipode (sin(t/2), -e^{ip} cos(t/2))
        const cplx v0 = s ? cplx(std::sin(tm / 2.0), 0.0) : n0;
        const cplx v1 = s ? -std::polar(std::cos(tm / 2.0), pm) : n1;
        MatrixXcd m(2, 2);
        for (int a = 0; a < 2; ++a)
            for (int ap = 0; ap < 2; ++ap) {
                cplx acc(0.0, 0.0);
                const cplx vv[2] = {v0, v1};
                for (int b1 = 0; b1 < 2; ++b1)
                    for (int b2 = 0; b2 < 2; ++b2)
                        acc += std::conj(vv[b1]) * rho(2 * a + b1, 2 * ap + b2) *
                               vv[b2];
                m(a, ap) = acc;
            }
        const double p = m(0, 0).real() + m(1, 1).real();
        if (p > 1e-14) total += p * herm2_entropy(m / p);
    }
    return total;
}

struct Probe {
    double tm, pm, val;
};

// greedy compass descent: move to the best of the four axis neighbours,
// halve the step when none improves
Probe compass(const MatrixXcd& rho, Probe start, double step, double floor,
              int max_iters, int& iters) {
    Probe cur = start;
    while (step > floor && iters < max_iters) {
        ++iters;
        Probe best = cur;
        const double cand[4][2] = {{cur.tm + step, cur.pm},
                                   {cur.tm - step, cur.pm},
                                   {cur.tm, cur.pm + step},
                                   {cur.tm, cur.pm - step}};
        for (const auto& c : cand) {
            double tm = std::clamp(c[0], 0.0, kPi);
            double pm = std::fmod(c[1], 2.0 * kPi);
            if (pm < 0.0) pm += 2.0 * kPi;
            const double v = conditional_entropy(rho, tm, pm);
            if (v < best.val) best = {tm, pm, v};
        }
        if (best.val < cur.val)
            cur = best;
        else
            step /= 2.0;
    }
    return cur;
}

}  // namespace

DiscordResult discord_two_qubit(const DensityMatrix& rho,
                                const DiscordOptions& opts) {
    require_qubits(rho.layout(), 2, "discord_two_qubit");
    if (opts.grid < 8)
        throw std::invalid_argument("discord grid must be >= 8 points per angle");
    if (!(opts.tolerance > 0.0))
        throw std::invalid_argument("discord tolerance must be positive");
    if (opts.max_iterations < 1)
        throw std::invalid_argument("discord max_iterations must be >= 1");

    const MatrixXcd& r = rho.mat();
    // marginal of the measured qubit
    MatrixXcd rb = MatrixXcd::Zero(2, 2);
    for (int a = 0; a < 2; ++a)
        for (int b1 = 0; b1 < 2; ++b1)
            for (int b2 = 0; b2 < 2; ++b2) rb(b1, b2) += r(2 * a + b1, 2 * a + b2);
    const double s_b = herm2_entropy(rb);
    const double s_ab = entropy_of_spectrum(rho.eigenvalues());

    // coarse scan; ties keep the lowest grid index
    Probe best{0.0, 0.0, 0.0};
    bool first = true;
    for (int i = 0; i < opts.grid; ++i) {
        const double tm = kPi * static_cast<double>(i) /
                          static_cast<double>(opts.grid - 1);
        for (int j = 0; j < opts.grid; ++j) {
            const double pm =
                2.0 * kPi * static_cast<double>(j) / static_cast<double>(opts.grid);
            const double v = conditional_entropy(r, tm, pm);
            if (first || v < best.val) {
                best = {tm, pm, v};
                first = false;
            }
        }
    }

    // refine until the step reaches the angular floor implied by the
    // value tolerance (the objective is quadratic around the minimum)
    const double floor =
        std::max(1e-9, 0.01 * std::sqrt(opts.tolerance));
    int iters = 0;
    const double step0 = kPi / static_cast<double>(opts.grid - 1);
    Probe refined = compass(r, best, step0, floor, opts.max_iterations, iters);

    // perturbation restarts guard against a ridge trapping the descent
    for (int k = 0; k < 2; ++k) {
        std::mt19937_64 rng(mix_seed(opts.seed, static_cast<std::uint64_t>(k)));
        const double dt = 0.2 * (static_cast<double>(rng() >> 11) / 9007199254740992.0 - 0.5);
        const double dp = 0.2 * (static_cast<double>(rng() >> 11) / 9007199254740992.0 - 0.5);
        Probe seed{std::clamp(refined.tm + dt, 0.0, kPi), refined.pm + dp, 0.0};
        seed.val = conditional_entropy(r, seed.tm, seed.pm);
        Probe alt = compass(r, seed, 0.05, floor, opts.max_iterations, iters);
        if (alt.val < refined.val) refined = alt;
    }

    DiscordResult out;
    out.theta_m = refined.tm;
    out.phi_m = refined.pm;
    out.iterations = iters;
    out.converged = iters < opts.max_iterations;
    out.value = std::max(0.0, s_b - s_ab + refined.val);
    return out;
}

}  // namespace esd
