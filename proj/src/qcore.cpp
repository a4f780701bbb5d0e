#include "esd/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace esd {

SubsystemLayout::SubsystemLayout(std::vector<std::string> labels,
                                 std::vector<int> dims)
    : labels_(std::move(labels)), dims_(std::move(dims)) {
    if (labels_.empty() || labels_.size() != dims_.size())
        throw std::invalid_argument("layout needs matching labels and dims");
    std::set<std::string> seen;
    for (const auto& l : labels_)
        if (l.empty() || !seen.insert(l).second)
            throw std::invalid_argument("layout labels must be unique and nonempty");
    for (int d : dims_)
        if (d < 2) throw std::invalid_argument("subsystem dims must be >= 2");
    strides_.assign(dims_.size(), 1);
    for (int i = static_cast<int>(dims_.size()) - 1; i >= 0; --i) {
        strides_[static_cast<std::size_t>(i)] = total_;
        total_ *= dims_[static_cast<std::size_t>(i)];
    }
}

SubsystemLayout SubsystemLayout::qubits(std::vector<std::string> labels) {
    std::vector<int> dims(labels.size(), 2);
    return SubsystemLayout(std::move(labels), std::move(dims));
}

int SubsystemLayout::index_of(const std::string& label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i)
        if (labels_[i] == label) return static_cast<int>(i);
    throw std::invalid_argument("unknown subsystem label: " + label);
}

std::vector<int> SubsystemLayout::indices_of(
    const std::vector<std::string>& labels) const {
    std::vector<int> out;
    out.reserve(labels.size());
    for (const auto& l : labels) out.push_back(index_of(l));
    return out;
}

SubsystemLayout SubsystemLayout::select(
    const std::vector<int>& subsystems) const {
    std::vector<std::string> l;
    std::vector<int> d;
    for (int i : subsystems) {
        if (i < 0 || i >= count())
            throw std::invalid_argument("subsystem index out of range");
        l.push_back(labels_[static_cast<std::size_t>(i)]);
        d.push_back(dims_[static_cast<std::size_t>(i)]);
    }
    return SubsystemLayout(std::move(l), std::move(d));
}

PureState::PureState(SubsystemLayout layout, VectorXcd amplitudes)
    : layout_(std::move(layout)), amp_(std::move(amplitudes)) {
    if (amp_.size() != layout_.dim())
        throw std::invalid_argument("amplitude vector does not match layout dim");
    const double n = amp_.norm();
    if (std::abs(n - 1.0) > kNormTol)
        throw std::invalid_argument("pure state is not normalized");
}

PureState::PureState(SubsystemLayout layout, VectorXcd amplitudes, bool)
    : layout_(std::move(layout)), amp_(std::move(amplitudes)) {
    if (amp_.size() != layout_.dim())
        throw std::invalid_argument("amplitude vector does not match layout dim");
    const double n = amp_.norm();
    if (!(n > 0.0)) throw std::invalid_argument("cannot normalize a zero vector");
    amp_ /= n;
}

PureState PureState::normalized(SubsystemLayout layout, VectorXcd amplitudes) {
    return PureState(std::move(layout), std::move(amplitudes), true);
}

DensityMatrix::DensityMatrix(SubsystemLayout layout, MatrixXcd rho)
    : layout_(std::move(layout)), rho_(std::move(rho)) {
    if (rho_.rows() != layout_.dim() || rho_.cols() != layout_.dim())
        throw std::invalid_argument("density matrix does not match layout dim");
    if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > kHermTol)
        throw std::invalid_argument("density matrix is not hermitian");
    if (std::abs(rho_.trace().real() - 1.0) > kTraceTol ||
        std::abs(rho_.trace().imag()) > kTraceTol)
        throw std::invalid_argument("density matrix trace is not 1");
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho_,
                                                Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigendecomposition failed");
    evals_ = es.eigenvalues();
    if (evals_(0) < -kPsdTol)
        throw std::invalid_argument("density matrix has a negative eigenvalue");
}

Partition::Partition(std::vector<std::vector<int>> blocks, int subsystem_count)
    : blocks_(std::move(blocks)), n_(subsystem_count) {
    if (n_ < 1) throw std::invalid_argument("partition needs >= 1 subsystem");
    if (blocks_.empty()) throw std::invalid_argument("partition needs >= 1 block");
    std::vector<int> seen(static_cast<std::size_t>(n_), 0);
    for (auto& b : blocks_) {
        if (b.empty()) throw std::invalid_argument("partition blocks must be nonempty");
        std::sort(b.begin(), b.end());
        for (int i : b) {
            if (i < 0 || i >= n_)
                throw std::invalid_argument("partition member out of range");
            if (seen[static_cast<std::size_t>(i)]++)
                throw std::invalid_argument("partition members must be disjoint");
        }
    }
    for (int c : seen)
        if (!c) throw std::invalid_argument("partition must cover all subsystems");
    std::sort(blocks_.begin(), blocks_.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    owner_.assign(static_cast<std::size_t>(n_), -1);
    for (std::size_t b = 0; b < blocks_.size(); ++b)
        for (int i : blocks_[b]) owner_[static_cast<std::size_t>(i)] = static_cast<int>(b);
}

std::string Partition::to_string(const SubsystemLayout& layout) const {
    if (layout.count() != n_)
        throw std::invalid_argument("partition does not match layout");
    std::string out;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        if (b) out += '|';
        for (int i : blocks_[b]) out += layout.label_of(i);
    }
    return out;
}

// restricted growth strings: a[0] = 0, a[i] <= 1 + max(a[0..i-1]); each
// string with exactly K distinct values is one partition into K blocks
std::vector<Partition> enumerate_partitions(int n, int K) {
    if (n < 1) throw std::invalid_argument("enumerate_partitions: n must be >= 1");
    if (K < 1 || K > n)
        throw std::invalid_argument("enumerate_partitions: K must be in [1, n]");
    std::vector<Partition> out;
    std::vector<int> a(static_cast<std::size_t>(n), 0);
    auto rec = [&](auto&& self, int i, int used) -> void {
        if (i == n) {
            if (used != K) return;
            std::vector<std::vector<int>> blocks(static_cast<std::size_t>(K));
            for (int j = 0; j < n; ++j)
                blocks[static_cast<std::size_t>(a[static_cast<std::size_t>(j)])]
                    .push_back(j);
            out.emplace_back(std::move(blocks), n);
            return;
        }
        // prune: remaining slots must be able to reach K classes
        if (used + (n - i) < K) return;
        for (int v = 0; v <= std::min(used, K - 1); ++v) {
            a[static_cast<std::size_t>(i)] = v;
            self(self, i + 1, std::max(used, v + 1));
        }
    };
    rec(rec, 1, 1);
    return out;
}

PureState tensor_product(const PureState& a, const PureState& b) {
    std::vector<std::string> labels = a.layout().labels();
    labels.insert(labels.end(), b.layout().labels().begin(),
                  b.layout().labels().end());
    std::vector<int> dims = a.layout().dims();
    dims.insert(dims.end(), b.layout().dims().begin(), b.layout().dims().end());
    SubsystemLayout layout(std::move(labels), std::move(dims));
    VectorXcd amp(layout.dim());
    const std::int64_t db = b.layout().dim();
    for (std::int64_t i = 0; i < a.layout().dim(); ++i)
        for (std::int64_t j = 0; j < db; ++j) amp(i * db + j) = a[i] * b[j];
    return PureState(std::move(layout), std::move(amp));
}

namespace {

// composite offsets of every sub-index over the given subsystems
std::vector<std::int64_t> offsets_over(const SubsystemLayout& layout,
                                       const std::vector<int>& subsystems) {
    std::int64_t d = 1;
    for (int i : subsystems) d *= layout.dim_of(i);
    std::vector<std::int64_t> off(static_cast<std::size_t>(d), 0);
    for (std::int64_t x = 0; x < d; ++x) {
        std::int64_t rem = x, o = 0;
        for (int p = static_cast<int>(subsystems.size()) - 1; p >= 0; --p) {
            const int i = subsystems[static_cast<std::size_t>(p)];
            o += (rem % layout.dim_of(i)) * layout.stride(i);
            rem /= layout.dim_of(i);
        }
        off[static_cast<std::size_t>(x)] = o;
    }
    return off;
}

std::vector<int> complement_of(const SubsystemLayout& layout,
                               const std::vector<int>& keep) {
    std::vector<char> kept(static_cast<std::size_t>(layout.count()), 0);
    for (int i : keep) {
        if (i < 0 || i >= layout.count())
            throw std::invalid_argument("kept subsystem out of range");
        if (kept[static_cast<std::size_t>(i)])
            throw std::invalid_argument("kept subsystems must be distinct");
        kept[static_cast<std::size_t>(i)] = 1;
    }
    std::vector<int> rest;
    for (int i = 0; i < layout.count(); ++i)
        if (!kept[static_cast<std::size_t>(i)]) rest.push_back(i);
    return rest;
}

}  // namespace

DensityMatrix reduced_state(const PureState& psi, const std::vector<int>& keep) {
    if (keep.empty()) throw std::invalid_argument("must keep >= 1 subsystem");
    std::vector<int> k = keep;
    std::sort(k.begin(), k.end());
    const std::vector<int> rest = complement_of(psi.layout(), k);
    const auto koff = offsets_over(psi.layout(), k);
    const auto toff = offsets_over(psi.layout(), rest);
    const std::int64_t dk = static_cast<std::int64_t>(koff.size());
    MatrixXcd rho = MatrixXcd::Zero(dk, dk);
    for (const std::int64_t t : toff)
        for (std::int64_t r = 0; r < dk; ++r) {
            const cplx ar = psi[koff[static_cast<std::size_t>(r)] + t];
            if (ar == cplx(0.0, 0.0)) continue;
            for (std::int64_t c = 0; c < dk; ++c)
                rho(r, c) += ar * std::conj(psi[koff[static_cast<std::size_t>(c)] + t]);
        }
    // symmetrize away rounding before validation
    rho = ((rho + rho.adjoint()) / 2.0).eval();
    return DensityMatrix(psi.layout().select(k), std::move(rho));
}

DensityMatrix reduced_state(const PureState& psi,
                            const std::vector<std::string>& keep_labels) {
    return reduced_state(psi, psi.layout().indices_of(keep_labels));
}

SchmidtDecomposition schmidt(const PureState& psi, const Partition& cut) {
    if (cut.block_count() != 2)
        throw std::invalid_argument("schmidt needs a two-block partition");
    if (cut.subsystem_count() != psi.layout().count())
        throw std::invalid_argument("partition does not match layout");
    const auto loff = offsets_over(psi.layout(), cut.block(0));
    const auto roff = offsets_over(psi.layout(), cut.block(1));
    MatrixXcd m(static_cast<std::int64_t>(loff.size()),
                static_cast<std::int64_t>(roff.size()));
    for (std::size_t r = 0; r < loff.size(); ++r)
        for (std::size_t c = 0; c < roff.size(); ++c)
            m(static_cast<std::int64_t>(r), static_cast<std::int64_t>(c)) =
                psi[loff[r] + roff[c]];
    Eigen::JacobiSVD<MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SchmidtDecomposition out;
    out.coefficients = svd.singularValues();
    out.left = svd.matrixU();
    out.right = svd.matrixV().conjugate();
    return out;
}

double entropy_of_spectrum(const VectorXd& probabilities) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
        const double p = probabilities(i);
        if (p < -kPsdTol)
            throw std::invalid_argument("entropy of a negative probability");
        if (p > kPsdTol) s -= p * std::log2(p);
    }
    return s;
}

double von_neumann_entropy(const DensityMatrix& rho) {
    return entropy_of_spectrum(rho.eigenvalues());
}

double binary_entropy(double p) {
    if (p < -kPsdTol || p > 1.0 + kPsdTol)
        throw std::invalid_argument("binary_entropy argument outside [0,1]");
    double s = 0.0;
    if (p > kPsdTol) s -= p * std::log2(p);
    if (1.0 - p > kPsdTol) s -= (1.0 - p) * std::log2(1.0 - p);
    return s;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double gaussian(std::mt19937_64& rng) {
    // Box-Muller on raw 64-bit draws; u1 in (0,1], u2 in [0,1)
    const double u1 =
        (static_cast<double>(rng() >> 11) + 1.0) / 9007199254740993.0;
    const double u2 = static_cast<double>(rng() >> 11) / 9007199254740992.0;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
}

VectorXcd gaussian_vector(std::int64_t dim, std::mt19937_64& rng) {
    VectorXcd v(dim);
    for (std::int64_t i = 0; i < dim; ++i) {
        const double re = gaussian(rng);
        const double im = gaussian(rng);
        v(i) = cplx(re, im);
    }
    return v;
}

PureState haar_state(const SubsystemLayout& layout, std::mt19937_64& rng) {
    return PureState::normalized(layout, gaussian_vector(layout.dim(), rng));
}

MatrixXcd haar_unitary(std::int64_t dim, std::mt19937_64& rng) {
    MatrixXcd g(dim, dim);
    for (std::int64_t j = 0; j < dim; ++j) g.col(j) = gaussian_vector(dim, rng);
    Eigen::HouseholderQR<MatrixXcd> qr(g);
    MatrixXcd q = qr.householderQ() * MatrixXcd::Identity(dim, dim);
    MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    // fix the phase gauge so the distribution is Haar
    for (std::int64_t j = 0; j < dim; ++j) {
        const cplx d = r(j, j);
        q.col(j) *= (std::abs(d) > 0.0) ? d / std::abs(d) : cplx(1.0, 0.0);
    }
    return q;
}

}  // namespace esd
