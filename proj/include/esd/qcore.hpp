#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

namespace esd {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// validation tolerances shared across the state types
inline constexpr double kNormTol = 1e-12;
inline constexpr double kHermTol = 1e-10;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;

// kron(a, b): the first factor owns the most significant digits of the
// composite index, matching the row-major index convention used throughout.
template <class DA, class DB>
Eigen::Matrix<typename DA::Scalar, Eigen::Dynamic, Eigen::Dynamic>
kron(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
    Eigen::Matrix<typename DA::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(
        a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
                a(i, j) * b;
    return out;
}

// Ordered list of labelled subsystems with local dimensions.  The basis
// index of the composite space is row-major mixed radix: the first
// subsystem is the most significant digit.
class SubsystemLayout {
  public:
    SubsystemLayout(std::vector<std::string> labels, std::vector<int> dims);

    // all-qubit convenience
    static SubsystemLayout qubits(std::vector<std::string> labels);

    int count() const { return static_cast<int>(dims_.size()); }
    std::int64_t dim() const { return total_; }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<int>& dims() const { return dims_; }
    int dim_of(int i) const { return dims_.at(static_cast<std::size_t>(i)); }
    const std::string& label_of(int i) const {
        return labels_.at(static_cast<std::size_t>(i));
    }

    // stride of subsystem i in the composite index
    std::int64_t stride(int i) const {
        return strides_.at(static_cast<std::size_t>(i));
    }

    // position of a label; throws if absent
    int index_of(const std::string& label) const;
    std::vector<int> indices_of(const std::vector<std::string>& labels) const;

    // layout restricted to the given subsystems, in the given order
    SubsystemLayout select(const std::vector<int>& subsystems) const;

    // digit of subsystem i in composite index x
    int digit(std::int64_t x, int i) const {
        return static_cast<int>((x / stride(i)) %
                                dims_[static_cast<std::size_t>(i)]);
    }

    bool operator==(const SubsystemLayout& other) const {
        return labels_ == other.labels_ && dims_ == other.dims_;
    }

  private:
    std::vector<std::string> labels_;
    std::vector<int> dims_;
    std::vector<std::int64_t> strides_;
    std::int64_t total_ = 1;
};

// Normalized pure state on a layout.  Construction checks the norm to
// kNormTol; use normalized() to renormalize an unnormalized amplitude
// vector instead.
class PureState {
  public:
    PureState(SubsystemLayout layout, VectorXcd amplitudes);
    static PureState normalized(SubsystemLayout layout, VectorXcd amplitudes);

    const SubsystemLayout& layout() const { return layout_; }
    const VectorXcd& amp() const { return amp_; }
    cplx operator[](std::int64_t i) const { return amp_(i); }

  private:
    PureState(SubsystemLayout layout, VectorXcd amplitudes, bool renorm);
    SubsystemLayout layout_;
    VectorXcd amp_;
};

// Density operator on a layout.  Construction validates hermiticity,
// unit trace, and positivity (eigenvalues >= -kPsdTol).
class DensityMatrix {
  public:
    DensityMatrix(SubsystemLayout layout, MatrixXcd rho);

    const SubsystemLayout& layout() const { return layout_; }
    const MatrixXcd& mat() const { return rho_; }
    // real spectrum in increasing order, computed once at construction
    const VectorXd& eigenvalues() const { return evals_; }

  private:
    SubsystemLayout layout_;
    MatrixXcd rho_;
    VectorXd evals_;
};

// Partition of subsystems {0..n-1} into K nonempty blocks, held in
// canonical form: members ascending within a block, blocks ordered by
// smallest member.
class Partition {
  public:
    Partition(std::vector<std::vector<int>> blocks, int subsystem_count);

    int block_count() const { return static_cast<int>(blocks_.size()); }
    int subsystem_count() const { return n_; }
    const std::vector<std::vector<int>>& blocks() const { return blocks_; }
    const std::vector<int>& block(int b) const {
        return blocks_.at(static_cast<std::size_t>(b));
    }
    // block containing subsystem i
    int block_of(int i) const { return owner_.at(static_cast<std::size_t>(i)); }

    // e.g. "A1P1|A2P2" under the given layout
    std::string to_string(const SubsystemLayout& layout) const;

    bool operator==(const Partition& other) const {
        return n_ == other.n_ && blocks_ == other.blocks_;
    }

  private:
    std::vector<std::vector<int>> blocks_;
    std::vector<int> owner_;
    int n_ = 0;
};

// all partitions of n subsystems into exactly K blocks, in restricted
// growth string order (deterministic); size is the Stirling number S(n,K)
std::vector<Partition> enumerate_partitions(int n, int K);

struct SchmidtDecomposition {
    VectorXd coefficients;  // nonnegative, decreasing
    MatrixXcd left;         // columns are the left Schmidt vectors
    MatrixXcd right;        // columns are the right Schmidt vectors
};

PureState tensor_product(const PureState& a, const PureState& b);

// partial trace onto the kept subsystems (ascending layout order)
DensityMatrix reduced_state(const PureState& psi, const std::vector<int>& keep);
DensityMatrix reduced_state(const PureState& psi,
                            const std::vector<std::string>& keep_labels);
// braced index lists would otherwise be ambiguous against the label
// overload (0 converts to const char*)
inline DensityMatrix reduced_state(const PureState& psi,
                                   std::initializer_list<int> keep) {
    return reduced_state(psi, std::vector<int>(keep));
}

// Schmidt decomposition across a two-block partition
SchmidtDecomposition schmidt(const PureState& psi, const Partition& cut);

// von Neumann entropy in bits; eigenvalues below kPsdTol are treated as 0
double von_neumann_entropy(const DensityMatrix& rho);
// entropy of a bare spectrum (same clamping rules)
double entropy_of_spectrum(const VectorXd& probabilities);
// binary entropy h(p) in bits
double binary_entropy(double p);

// splitmix64 step, used to derive independent deterministic substreams
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// standard normal via Box-Muller on the raw 64-bit stream, so sampled
// states are reproducible across standard library implementations
double gaussian(std::mt19937_64& rng);
VectorXcd gaussian_vector(std::int64_t dim, std::mt19937_64& rng);
PureState haar_state(const SubsystemLayout& layout, std::mt19937_64& rng);
// Haar random unitary via QR of a Ginibre sample
MatrixXcd haar_unitary(std::int64_t dim, std::mt19937_64& rng);

}  // namespace esd
