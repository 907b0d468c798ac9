// Exact few-qubit state algebra: density matrices, Pauli correlation
// tensors, marginals, purity, local-unitary action and the reference
// states used throughout the test and simulation pipelines.
//
// The canonical representation is the real correlation tensor
//   T[mu_1 .. mu_n] = tr(rho * sigma_mu1 x ... x sigma_mun),
// stored flat with qubit q occupying base-4 digit q (sigma_0 = identity,
// 1 = x, 2 = y, 3 = z). The density matrix is the secondary view.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "randcorr/rng.hpp"
#include "randcorr/subset.hpp"

namespace randcorr {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr int kMaxQubits = 6;
inline constexpr double kHermTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kEigenTol = -1e-9;

inline void require_qubit_count(int n) {
    if (n < 1 || n > kMaxQubits)
        throw std::invalid_argument("qubit count must be in 1.." + std::to_string(kMaxQubits));
}

// --------------------------------------------------------------------------
// Pauli bookkeeping
// --------------------------------------------------------------------------

// sigma_p |b> = pauli_coeff(p, b) |b ^ pauli_flip(p)>
inline constexpr int pauli_flip(int p) { return (p == 1 || p == 2) ? 1 : 0; }

inline Complex pauli_coeff(int p, int b) {
    switch (p) {
        case 0: return {1.0, 0.0};
        case 1: return {1.0, 0.0};
        case 2: return b ? Complex{0.0, -1.0} : Complex{0.0, 1.0};
        case 3: return b ? Complex{-1.0, 0.0} : Complex{1.0, 0.0};
    }
    throw std::invalid_argument("pauli index out of range");
}

inline Eigen::Matrix2cd pauli_matrix(int p) {
    Eigen::Matrix2cd m;
    switch (p) {
        case 0: m << 1, 0, 0, 1; break;
        case 1: m << 0, 1, 1, 0; break;
        case 2: m << 0, Complex(0, -1), Complex(0, 1), 0; break;
        case 3: m << 1, 0, 0, -1; break;
        default: throw std::invalid_argument("pauli index out of range");
    }
    return m;
}

// Digits of a flat tensor index (qubit q = base-4 digit q).
inline int pauli_digit(std::size_t index, int qubit) { return (index >> (2 * qubit)) & 3; }

// Bitmask of qubits carrying a non-identity Pauli.
inline std::uint32_t support_mask(std::size_t index, int n) {
    std::uint32_t m = 0;
    for (int q = 0; q < n; ++q)
        if (pauli_digit(index, q) != 0) m |= 1u << q;
    return m;
}

// --------------------------------------------------------------------------
// DensityMatrix
// --------------------------------------------------------------------------

class DensityMatrix {
  public:
    DensityMatrix(int n, Matrix m) : n_(n), m_(std::move(m)) {
        require_qubit_count(n_);
        const std::size_t dim = std::size_t(1) << n_;
        if (m_.rows() != Eigen::Index(dim) || m_.cols() != Eigen::Index(dim))
            throw std::invalid_argument("density matrix dimension mismatch");
        validate();
    }

    int qubit_count() const { return n_; }
    std::size_t dim() const { return std::size_t(1) << n_; }
    const Matrix& matrix() const { return m_; }

    double purity() const { return m_.squaredNorm(); }  // tr(rho^2) for Hermitian rho

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(m_, Eigen::EigenvaluesOnly);
        return solver.eigenvalues().minCoeff();
    }

  private:
    void validate() const {
        double herm = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
        if (herm > kHermTol)
            throw std::invalid_argument("density matrix not Hermitian (deviation " +
                                        std::to_string(herm) + ")");
        double tr = std::abs(m_.trace() - Complex(1.0, 0.0));
        if (tr > kTraceTol)
            throw std::invalid_argument("density matrix trace differs from 1 by " +
                                        std::to_string(tr));
        if (min_eigenvalue() < kEigenTol)
            throw std::invalid_argument("density matrix has negative eigenvalue " +
                                        std::to_string(min_eigenvalue()));
    }

    int n_;
    Matrix m_;
};

inline DensityMatrix pure_state(int n, Vector amplitudes) {
    require_qubit_count(n);
    if (amplitudes.size() != Eigen::Index(std::size_t(1) << n))
        throw std::invalid_argument("amplitude vector dimension mismatch");
    double norm = amplitudes.norm();
    if (norm <= 0.0) throw std::invalid_argument("zero state vector");
    amplitudes /= norm;
    return DensityMatrix(n, amplitudes * amplitudes.adjoint());
}

inline DensityMatrix maximally_mixed(int n) {
    require_qubit_count(n);
    std::size_t dim = std::size_t(1) << n;
    return DensityMatrix(n, Matrix::Identity(dim, dim) / double(dim));
}

// Convex mixture of density matrices (weights need not be normalized).
inline DensityMatrix mix(const std::vector<std::pair<double, Matrix>>& terms, int n) {
    if (terms.empty()) throw std::invalid_argument("empty mixture");
    std::size_t dim = std::size_t(1) << n;
    Matrix acc = Matrix::Zero(dim, dim);
    double total = 0.0;
    for (const auto& [w, m] : terms) {
        if (w < 0.0) throw std::invalid_argument("negative mixture weight");
        acc += w * m;
        total += w;
    }
    return DensityMatrix(n, acc / total);
}

// Product state with the factor for maskA placed on those qubit positions
// and the factor for the complement on the rest.
inline Matrix embed_product(int n, SubsetMask maskA, const Matrix& a, const Matrix& b) {
    require_within(maskA, n, "embed_product");
    const std::size_t dim = std::size_t(1) << n;
    std::vector<int> qa = maskA.qubits();
    std::vector<int> qb = SubsetMask(SubsetMask::full(n).bits & ~maskA.bits).qubits();
    if (a.rows() != Eigen::Index(std::size_t(1) << qa.size()) ||
        b.rows() != Eigen::Index(std::size_t(1) << qb.size()))
        throw std::invalid_argument("embed_product: factor dimension mismatch");
    auto extract = [](std::size_t word, const std::vector<int>& qs) {
        std::size_t out = 0;
        for (std::size_t k = 0; k < qs.size(); ++k) out |= ((word >> qs[k]) & 1u) << k;
        return out;
    };
    Matrix out(dim, dim);
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c)
            out(r, c) = a(extract(r, qa), extract(c, qa)) * b(extract(r, qb), extract(c, qb));
    return out;
}

// --------------------------------------------------------------------------
// CorrelationTensor
// --------------------------------------------------------------------------

class CorrelationTensor {
  public:
    CorrelationTensor(int n, std::vector<double> entries)
        : n_(n), entries_(std::move(entries)) {
        require_qubit_count(n_);
        if (entries_.size() != std::size_t(1) << (2 * n_))
            throw std::invalid_argument("tensor size mismatch");
    }

    static CorrelationTensor zero(int n) {
        require_qubit_count(n);
        std::vector<double> e(std::size_t(1) << (2 * n), 0.0);
        return CorrelationTensor(n, std::move(e));
    }

    int qubit_count() const { return n_; }
    std::size_t size() const { return entries_.size(); }
    const std::vector<double>& entries() const { return entries_; }
    std::vector<double>& entries() { return entries_; }

    double operator[](std::size_t flat) const { return entries_[flat]; }
    double& operator[](std::size_t flat) { return entries_[flat]; }

    // Entry lookup by per-qubit Pauli digits, first qubit first.
    double at(std::initializer_list<int> digits) const {
        return entries_[flat_index(digits)];
    }

    std::size_t flat_index(std::initializer_list<int> digits) const {
        if (int(digits.size()) != n_)
            throw std::invalid_argument("digit count must equal qubit count");
        std::size_t idx = 0;
        int q = 0;
        for (int d : digits) {
            if (d < 0 || d > 3) throw std::invalid_argument("pauli digit out of range");
            idx |= std::size_t(d) << (2 * q++);
        }
        return idx;
    }

  private:
    int n_;
    std::vector<double> entries_;
};

// tr(rho * sigma_mu1 x ... x sigma_mun) for every Pauli tuple. The identity
// entry is pinned to exactly 1 (the trace is already validated).
inline CorrelationTensor correlation_tensor(const DensityMatrix& rho) {
    const int n = rho.qubit_count();
    const std::size_t dim = rho.dim();
    const std::size_t count = std::size_t(1) << (2 * n);
    const Matrix& m = rho.matrix();
    std::vector<double> entries(count);
    for (std::size_t mu = 0; mu < count; ++mu) {
        std::size_t flip = 0;
        for (int q = 0; q < n; ++q)
            if (pauli_flip(pauli_digit(mu, q))) flip |= std::size_t(1) << q;
        Complex acc = 0.0;
        for (std::size_t r = 0; r < dim; ++r) {
            Complex coeff{1.0, 0.0};
            for (int q = 0; q < n; ++q) {
                int p = pauli_digit(mu, q);
                if (p) coeff *= pauli_coeff(p, (r >> q) & 1u);
            }
            acc += m(r, r ^ flip) * coeff;
        }
        entries[mu] = acc.real();
    }
    entries[0] = 1.0;
    return CorrelationTensor(n, std::move(entries));
}

// rho = 2^-n sum_mu T_mu sigma_mu; throws if the tensor does not describe a
// physical state.
inline DensityMatrix state_from_tensor(const CorrelationTensor& t) {
    const int n = t.qubit_count();
    if (std::abs(t[0] - 1.0) > 1e-12)
        throw std::invalid_argument("tensor identity entry must be 1");
    const std::size_t dim = std::size_t(1) << n;
    Matrix m = Matrix::Zero(dim, dim);
    for (std::size_t mu = 0; mu < t.size(); ++mu) {
        double val = t[mu];
        if (val == 0.0) continue;
        std::size_t flip = 0;
        for (int q = 0; q < n; ++q)
            if (pauli_flip(pauli_digit(mu, q))) flip |= std::size_t(1) << q;
        for (std::size_t r = 0; r < dim; ++r) {
            Complex coeff{val, 0.0};
            for (int q = 0; q < n; ++q) {
                int p = pauli_digit(mu, q);
                if (p) coeff *= pauli_coeff(p, (r >> q) & 1u);
            }
            m(r ^ flip, r) += coeff;
        }
    }
    m /= double(dim);
    try {
        return DensityMatrix(n, std::move(m));
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string("non-physical tensor: ") + e.what());
    }
}

// Marginal on `subset`: keeps entries supported inside the subset and
// re-indexes them onto |subset| qubits. Equals the tensor of the
// partial-traced state.
inline CorrelationTensor marginal_tensor(const CorrelationTensor& t, SubsetMask subset) {
    require_nonempty(subset, "marginal_tensor");
    require_within(subset, t.qubit_count(), "marginal_tensor");
    std::vector<int> kept = subset.qubits();
    const int k = int(kept.size());
    std::vector<double> out(std::size_t(1) << (2 * k));
    for (std::size_t nu = 0; nu < out.size(); ++nu) {
        std::size_t mu = 0;
        for (int j = 0; j < k; ++j)
            mu |= std::size_t(pauli_digit(nu, j)) << (2 * kept[j]);
        out[nu] = t[mu];
    }
    return CorrelationTensor(k, std::move(out));
}

// tr(rho^2) = 2^-n sum_mu T_mu^2.
inline double purity(const CorrelationTensor& t) {
    double s = 0.0;
    for (double v : t.entries()) s += v * v;
    return s / double(std::size_t(1) << t.qubit_count());
}

// Second moments of all marginal correlations at once:
//   moment[mask] = 3^-|mask| * sum of T_mu^2 over tuples supported exactly
//   on mask. moment[0] = 1.
inline std::vector<double> subset_second_moments(const CorrelationTensor& t) {
    const int n = t.qubit_count();
    std::vector<double> acc(std::size_t(1) << n, 0.0);
    for (std::size_t mu = 0; mu < t.size(); ++mu) {
        double v = t[mu];
        if (v != 0.0) acc[support_mask(mu, n)] += v * v;
    }
    for (std::size_t mask = 0; mask < acc.size(); ++mask)
        acc[mask] /= std::pow(3.0, std::popcount(std::uint32_t(mask)));
    acc[0] = 1.0;
    return acc;
}

// --------------------------------------------------------------------------
// Local unitaries
// --------------------------------------------------------------------------

class LocalUnitary {
  public:
    explicit LocalUnitary(Eigen::Matrix2cd u) : u_(std::move(u)) {
        double dev = (u_.adjoint() * u_ - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff();
        if (dev > kHermTol)
            throw std::invalid_argument("matrix is not unitary (deviation " +
                                        std::to_string(dev) + ")");
        if (std::abs(u_.determinant() - Complex(1.0, 0.0)) > kHermTol)
            throw std::invalid_argument("determinant must be 1 (SU(2))");
    }

    const Eigen::Matrix2cd& matrix() const { return u_; }

    // R with  U^dag sigma(a) U = sigma(R a): the Bloch rotation of the
    // effective measured direction.
    Eigen::Matrix3d bloch_rotation() const {
        Eigen::Matrix3d r;
        for (int k = 0; k < 3; ++k)
            for (int j = 0; j < 3; ++j) {
                Eigen::Matrix2cd prod =
                    pauli_matrix(k + 1) * u_.adjoint() * pauli_matrix(j + 1) * u_;
                r(k, j) = 0.5 * prod.trace().real();
            }
        return r;
    }

  private:
    Eigen::Matrix2cd u_;
};

// Haar-distributed SU(2) element via a uniform unit quaternion.
inline LocalUnitary haar_local_unitary(Rng& rng) {
    double a, b, c, d, norm2;
    do {
        a = rng.gaussian();
        b = rng.gaussian();
        c = rng.gaussian();
        d = rng.gaussian();
        norm2 = a * a + b * b + c * c + d * d;
    } while (norm2 < 1e-12);
    double inv = 1.0 / std::sqrt(norm2);
    a *= inv; b *= inv; c *= inv; d *= inv;
    Eigen::Matrix2cd u;
    u << Complex(a, b), Complex(c, d), Complex(-c, d), Complex(a, -b);
    return LocalUnitary(u);
}

inline DensityMatrix apply_local_unitaries(const DensityMatrix& rho,
                                           const std::vector<LocalUnitary>& us) {
    const int n = rho.qubit_count();
    if (int(us.size()) != n)
        throw std::invalid_argument("need exactly one unitary per qubit");
    const std::size_t dim = rho.dim();
    Matrix m = rho.matrix();
    for (int q = 0; q < n; ++q) {
        const Eigen::Matrix2cd& u = us[q].matrix();
        const std::size_t bit = std::size_t(1) << q;
        // rows: m <- (U on qubit q) m
        for (std::size_t r = 0; r < dim; ++r) {
            if (r & bit) continue;
            for (std::size_t c = 0; c < dim; ++c) {
                Complex v0 = m(r, c), v1 = m(r | bit, c);
                m(r, c) = u(0, 0) * v0 + u(0, 1) * v1;
                m(r | bit, c) = u(1, 0) * v0 + u(1, 1) * v1;
            }
        }
        // columns: m <- m (U on qubit q)^dag
        for (std::size_t c = 0; c < dim; ++c) {
            if (c & bit) continue;
            for (std::size_t r = 0; r < dim; ++r) {
                Complex v0 = m(r, c), v1 = m(r, c | bit);
                m(r, c) = v0 * std::conj(u(0, 0)) + v1 * std::conj(u(0, 1));
                m(r, c | bit) = v0 * std::conj(u(1, 0)) + v1 * std::conj(u(1, 1));
            }
        }
    }
    return DensityMatrix(n, std::move(m));
}

// --------------------------------------------------------------------------
// Reference states (four qubits)
// --------------------------------------------------------------------------

enum class ReferenceState { trisep, bisep, ghz, cluster };

inline ReferenceState reference_state_from_name(const std::string& name) {
    if (name == "trisep") return ReferenceState::trisep;
    if (name == "bisep") return ReferenceState::bisep;
    if (name == "ghz") return ReferenceState::ghz;
    if (name == "cluster") return ReferenceState::cluster;
    throw std::invalid_argument("unknown reference state: " + name);
}

inline std::string reference_state_name(ReferenceState kind) {
    switch (kind) {
        case ReferenceState::trisep: return "trisep";
        case ReferenceState::bisep: return "bisep";
        case ReferenceState::ghz: return "ghz";
        case ReferenceState::cluster: return "cluster";
    }
    throw std::invalid_argument("unknown reference state kind");
}

// Basis index convention: qubit q is bit q, so |b1 b2 b3 b4> maps to
// b1 + 2 b2 + 4 b3 + 8 b4.
inline DensityMatrix make_reference_state(ReferenceState kind, double phi = 0.0) {
    Vector v = Vector::Zero(16);
    switch (kind) {
        case ReferenceState::trisep:
            // (|00> + |11>) x |0> x |0>
            v[0b0000] = 1.0;
            v[0b0011] = 1.0;
            break;
        case ReferenceState::bisep:
            // (|00> + |11>) x (sin(phi)|00> + cos(phi)|11>)
            v[0b0000] = std::sin(phi);
            v[0b1100] = std::cos(phi);
            v[0b0011] = std::sin(phi);
            v[0b1111] = std::cos(phi);
            break;
        case ReferenceState::ghz:
            v[0b0000] = 1.0;
            v[0b1111] = 1.0;
            break;
        case ReferenceState::cluster:
            // |0000> + |0011> - |1100> + |1111>, first qubit leftmost
            v[0b0000] = 1.0;
            v[0b1100] = 1.0;   // qubits 3,4 set
            v[0b0011] = -1.0;  // qubits 1,2 set
            v[0b1111] = 1.0;
            break;
    }
    return pure_state(4, std::move(v));
}

// Bell states on two qubits: phi_plus = (|00>+|11>)/sqrt(2), phi_minus with
// a relative minus sign.
inline DensityMatrix bell_phi(bool plus) {
    Vector v = Vector::Zero(4);
    v[0] = 1.0;
    v[3] = plus ? 1.0 : -1.0;
    return pure_state(2, std::move(v));
}

}  // namespace randcorr
