#pragma once

// Dense complex linear algebra shared by every other module: hermitian
// eigendecomposition, partial trace/transpose over an atom (x) field split,
// trace norm and von Neumann entropy.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "jcsim/error.hpp"

namespace jcsim {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermitianTol = 1e-10;
/// Eigenvalues at or below this are treated as exact zeros in entropies.
inline constexpr double kEigenClamp = 1e-12;
/// Largest negative eigenvalue / trace error tolerated for a density matrix.
inline constexpr double kDensityTol = 1e-9;

/// Partition of a composite index into atom and field factors.
///
/// Composite index = atom_index * dim_f + field_index, with atom index 0 the
/// excited state |e> and 1 the ground state |g>.
struct BipartiteShape {
    std::size_t dim_a = 2;
    std::size_t dim_f = 1;

    std::size_t dim() const noexcept { return dim_a * dim_f; }
    std::size_t index(std::size_t atom, std::size_t field) const noexcept { return atom * dim_f + field; }
};

/// Which factor a partial trace removes.
enum class Subsystem { Atom, Field };

struct HermitianEigen {
    RealVector values;     // descending
    ComplexMatrix vectors; // columns, matching `values`
};

namespace detail {

inline void require_square(const ComplexMatrix& m, const char* where) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw ShapeMismatch(std::string(where) + ": matrix must be square and non-empty");
}

inline void require_shape(const ComplexMatrix& m, const BipartiteShape& shape, const char* where) {
    require_square(m, where);
    if (shape.dim_a == 0 || shape.dim_f == 0 || static_cast<std::size_t>(m.rows()) != shape.dim())
        throw ShapeMismatch(std::string(where) + ": shape " + std::to_string(shape.dim_a) + "x" +
                            std::to_string(shape.dim_f) + " does not partition dim " + std::to_string(m.rows()));
}

} // namespace detail

inline double hermiticity_defect(const ComplexMatrix& m) {
    if (m.size() == 0) return 0.0;
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const ComplexMatrix& m, double tol = kHermitianTol) {
    return m.rows() == m.cols() && hermiticity_defect(m) <= tol;
}

inline void require_hermitian(const ComplexMatrix& m, const char* where, double tol = kHermitianTol) {
    detail::require_square(m, where);
    const double defect = hermiticity_defect(m);
    if (defect > tol)
        throw NonHermitian(std::string(where) + ": |m - m^dagger| = " + std::to_string(defect));
}

/// (m + m^dagger) / 2
inline ComplexMatrix hermitian_part(const ComplexMatrix& m) { return (m + m.adjoint()) * 0.5; }

inline HermitianEigen hermitian_eigen(const ComplexMatrix& m) {
    require_hermitian(m, "hermitian_eigen");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) throw NoConvergence("hermitian_eigen: QR iteration budget exhausted");
    // Eigen sorts ascending; flip to descending.
    const auto n = m.rows();
    HermitianEigen out{RealVector(n), ComplexMatrix(n, n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values(i) = solver.eigenvalues()(n - 1 - i);
        out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
    }
    return out;
}

/// Eigenvalues only, descending. Cheaper than hermitian_eigen; used in hot loops.
inline RealVector hermitian_eigenvalues(const ComplexMatrix& m) {
    require_hermitian(m, "hermitian_eigenvalues");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NoConvergence("hermitian_eigenvalues: QR iteration budget exhausted");
    RealVector v = solver.eigenvalues().reverse();
    return v;
}

inline ComplexMatrix partial_trace(const ComplexMatrix& m, const BipartiteShape& shape, Subsystem traced) {
    detail::require_shape(m, shape, "partial_trace");
    const auto da = static_cast<Eigen::Index>(shape.dim_a);
    const auto df = static_cast<Eigen::Index>(shape.dim_f);
    if (traced == Subsystem::Field) {
        ComplexMatrix out(da, da);
        for (Eigen::Index a = 0; a < da; ++a)
            for (Eigen::Index b = 0; b < da; ++b) out(a, b) = m.block(a * df, b * df, df, df).trace();
        return out;
    }
    ComplexMatrix out = ComplexMatrix::Zero(df, df);
    for (Eigen::Index a = 0; a < da; ++a) out += m.block(a * df, a * df, df, df);
    return out;
}

/// Transpose on the atom index: block (a,b) moves to (b,a). Involutive.
inline ComplexMatrix partial_transpose(const ComplexMatrix& m, const BipartiteShape& shape) {
    detail::require_shape(m, shape, "partial_transpose");
    const auto da = static_cast<Eigen::Index>(shape.dim_a);
    const auto df = static_cast<Eigen::Index>(shape.dim_f);
    ComplexMatrix out(m.rows(), m.cols());
    for (Eigen::Index a = 0; a < da; ++a)
        for (Eigen::Index b = 0; b < da; ++b) out.block(a * df, b * df, df, df) = m.block(b * df, a * df, df, df);
    return out;
}

inline double trace_norm(const ComplexMatrix& m) { return hermitian_eigenvalues(m).cwiseAbs().sum(); }

/// -sum p log2 p over the given spectrum, with |p| <= kEigenClamp contributing 0.
inline double entropy_bits(std::span<const double> spectrum) {
    double s = 0.0;
    for (double p : spectrum)
        if (p > kEigenClamp) s -= p * std::log2(p);
    return s;
}

inline double entropy_bits(const RealVector& spectrum) {
    return entropy_bits(std::span<const double>(spectrum.data(), static_cast<std::size_t>(spectrum.size())));
}

/// Throws NotDensityMatrix unless the spectrum is a probability vector to kDensityTol.
inline void require_density_spectrum(const RealVector& spectrum, const char* where, double tol = kDensityTol) {
    const double trace = spectrum.sum();
    const double min_eig = spectrum.minCoeff();
    if (std::abs(trace - 1.0) > tol)
        throw NotDensityMatrix(std::string(where) + ": trace " + std::to_string(trace));
    if (min_eig < -tol) throw NotDensityMatrix(std::string(where) + ": eigenvalue " + std::to_string(min_eig));
}

inline double von_neumann_entropy(const ComplexMatrix& m) {
    const RealVector spectrum = hermitian_eigenvalues(m);
    require_density_spectrum(spectrum, "von_neumann_entropy");
    return std::clamp(entropy_bits(spectrum), 0.0, std::log2(static_cast<double>(m.rows())));
}

/// Checks that m is a density matrix, to kDensityTol.
inline void require_density_matrix(const ComplexMatrix& m, const char* where) {
    detail::require_square(m, where);
    if (hermiticity_defect(m) > kHermitianTol) throw NotDensityMatrix(std::string(where) + ": not hermitian");
    require_density_spectrum(hermitian_eigenvalues(m), where);
}

inline ComplexMatrix projector(const ComplexVector& psi) { return psi * psi.adjoint(); }

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline double purity(const ComplexMatrix& rho) { return (rho * rho).trace().real(); }

} // namespace jcsim
