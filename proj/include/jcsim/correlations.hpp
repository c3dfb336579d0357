#pragma once

// Correlation measures for atom (x) field states, all in bits:
// entanglement of formation (pure states and two qubits), logarithmic
// negativity, mutual information and quantum discord with projective
// measurements on the atom.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "jcsim/dynamics.hpp"
#include "jcsim/error.hpp"
#include "jcsim/linalg.hpp"
#include "jcsim/optimize.hpp"
#include "jcsim/states.hpp"

namespace jcsim {

/// Bloch angles of the measured atomic direction
/// |v> = cos(theta_m/2)|e> + e^{i phi_m} sin(theta_m/2)|g>.
struct ProjectorAngles {
    double theta_m = 0.0;
    double phi_m = 0.0;

    ComplexVector direction() const {
        ComplexVector v(2);
        v << std::cos(theta_m / 2.0), std::polar(std::sin(theta_m / 2.0), phi_m);
        return v;
    }
    ComplexMatrix projector() const { return jcsim::projector(direction()); }
    /// The complementary outcome I - P.
    ProjectorAngles orthogonal() const { return canonical({std::numbers::pi - theta_m, phi_m + std::numbers::pi}); }

    /// Folds arbitrary angles onto theta in [0, pi], phi in [0, 2 pi).
    static ProjectorAngles canonical(ProjectorAngles a) {
        constexpr double two_pi = 2.0 * std::numbers::pi;
        double t = std::fmod(a.theta_m, two_pi);
        if (t < 0) t += two_pi;
        double p = a.phi_m;
        if (t > std::numbers::pi) {
            t = two_pi - t;
            p += std::numbers::pi;
        }
        p = std::fmod(p, two_pi);
        if (p < 0) p += two_pi;
        return {t, p};
    }
};

struct MeasureRecord {
    double eof = 0.0;
    double ln = 0.0;
    double qd = 0.0;
    double mutual_info = 0.0;
};

inline double binary_entropy(double p) {
    const std::array<double, 2> spectrum{p, 1.0 - p};
    return entropy_bits(spectrum);
}

namespace detail {

inline void require_unit_norm(const ComplexVector& psi, const char* where) {
    const double n = psi.squaredNorm();
    if (std::abs(n - 1.0) > kDensityTol) throw NotDensityMatrix(std::string(where) + ": state norm^2 " + std::to_string(n));
}

inline void require_purity(const ComplexMatrix& rho, const char* where, double tol) {
    const double p = purity(rho);
    if (std::abs(p - 1.0) > tol) throw NotPure(std::string(where) + ": tr(rho^2) = " + std::to_string(p));
}

} // namespace detail

/// Entropy of entanglement of a pure atom (x) field state.
inline double eof_pure(const PureCompositeState& psi) {
    detail::require_unit_norm(psi.amplitudes, "eof_pure");
    const auto e = psi.excited_block();
    const auto g = psi.ground_block();
    ComplexMatrix rho_a(2, 2);
    rho_a << e.squaredNorm(), g.dot(e), e.dot(g), g.squaredNorm();
    return von_neumann_entropy(rho_a);
}

inline double eof_pure(const MappedPair& pair) {
    return von_neumann_entropy(partial_trace(pair.rho4, BipartiteShape{2, 2}, Subsystem::Field));
}

/// Entropy of entanglement of a density matrix that must be pure within `purity_tol`.
inline double eof_pure(const ComplexMatrix& rho, const BipartiteShape& shape, double purity_tol = kDensityTol) {
    require_density_matrix(rho, "eof_pure");
    detail::require_purity(rho, "eof_pure", purity_tol);
    return von_neumann_entropy(partial_trace(rho, shape, Subsystem::Field));
}

/// Eigenvalues of a unit-trace 4x4 below this are treated as roundoff.
inline constexpr double kRootNoise = 1e-14;

/// Wootters concurrence of a two-qubit state.
inline double concurrence_2x2(const ComplexMatrix& rho) {
    if (rho.rows() != 4 || rho.cols() != 4) throw ShapeMismatch("concurrence_2x2: expected a 4x4 matrix");
    require_density_matrix(rho, "concurrence_2x2");
    ComplexMatrix yy = ComplexMatrix::Zero(4, 4);
    yy(0, 3) = yy(3, 0) = -1.0;
    yy(1, 2) = yy(2, 1) = 1.0;
    const ComplexMatrix flipped = yy * rho.conjugate() * yy;

    // sqrt eigenvalues of rho * flipped, via the hermitian sqrt(rho) flipped sqrt(rho).
    // Roundoff-level eigenvalues are zeroed before each square root, which
    // would otherwise lift 1e-16 noise to 1e-8.
    auto clamped_sqrt = [](const RealVector& v) {
        return v.unaryExpr([](double x) { return x > kRootNoise ? std::sqrt(x) : 0.0; }).eval();
    };
    const HermitianEigen eig = hermitian_eigen(rho);
    const ComplexMatrix sqrt_rho = eig.vectors * clamped_sqrt(eig.values).cast<Complex>().asDiagonal() * eig.vectors.adjoint();
    const RealVector lambda = clamped_sqrt(hermitian_eigenvalues(hermitian_part(sqrt_rho * flipped * sqrt_rho)));
    return std::max(0.0, lambda(0) - lambda(1) - lambda(2) - lambda(3));
}

inline double eof_from_concurrence(double c) {
    const double c2 = std::clamp(c * c, 0.0, 1.0);
    return binary_entropy((1.0 + std::sqrt(1.0 - c2)) / 2.0);
}

/// EOF where it is well defined here: pure states of any dimension and
/// mixed two-qubit states. Mixed states above 2x2 are rejected.
inline double entanglement_of_formation(const ComplexMatrix& rho, const BipartiteShape& shape,
                                        double purity_tol = kDensityTol) {
    detail::require_shape(rho, shape, "entanglement_of_formation");
    if (std::abs(purity(rho) - 1.0) <= purity_tol) return eof_pure(rho, shape, purity_tol);
    if (shape.dim_a == 2 && shape.dim_f == 2) return eof_from_concurrence(concurrence_2x2(rho));
    throw UnsupportedRequest("entanglement of formation of a mixed state above 2x2 is not offered");
}

/// log2(2 N + 1), N the sum of |negative eigenvalues| of the partial transpose.
inline double log_negativity(const ComplexMatrix& rho, const BipartiteShape& shape) {
    require_density_matrix(rho, "log_negativity");
    const RealVector spectrum = hermitian_eigenvalues(partial_transpose(rho, shape));
    double negativity = 0.0;
    for (Eigen::Index i = 0; i < spectrum.size(); ++i)
        if (spectrum(i) < 0.0) negativity -= spectrum(i);
    return std::log2(2.0 * negativity + 1.0);
}

inline double mutual_information(const ComplexMatrix& rho, const BipartiteShape& shape) {
    require_density_matrix(rho, "mutual_information");
    const double i = von_neumann_entropy(partial_trace(rho, shape, Subsystem::Field)) +
                     von_neumann_entropy(partial_trace(rho, shape, Subsystem::Atom)) - von_neumann_entropy(rho);
    if (i < -kDensityTol) throw NotDensityMatrix("mutual_information: negative value " + std::to_string(i));
    return std::max(0.0, i);
}

struct DiscordOptions {
    std::size_t grid = 64;          // grid points per angle
    double angle_tolerance = 1e-5;  // refinement stops below this simplex size
    std::size_t max_iterations = 500;
    unsigned threads = 0;           // 0: hardware concurrency
};

struct DiscordResult {
    double value = 0.0;               // clamped to >= 0
    double unclamped = 0.0;
    double mutual_info = 0.0;
    double conditional_entropy = 0.0; // min over projectors of sum_i p_i S(rho_f^i)
    ProjectorAngles optimum;
    bool stalled = false;             // refinement hit its iteration budget
};

inline constexpr double kNegligibleOutcome = 1e-12;
inline constexpr double kDiscordFloor = -1e-6;

/// Field state conditioned on a rank-1 atomic projector, kept unnormalized.
class ConditionalStates {
  public:
    ConditionalStates(const ComplexMatrix& rho, const BipartiteShape& shape) {
        const auto df = static_cast<Eigen::Index>(shape.dim_f);
        ee_ = rho.topLeftCorner(df, df);
        eg_ = rho.topRightCorner(df, df);
        gg_ = rho.bottomRightCorner(df, df);
    }

    /// <v| rho |v> over the atom, i.e. p_v * rho_f^v.
    ComplexMatrix unnormalized(const ProjectorAngles& a) const {
        const double c = std::cos(a.theta_m / 2.0), s = std::sin(a.theta_m / 2.0);
        const ComplexMatrix cross = std::polar(c * s, a.phi_m) * eg_;
        return (c * c) * ee_ + (s * s) * gg_ + cross + cross.adjoint();
    }

    /// p_v * S(rho_f^v); zero for negligible outcomes.
    double weighted_entropy(const ProjectorAngles& a) const {
        const ComplexMatrix m = unnormalized(a);
        const double p = m.trace().real();
        if (p < kNegligibleOutcome) return 0.0;
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m, Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success) throw NoConvergence("conditional state eigenvalues");
        const RealVector spectrum = solver.eigenvalues() / p;
        return p * entropy_bits(spectrum);
    }

    /// sum over both outcomes of p_i S(rho_f^i).
    double conditional_entropy(const ProjectorAngles& a) const {
        return weighted_entropy(a) + weighted_entropy(a.orthogonal());
    }

  private:
    ComplexMatrix ee_, eg_, gg_;
};

/// Quantum discord with rank-1 projective measurements on the atom.
///
/// The conditional entropy is minimized by a uniform grid over
/// theta_m in [0, pi] (poles included) and phi_m in [0, 2 pi), then refined
/// with Nelder-Mead from the best grid cell. Grid ties resolve to the lowest
/// (theta, phi) index, so the result does not depend on thread count.
inline DiscordResult quantum_discord(const ComplexMatrix& rho, const BipartiteShape& shape,
                                     const DiscordOptions& opts = {}) {
    if (shape.dim_a != 2) throw ShapeMismatch("quantum_discord: atom must be a qubit");
    detail::require_shape(rho, shape, "quantum_discord");
    require_density_matrix(rho, "quantum_discord");
    if (opts.grid < 2) throw ConfigInvalid("quantum_discord: grid must have at least 2 points per angle");

    const double s_atom = von_neumann_entropy(partial_trace(rho, shape, Subsystem::Field));
    const double s_field = von_neumann_entropy(partial_trace(rho, shape, Subsystem::Atom));
    const double s_joint = von_neumann_entropy(rho);
    const ConditionalStates cond(rho, shape);

    // Single-outcome table. With an even phi count and theta including both
    // poles, the orthogonal outcome of cell (i, j) is cell (n-1-i, j + n/2).
    const std::size_t n = opts.grid % 2 == 0 ? opts.grid : opts.grid + 1;
    auto angles = [n](std::size_t i, std::size_t j) {
        return ProjectorAngles{std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1),
                               2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n)};
    };
    std::vector<double> table(n * n);
    auto fill_rows = [&](std::size_t first, std::size_t stride) {
        for (std::size_t i = first; i < n; i += stride)
            for (std::size_t j = 0; j < n; ++j) table[i * n + j] = cond.weighted_entropy(angles(i, j));
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(opts.threads ? opts.threads : std::thread::hardware_concurrency(),
                                                              static_cast<unsigned>(n)));
    if (threads == 1) {
        fill_rows(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(fill_rows, t, threads);
    }

    std::size_t best_i = 0, best_j = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double v = table[i * n + j] + table[(n - 1 - i) * n + (j + n / 2) % n];
            if (v < best) {
                best = v;
                best_i = i;
                best_j = j;
            }
        }

    DiscordResult out;
    out.optimum = angles(best_i, best_j);
    const auto refined = nelder_mead<2>(
        [&](const std::array<double, 2>& x) { return cond.conditional_entropy(ProjectorAngles{x[0], x[1]}); },
        {out.optimum.theta_m, out.optimum.phi_m},
        {std::numbers::pi / static_cast<double>(n - 1), 2.0 * std::numbers::pi / static_cast<double>(n)},
        opts.angle_tolerance, opts.max_iterations);
    out.stalled = !refined.converged;
    if (refined.value < best) {
        best = refined.value;
        out.optimum = ProjectorAngles::canonical({refined.x[0], refined.x[1]});
    }

    out.conditional_entropy = best;
    out.mutual_info = std::max(0.0, s_atom + s_field - s_joint);
    // Q = I - (S_f - min cond) = S_a - S + min cond
    out.unclamped = s_atom - s_joint + best;
    if (out.unclamped < kDiscordFloor)
        throw NegativeDiscord("discord " + std::to_string(out.unclamped) + " below floor");
    out.value = std::max(0.0, out.unclamped);
    return out;
}

/// All four measures; EOF follows entanglement_of_formation's domain.
inline MeasureRecord measure_record(const ComplexMatrix& rho, const BipartiteShape& shape, const DiscordOptions& opts = {}) {
    MeasureRecord r;
    r.eof = entanglement_of_formation(rho, shape);
    r.ln = log_negativity(rho, shape);
    const DiscordResult d = quantum_discord(rho, shape, opts);
    r.qd = d.value;
    r.mutual_info = d.mutual_info;
    return r;
}

} // namespace jcsim
