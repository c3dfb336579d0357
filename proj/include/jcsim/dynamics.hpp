#pragma once

// Time evolution in scaled units (coupling = 1, time tau, dephasing rate
// gamma_tilde). Two engines:
//  - analytic: exact unitary evolution of a truncated multimode input, and its
//    representation as a two-qubit pure state in the basis spanned by the
//    evolved field branches;
//  - truncated master equation: single mode, hard Fock cutoff, sigma_z
//    dephasing, fixed-step RK4.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "jcsim/error.hpp"
#include "jcsim/linalg.hpp"
#include "jcsim/states.hpp"

namespace jcsim {

inline constexpr Complex kI{0.0, 1.0};

/// Field branches of |psi(tau)> = |e, eps_plus> + |g, eps_minus>.
///
/// Both branches live on the input lattice padded by one level per mode, so
/// eps_minus (which carries the emitted photon) and eps_plus share an index set.
struct EvolvedBranches {
    std::vector<std::size_t> dims;
    ComplexVector eps_plus;
    ComplexVector eps_minus;
    double tau = 0.0;

    PureCompositeState to_composite() const {
        const auto df = eps_plus.size();
        PureCompositeState s{BipartiteShape{2, static_cast<std::size_t>(df)}, ComplexVector(2 * df)};
        s.amplitudes.head(df) = eps_plus;
        s.amplitudes.tail(df) = eps_minus;
        return s;
    }
};

/// Precomputes per-lattice-site data for repeated analytic evolution of one
/// input field and atomic angle.
class AnalyticEvolver {
  public:
    AnalyticEvolver(const FieldTensor& input, double theta) {
        const AtomState atom{theta};
        ce_ = atom.excited_amplitude();
        cg_ = atom.ground_amplitude();

        FieldTensor padded;
        padded.dims = input.dims;
        for (auto& d : padded.dims) d += 1;
        dims_ = padded.dims;
        const std::size_t n = padded.size();
        sites_.resize(n);

        auto input_coeff = [&](const std::vector<std::size_t>& occ, int shift) -> Complex {
            std::size_t idx = 0;
            for (std::size_t j = 0; j < occ.size(); ++j) {
                const auto m = static_cast<long long>(occ[j]) + shift;
                if (m < 0 || m >= static_cast<long long>(input.dims[j])) return {0.0, 0.0};
                idx = idx * input.dims[j] + static_cast<std::size_t>(m);
            }
            return input.coeffs(static_cast<Eigen::Index>(idx));
        };

        for (std::size_t flat = 0; flat < n; ++flat) {
            const auto occ = padded.occupation(flat);
            Site& s = sites_[flat];
            s.freq_up = 1.0;
            s.freq_down = 1.0;
            for (auto m : occ) {
                s.freq_up *= std::sqrt(static_cast<double>(m) + 1.0);
                s.freq_down *= std::sqrt(static_cast<double>(m));
            }
            s.c_here = input_coeff(occ, 0);
            s.c_above = input_coeff(occ, +1);
            s.c_below = input_coeff(occ, -1);
        }
    }

    EvolvedBranches at(double tau) const {
        const auto n = static_cast<Eigen::Index>(sites_.size());
        EvolvedBranches b{dims_, ComplexVector(n), ComplexVector(n), tau};
        for (Eigen::Index i = 0; i < n; ++i) {
            const Site& s = sites_[static_cast<std::size_t>(i)];
            // |e,m> pairs with |g,m+1> at frequency prod sqrt(m_j+1);
            // |g,m> pairs with |e,m-1> at frequency prod sqrt(m_j).
            const double cu = std::cos(tau * s.freq_up), su = std::sin(tau * s.freq_up);
            const double cd = std::cos(tau * s.freq_down), sd = std::sin(tau * s.freq_down);
            b.eps_plus(i) = ce_ * s.c_here * cu - kI * cg_ * s.c_above * su;
            b.eps_minus(i) = cg_ * s.c_here * cd - kI * ce_ * s.c_below * sd;
        }
        return b;
    }

  private:
    struct Site {
        double freq_up, freq_down;
        Complex c_here, c_above, c_below;
    };
    std::vector<std::size_t> dims_;
    std::vector<Site> sites_;
    double ce_ = 1.0, cg_ = 0.0;
};

/// Exact unitary evolution of cos(theta/2)|e,field> + sin(theta/2)|g,field>.
inline EvolvedBranches evolve_analytic(const FieldTensor& field, double theta, double tau) {
    return AnalyticEvolver(field, theta).at(tau);
}

/// Two-qubit representation of an evolved pure state:
/// delta1 |e,xi1> + delta2 A |g,xi1> + delta2 beta |g,xi2>, beta = sqrt(1 - |A|^2).
struct MappedPair {
    double delta1 = 1.0;
    double delta2 = 0.0;
    Complex A{0.0, 0.0};
    ComplexMatrix rho4;

    double beta() const { return std::sqrt(std::max(0.0, 1.0 - std::norm(A))); }

    /// Amplitudes in the order |e,xi1>, |e,xi2>, |g,xi1>, |g,xi2>.
    ComplexVector amplitudes() const {
        ComplexVector v(4);
        v << delta1, 0.0, delta2 * A, delta2 * beta();
        return v;
    }
};

/// Branch norms below this are treated as empty when forming the overlap A.
inline constexpr double kDegenerateBranch = 1e-14;

inline MappedPair map_to_two_qubit(const EvolvedBranches& branches) {
    MappedPair p;
    p.delta1 = branches.eps_plus.norm();
    p.delta2 = branches.eps_minus.norm();
    if (p.delta1 > kDegenerateBranch && p.delta2 > kDegenerateBranch) {
        p.A = branches.eps_plus.dot(branches.eps_minus) / (p.delta1 * p.delta2);
        if (const double mag = std::abs(p.A); mag > 1.0) p.A /= mag;
    }
    // Assemble from the amplitude vector rather than entrywise: stays a clean
    // projector when one branch is empty or |A| -> 1.
    p.rho4 = projector(p.amplitudes());
    return p;
}

/// Interaction-picture single-mode Hamiltonian on 2 x (k+1):
/// <e,n|H|g,n+1> = sqrt(n+1) for n < k. The top level |e,k> is uncoupled.
inline ComplexMatrix build_hamiltonian(std::size_t k) {
    if (k < 1) throw ConfigInvalid("build_hamiltonian: cutoff must be >= 1");
    const BipartiteShape shape{2, k + 1};
    const auto dim = static_cast<Eigen::Index>(shape.dim());
    ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
    for (std::size_t n = 0; n < k; ++n) {
        const auto e = static_cast<Eigen::Index>(shape.index(0, n));
        const auto g = static_cast<Eigen::Index>(shape.index(1, n + 1));
        h(e, g) = h(g, e) = std::sqrt(static_cast<double>(n + 1));
    }
    return h;
}

/// |e><e| (x) I + I (x) n on 2 x (k+1).
inline ComplexMatrix excitation_number(std::size_t k) {
    const BipartiteShape shape{2, k + 1};
    ComplexMatrix n = ComplexMatrix::Zero(static_cast<Eigen::Index>(shape.dim()), static_cast<Eigen::Index>(shape.dim()));
    for (std::size_t f = 0; f <= k; ++f) {
        n(static_cast<Eigen::Index>(shape.index(0, f)), static_cast<Eigen::Index>(shape.index(0, f))) = static_cast<double>(f) + 1.0;
        n(static_cast<Eigen::Index>(shape.index(1, f)), static_cast<Eigen::Index>(shape.index(1, f))) = static_cast<double>(f);
    }
    return n;
}

/// -i[H, rho] + (gamma/2)(Sz rho Sz - rho), Sz = sigma_z (x) I.
///
/// The dissipator only touches the atomic coherence blocks (e,g) and (g,e),
/// which decay at rate gamma; populations blocks are untouched.
template <class HMatrix>
ComplexMatrix lindblad_rhs(const ComplexMatrix& rho, const HMatrix& h, double gamma_tilde) {
    if (rho.rows() != rho.cols() || h.rows() != rho.rows() || h.cols() != rho.cols() || rho.rows() % 2 != 0)
        throw ShapeMismatch("lindblad_rhs: rho and H must be matching square matrices of even dimension");
    ComplexMatrix out = (h * rho - rho * h) * (-kI);
    if (gamma_tilde != 0.0) {
        const Eigen::Index df = rho.rows() / 2;
        out.topRightCorner(df, df) -= gamma_tilde * rho.topRightCorner(df, df);
        out.bottomLeftCorner(df, df) -= gamma_tilde * rho.bottomLeftCorner(df, df);
    }
    return out;
}

inline constexpr double kMaxDampedStep = 0.01;
inline constexpr double kPositivityFloor = -1e-8;

/// How a step of the master equation is taken.
///  - InteractionRk4: the Hamiltonian part is propagated exactly (the JC
///    propagator is a product of 2x2 rotations) and the dephasing term is
///    integrated with RK4 in between (integrating-factor / Lawson RK4).
///    Exact for gamma = 0, so unitary segments cannot drift below the
///    positivity floor.
///  - ClassicRk4: plain RK4 on lindblad_rhs. Its unitary drift reaches the
///    positivity floor after O(1) time units at dtau = 0.005, k = 30.
enum class IntegrationScheme { InteractionRk4, ClassicRk4 };

struct DephasingConfig {
    double gamma_tilde = 0.0;
    double gamma_on_tau = 0.0; // dephasing off for tau < gamma_on_tau
    double dtau = 0.005;
    std::size_t cutoff = 30;
    IntegrationScheme scheme = IntegrationScheme::InteractionRk4;
};

/// exp(-i H tau) for build_hamiltonian(k): identity on |g,0> and |e,k>, a
/// rotation by tau sqrt(n+1) on each pair (|e,n>, |g,n+1>).
inline Eigen::SparseMatrix<Complex> jc_propagator(std::size_t k, double tau) {
    const BipartiteShape shape{2, k + 1};
    std::vector<Eigen::Triplet<Complex>> entries;
    entries.reserve(2 * shape.dim());
    auto at = [](std::size_t i) { return static_cast<Eigen::Index>(i); };
    entries.emplace_back(at(shape.index(1, 0)), at(shape.index(1, 0)), 1.0);
    entries.emplace_back(at(shape.index(0, k)), at(shape.index(0, k)), 1.0);
    for (std::size_t n = 0; n < k; ++n) {
        const auto e = at(shape.index(0, n)), g = at(shape.index(1, n + 1));
        const double w = tau * std::sqrt(static_cast<double>(n + 1));
        const Complex c = std::cos(w), s = -kI * std::sin(w);
        entries.emplace_back(e, e, c);
        entries.emplace_back(g, g, c);
        entries.emplace_back(e, g, s);
        entries.emplace_back(g, e, s);
    }
    Eigen::SparseMatrix<Complex> u(at(shape.dim()), at(shape.dim()));
    u.setFromTriplets(entries.begin(), entries.end());
    return u;
}

/// (gamma/2)(Sz rho Sz - rho): the coherence blocks decay at rate gamma.
inline ComplexMatrix dephasing_term(const ComplexMatrix& rho, double gamma_tilde) {
    const Eigen::Index df = rho.rows() / 2;
    ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
    out.topRightCorner(df, df) = -gamma_tilde * rho.topRightCorner(df, df);
    out.bottomLeftCorner(df, df) = -gamma_tilde * rho.bottomLeftCorner(df, df);
    return out;
}

/// Diagnostics accumulated over the output grid, measured before the
/// per-sample trace re-pinning.
struct IntegrationStats {
    double max_trace_drift = 0.0;
    double min_eigenvalue = std::numeric_limits<double>::infinity();
    double max_hermiticity_defect = 0.0;
    std::size_t steps = 0;
};

using TrajectoryObserver = std::function<void(double tau, const ComplexMatrix& rho)>;

/// Integrates the master equation from rho0 and calls `observe` at every point
/// of `tau_grid` (ascending, starting at 0). Dephasing is switched on from
/// config.gamma_on_tau; a step boundary is placed there. At each grid point
/// the state is renormalized to unit trace and made exactly hermitian; its
/// smallest eigenvalue must stay above kPositivityFloor.
inline IntegrationStats integrate_master_equation(const ComplexMatrix& rho0, const DephasingConfig& config,
                                                  std::span<const double> tau_grid, const TrajectoryObserver& observe) {
    if (config.dtau <= 0.0) throw ConfigInvalid("integrate_master_equation: dtau must be positive");
    if (config.gamma_tilde < 0.0 || config.gamma_on_tau < 0.0)
        throw ConfigInvalid("integrate_master_equation: gamma_tilde and gamma_on_tau must be >= 0");
    if (config.gamma_tilde > 0.0 && config.dtau > kMaxDampedStep)
        throw StepTooLarge("dtau " + std::to_string(config.dtau) + " exceeds " + std::to_string(kMaxDampedStep) +
                           " for a damped run");
    const BipartiteShape shape{2, config.cutoff + 1};
    detail::require_shape(rho0, shape, "integrate_master_equation");
    require_density_matrix(rho0, "integrate_master_equation");
    if (tau_grid.empty() || tau_grid.front() != 0.0)
        throw ConfigInvalid("integrate_master_equation: tau grid must start at 0");
    for (std::size_t i = 1; i < tau_grid.size(); ++i)
        if (!(tau_grid[i] > tau_grid[i - 1])) throw ConfigInvalid("integrate_master_equation: tau grid must ascend");

    const Eigen::SparseMatrix<Complex> h = build_hamiltonian(config.cutoff).sparseView();
    IntegrationStats stats;
    ComplexMatrix rho = rho0;

    auto settle = [&](double tau) {
        const double tr = rho.trace().real();
        stats.max_trace_drift = std::max(stats.max_trace_drift, std::abs(tr - 1.0));
        stats.max_hermiticity_defect = std::max(stats.max_hermiticity_defect, hermiticity_defect(rho));
        rho /= tr;
        rho = hermitian_part(rho);
        const double min_eig = hermitian_eigenvalues(rho).minCoeff();
        stats.min_eigenvalue = std::min(stats.min_eigenvalue, min_eig);
        if (min_eig < kPositivityFloor) {
            std::ostringstream msg;
            msg << "eigenvalue " << min_eig << " at tau " << tau << "; reduce dtau";
            throw PositivityLoss(msg.str());
        }
        observe(tau, rho);
    };

    auto classic_steps = [&](std::size_t n, double step, double gamma) {
        for (std::size_t s = 0; s < n; ++s) {
            const ComplexMatrix k1 = lindblad_rhs(rho, h, gamma);
            const ComplexMatrix k2 = lindblad_rhs(rho + 0.5 * step * k1, h, gamma);
            const ComplexMatrix k3 = lindblad_rhs(rho + 0.5 * step * k2, h, gamma);
            const ComplexMatrix k4 = lindblad_rhs(rho + step * k3, h, gamma);
            rho += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    };

    auto interaction_steps = [&](std::size_t n, double step, double gamma) {
        const Eigen::SparseMatrix<Complex> half = jc_propagator(config.cutoff, 0.5 * step);
        const Eigen::SparseMatrix<Complex> half_adj = half.adjoint();
        auto rotate = [&](const ComplexMatrix& m) -> ComplexMatrix { return half * m * half_adj; };
        for (std::size_t s = 0; s < n; ++s) {
            if (gamma == 0.0) {
                rho = rotate(rotate(rho));
                continue;
            }
            const ComplexMatrix rho_half = rotate(rho);
            const ComplexMatrix k1 = dephasing_term(rho, gamma);
            const ComplexMatrix k2 = dephasing_term(rho_half + 0.5 * step * rotate(k1), gamma);
            const ComplexMatrix k3 = dephasing_term(rho_half + 0.5 * step * k2, gamma);
            const ComplexMatrix k4 = dephasing_term(rotate(rho_half + step * k3), gamma);
            rho = rotate(rotate(rho + (step / 6.0) * k1) + (step / 3.0) * (k2 + k3)) + (step / 6.0) * k4;
        }
    };

    auto advance = [&](double from, double to) {
        const double span = to - from;
        if (span <= 0.0) return;
        const double gamma = from >= config.gamma_on_tau ? config.gamma_tilde : 0.0;
        const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(span / config.dtau - 1e-9)));
        const double step = span / static_cast<double>(n);
        if (config.scheme == IntegrationScheme::ClassicRk4)
            classic_steps(n, step, gamma);
        else
            interaction_steps(n, step, gamma);
        stats.steps += n;
    };

    settle(tau_grid.front());
    for (std::size_t i = 1; i < tau_grid.size(); ++i) {
        const double a = tau_grid[i - 1], b = tau_grid[i];
        if (config.gamma_tilde > 0.0 && config.gamma_on_tau > a && config.gamma_on_tau < b) {
            advance(a, config.gamma_on_tau);
            advance(config.gamma_on_tau, b);
        } else {
            advance(a, b);
        }
        settle(b);
    }
    return stats;
}

struct Trajectory {
    std::vector<ComplexMatrix> states;
    IntegrationStats stats;
};

inline Trajectory integrate_master_equation(const ComplexMatrix& rho0, const DephasingConfig& config,
                                            std::span<const double> tau_grid) {
    Trajectory t;
    t.states.reserve(tau_grid.size());
    t.stats = integrate_master_equation(rho0, config, tau_grid,
                                        [&](double, const ComplexMatrix& rho) { t.states.push_back(rho); });
    return t;
}

/// <sigma_z> = P_e - P_g on an atom (x) field state.
inline double atomic_inversion(const ComplexMatrix& rho, const BipartiteShape& shape) {
    detail::require_shape(rho, shape, "atomic_inversion");
    if (shape.dim_a != 2) throw ShapeMismatch("atomic_inversion: atom must be a qubit");
    const auto df = static_cast<Eigen::Index>(shape.dim_f);
    return rho.topLeftCorner(df, df).trace().real() - rho.bottomRightCorner(df, df).trace().real();
}

inline double atomic_inversion(const PureCompositeState& psi) {
    return psi.excited_block().squaredNorm() - psi.ground_block().squaredNorm();
}

} // namespace jcsim
