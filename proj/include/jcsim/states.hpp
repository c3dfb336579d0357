#pragma once

// Truncated multimode coherent fields and the product initial state of
// atom and field.

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "jcsim/error.hpp"
#include "jcsim/linalg.hpp"

namespace jcsim {

/// Multimode product coherent field, mode j truncated to Fock levels 0..cutoffs[j].
struct CoherentField {
    std::vector<Complex> alphas;
    std::vector<std::size_t> cutoffs;

    /// Same cutoff k on every mode.
    static CoherentField uniform(std::vector<Complex> alphas, std::size_t k) {
        CoherentField f{std::move(alphas), {}};
        f.cutoffs.assign(f.alphas.size(), k);
        return f;
    }

    /// Real amplitudes alpha_j = sqrt(nbar_j).
    static CoherentField from_mean_photons(const std::vector<double>& nbars, std::size_t k) {
        std::vector<Complex> alphas;
        alphas.reserve(nbars.size());
        for (double n : nbars) alphas.emplace_back(std::sqrt(n), 0.0);
        return uniform(std::move(alphas), k);
    }

    std::size_t modes() const noexcept { return alphas.size(); }
};

/// Dense coefficient tensor over a Fock lattice. Row-major: mode 0 varies slowest.
struct FieldTensor {
    std::vector<std::size_t> dims; // levels per mode
    ComplexVector coeffs;

    std::size_t size() const noexcept {
        std::size_t n = 1;
        for (auto d : dims) n *= d;
        return n;
    }

    std::size_t flat_index(const std::vector<std::size_t>& occupation) const {
        std::size_t idx = 0;
        for (std::size_t j = 0; j < dims.size(); ++j) idx = idx * dims[j] + occupation[j];
        return idx;
    }

    std::vector<std::size_t> occupation(std::size_t flat) const {
        std::vector<std::size_t> occ(dims.size());
        for (std::size_t j = dims.size(); j-- > 0;) {
            occ[j] = flat % dims[j];
            flat /= dims[j];
        }
        return occ;
    }
};

/// cos(theta/2)|e> + sin(theta/2)|g>, theta in [0, pi].
struct AtomState {
    double theta = 0.0;

    double excited_amplitude() const { return std::cos(theta / 2.0); }
    double ground_amplitude() const { return std::sin(theta / 2.0); }
};

struct PureCompositeState {
    BipartiteShape shape;
    ComplexVector amplitudes; // length shape.dim(), atom-major

    auto excited_block() const { return amplitudes.head(static_cast<Eigen::Index>(shape.dim_f)); }
    auto ground_block() const { return amplitudes.tail(static_cast<Eigen::Index>(shape.dim_f)); }
    ComplexMatrix density() const { return projector(amplitudes); }
};

/// exp(-|alpha|^2/2) alpha^n / sqrt(n!) for n = 0..k. Not renormalized.
inline ComplexVector coherent_coefficients(Complex alpha, std::size_t k) {
    ComplexVector c(static_cast<Eigen::Index>(k + 1));
    c(0) = std::exp(-std::norm(alpha) / 2.0);
    for (std::size_t n = 0; n < k; ++n)
        c(static_cast<Eigen::Index>(n + 1)) = c(static_cast<Eigen::Index>(n)) * alpha / std::sqrt(static_cast<double>(n + 1));
    return c;
}

/// Product tensor of the per-mode truncated coherent states, renormalized to unit norm.
inline FieldTensor scissor_truncate(const CoherentField& field) {
    if (field.modes() == 0) throw ConfigInvalid("scissor_truncate: field has no modes");
    if (field.cutoffs.size() != field.modes()) throw ConfigInvalid("scissor_truncate: one cutoff per mode required");

    FieldTensor t;
    t.coeffs = ComplexVector::Ones(1);
    for (std::size_t j = 0; j < field.modes(); ++j) {
        const ComplexVector mode = coherent_coefficients(field.alphas[j], field.cutoffs[j]);
        ComplexVector next(t.coeffs.size() * mode.size());
        for (Eigen::Index a = 0; a < t.coeffs.size(); ++a) next.segment(a * mode.size(), mode.size()) = t.coeffs(a) * mode;
        t.coeffs = std::move(next);
        t.dims.push_back(field.cutoffs[j] + 1);
    }
    const double mass = t.coeffs.squaredNorm();
    if (!(mass >= 1e-300))
        throw DegenerateTruncation("captured mass " + std::to_string(mass) + " too small to renormalize");
    t.coeffs /= std::sqrt(mass);
    return t;
}

/// Smallest k whose Poisson(|alpha|^2) tail beyond k is below `tail_tolerance`,
/// plus one level so the photon added by the g-branch still fits.
inline std::size_t adaptive_cutoff(Complex alpha, double tail_tolerance) {
    if (!(tail_tolerance > 0.0 && tail_tolerance < 1.0))
        throw ConfigInvalid("adaptive_cutoff: tail tolerance must lie in (0, 1)");
    const double nbar = std::norm(alpha);
    if (nbar == 0.0) return 1;

    // log-space pmf so large nbar does not underflow exp(-nbar); stop once past
    // the mean and the terms are far below the tolerance.
    std::vector<double> pmf;
    for (std::size_t n = 0;; ++n) {
        const double logp = -nbar + static_cast<double>(n) * std::log(nbar) - std::lgamma(static_cast<double>(n) + 1.0);
        pmf.push_back(std::exp(logp));
        if (static_cast<double>(n) > nbar + 1.0 && pmf.back() < tail_tolerance * 1e-6) break;
    }
    // suffix sums from the top, small terms first
    double tail = 0.0;
    std::size_t k = pmf.size() - 1;
    for (std::size_t n = pmf.size(); n-- > 0;) {
        // here `tail` = sum_{m > n} pmf[m]
        if (tail >= tail_tolerance) break;
        k = n;
        tail += pmf[n];
    }
    return k + 1;
}

inline PureCompositeState initial_composite(const AtomState& atom, const FieldTensor& field) {
    const auto df = static_cast<Eigen::Index>(field.size());
    PureCompositeState s{BipartiteShape{2, field.size()}, ComplexVector(2 * df)};
    s.amplitudes.head(df) = atom.excited_amplitude() * field.coeffs;
    s.amplitudes.tail(df) = atom.ground_amplitude() * field.coeffs;
    return s;
}

} // namespace jcsim
