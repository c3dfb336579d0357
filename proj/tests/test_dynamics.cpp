#include <gtest/gtest.h>

#include <numbers>
#include <random>
#include <vector>

#include "jcsim/correlations.hpp"
#include "jcsim/dynamics.hpp"
#include "oracles.hpp"

using namespace jcsim;

namespace {

constexpr double kPi = std::numbers::pi;

FieldTensor single_mode(double nbar, std::size_t k) { return scissor_truncate(CoherentField::from_mean_photons({nbar}, k)); }

/// Dense multimode JC Hamiltonian on a lattice with `levels` per mode, built
/// from the coupling rule |e,m> <-> |g,m+1> with strength prod sqrt(m_j+1).
oracle::Matrix multimode_hamiltonian(const std::vector<std::size_t>& levels) {
    FieldTensor lattice{levels, {}};
    const std::size_t df = lattice.size();
    oracle::Matrix h = oracle::Matrix::Zero(static_cast<Eigen::Index>(2 * df), static_cast<Eigen::Index>(2 * df));
    for (std::size_t flat = 0; flat < df; ++flat) {
        auto occ = lattice.occupation(flat);
        double w = 1.0;
        bool inside = true;
        for (std::size_t j = 0; j < occ.size(); ++j) {
            w *= std::sqrt(static_cast<double>(occ[j]) + 1.0);
            if (++occ[j] >= levels[j]) inside = false;
        }
        if (!inside) continue;
        const auto e = static_cast<Eigen::Index>(flat);
        const auto g = static_cast<Eigen::Index>(df + lattice.flat_index(occ));
        h(e, g) = h(g, e) = w;
    }
    return h;
}

/// Embeds a 2 x prod(dims) amplitude vector into a lattice with more levels per mode.
oracle::Vector embed(const ComplexVector& psi, const std::vector<std::size_t>& dims, const std::vector<std::size_t>& bigger) {
    FieldTensor small{dims, {}}, big{bigger, {}};
    const std::size_t ds = small.size(), db = big.size();
    oracle::Vector out = oracle::Vector::Zero(static_cast<Eigen::Index>(2 * db));
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t f = 0; f < ds; ++f)
            out(static_cast<Eigen::Index>(a * db + big.flat_index(small.occupation(f)))) = psi(static_cast<Eigen::Index>(a * ds + f));
    return out;
}

std::vector<double> grid(double step, std::size_t n) {
    std::vector<double> g(n + 1);
    for (std::size_t i = 0; i <= n; ++i) g[i] = step * static_cast<double>(i);
    return g;
}

} // namespace

TEST(AnalyticEvolution, VacuumHalfRabiPeriod) {
    const auto b = evolve_analytic(single_mode(0.0, 0), 0.0, kPi / 2);
    ASSERT_EQ(b.eps_plus.size(), 2);
    EXPECT_NEAR(b.eps_plus.norm(), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(b.eps_minus(1) - Complex(0.0, -1.0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(b.eps_minus(0)), 0.0, 1e-15);
}

TEST(AnalyticEvolution, IdentityAtTauZero) {
    for (double theta : {0.0, 0.7, kPi}) {
        const FieldTensor f = scissor_truncate(CoherentField::from_mean_photons({3.0, 2.0}, 6));
        const auto psi = evolve_analytic(f, theta, 0.0).to_composite();
        const auto psi0 = initial_composite(AtomState{theta}, f);
        EXPECT_LT((psi.amplitudes - embed(psi0.amplitudes, f.dims, {8, 8})).norm(), 1e-15);
    }
}

TEST(AnalyticEvolution, MatchesDenseSingleModeExponential) {
    const std::size_t k = 14;
    for (double theta : {0.0, 1.1, kPi / 2}) {
        const FieldTensor f = single_mode(4.0, k);
        const AnalyticEvolver ev(f, theta);
        const oracle::Matrix h = build_hamiltonian(k + 1);
        const oracle::Vector psi0 = embed(initial_composite(AtomState{theta}, f).amplitudes, {k + 1}, {k + 2});
        for (double tau : {0.3, 2.0, 7.5}) {
            const oracle::Vector expected = oracle::unitary(h, tau) * psi0;
            EXPECT_LT((ev.at(tau).to_composite().amplitudes - expected).norm(), 1e-11) << theta << " " << tau;
        }
    }
}

TEST(AnalyticEvolution, MatchesDenseTwoModeExponential) {
    const FieldTensor f = scissor_truncate(CoherentField{{std::polar(1.2, 0.5), 0.9}, {4, 3}});
    const AnalyticEvolver ev(f, 0.8);
    // one extra level beyond the padded lattice; the extra sites must stay empty
    const std::vector<std::size_t> big{7, 6};
    const oracle::Matrix h = multimode_hamiltonian(big);
    const oracle::Vector psi0 = embed(initial_composite(AtomState{0.8}, f).amplitudes, f.dims, big);
    for (double tau : {0.2, 1.3, 4.0}) {
        const auto b = ev.at(tau);
        const oracle::Vector expected = oracle::unitary(h, tau) * psi0;
        EXPECT_LT((embed(b.to_composite().amplitudes, b.dims, big) - expected).norm(), 1e-11);
    }
}

TEST(AnalyticEvolution, UnitaryForGeneralTheta) {
    const FieldTensor f = scissor_truncate(CoherentField::from_mean_photons({5.0, 1.0}, 9));
    for (double theta : {0.0, 0.4, 2.0, kPi}) {
        const AnalyticEvolver ev(f, theta);
        for (double tau = 0.0; tau < 10.0; tau += 0.7) EXPECT_NEAR(ev.at(tau).to_composite().amplitudes.norm(), 1.0, 1e-13);
    }
}

TEST(AnalyticEvolution, NearlyMaximalEntanglementEarly) {
    const auto psi = evolve_analytic(single_mode(10.0, adaptive_cutoff(std::sqrt(10.0), 1e-12) - 1), 0.0, 2.0).to_composite();
    EXPECT_GE(eof_pure(psi), 0.95);
}

TEST(MapToTwoQubit, TauZeroIsProduct) {
    const auto p = map_to_two_qubit(evolve_analytic(single_mode(10.0, 30), 0.0, 0.0));
    EXPECT_NEAR(p.delta1, 1.0, 1e-14);
    EXPECT_NEAR(p.delta2, 0.0, 1e-15);
    EXPECT_EQ(p.A, Complex(0.0));
    EXPECT_NEAR(std::abs(p.rho4(0, 0)), 1.0, 1e-14);
    EXPECT_NEAR(eof_pure(p), 0.0, 1e-12);
}

TEST(MapToTwoQubit, VacuumQuarterPeriodIsMaximallyEntangled) {
    const auto p = map_to_two_qubit(evolve_analytic(single_mode(0.0, 0), 0.0, kPi / 4));
    EXPECT_NEAR(p.delta1, 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(p.delta2, 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(std::abs(p.A), 0.0, 1e-15);
    EXPECT_NEAR(eof_pure(p), 1.0, 1e-12);
}

TEST(MapToTwoQubit, PreservesAtomMarginalAndEntropy) {
    const FieldTensor f = scissor_truncate(CoherentField::from_mean_photons({10.0, 10.0}, 16));
    for (double theta : {0.0, 1.0}) {
        const AnalyticEvolver ev(f, theta);
        for (double tau = 0.0; tau <= 10.0; tau += 0.25) {
            const auto b = ev.at(tau);
            const auto psi = b.to_composite();
            const auto p = map_to_two_qubit(b);
            EXPECT_NEAR(p.rho4.trace().real(), 1.0, 1e-12);
            EXPECT_NEAR(purity(p.rho4), 1.0, 1e-12);
            const ComplexMatrix atom_full = partial_trace(psi.density(), psi.shape, Subsystem::Field);
            const ComplexMatrix atom_mapped = partial_trace(p.rho4, {2, 2}, Subsystem::Field);
            EXPECT_LT((atom_full - atom_mapped).cwiseAbs().maxCoeff(), 1e-12) << tau;
            EXPECT_NEAR(eof_pure(p), oracle::schmidt_entropy(psi.amplitudes, psi.shape.dim_f), 1e-9) << tau;
        }
    }
}

TEST(MapToTwoQubit, OverlapPurelyImaginaryForRealAlphaExcitedAtom) {
    const AnalyticEvolver ev(single_mode(10.0, 30), 0.0);
    for (double tau = 0.1; tau < 10.0; tau += 0.37) {
        const auto p = map_to_two_qubit(ev.at(tau));
        EXPECT_NEAR(p.A.real(), 0.0, 1e-12);
        EXPECT_LE(std::abs(p.A), 1.0);
    }
}

TEST(Hamiltonian, Couplings) {
    const ComplexMatrix h1 = build_hamiltonian(1);
    ASSERT_EQ(h1.rows(), 4);
    // |e,0> = 0, |g,1> = 3
    EXPECT_EQ(h1(0, 3), Complex(1.0));
    EXPECT_EQ(h1(3, 0), Complex(1.0));
    EXPECT_EQ(h1.cwiseAbs().sum(), 2.0);
    const ComplexMatrix h2 = build_hamiltonian(2);
    EXPECT_NEAR(h2(1, 5).real(), std::sqrt(2.0), 1e-15);
    EXPECT_EQ(h2(2, 5), Complex(0.0)); // |e,2> is uncoupled
    EXPECT_THROW(build_hamiltonian(0), ConfigInvalid);
}

TEST(Hamiltonian, ConservesExcitationNumber) {
    for (std::size_t k : {1u, 5u, 30u}) {
        const ComplexMatrix h = build_hamiltonian(k), n = excitation_number(k);
        EXPECT_EQ((h * n - n * h).cwiseAbs().maxCoeff(), 0.0);
        EXPECT_TRUE(is_hermitian(h, 0.0));
    }
}

TEST(JcPropagator, MatchesMatrixExponential) {
    for (std::size_t k : {1u, 4u, 12u}) {
        for (double tau : {0.0, 0.01, 1.7}) {
            const ComplexMatrix u = ComplexMatrix(jc_propagator(k, tau));
            EXPECT_LT((u - oracle::unitary(build_hamiltonian(k), tau)).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
}

TEST(LindbladRhs, CommutatorMatchesUnitaryDerivative) {
    std::mt19937_64 rng(41);
    const ComplexMatrix h = build_hamiltonian(4);
    const ComplexMatrix rho = oracle::random_density(10, 3, rng);
    const double dt = 1e-5;
    const ComplexMatrix up = oracle::unitary(h, dt), um = oracle::unitary(h, -dt);
    const ComplexMatrix fd = (up * rho * up.adjoint() - um * rho * um.adjoint()) / (2 * dt);
    EXPECT_LT((lindblad_rhs(rho, h, 0.0) - fd).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(LindbladRhs, DephasingActsOnCoherenceBlocksOnly) {
    std::mt19937_64 rng(43);
    const ComplexMatrix rho = oracle::random_density(8, 8, rng);
    const ComplexMatrix zero_h = ComplexMatrix::Zero(8, 8);
    const ComplexMatrix d = lindblad_rhs(rho, zero_h, 0.7);
    EXPECT_LT((d.topRightCorner(4, 4) + 0.7 * rho.topRightCorner(4, 4)).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((d.bottomLeftCorner(4, 4) + 0.7 * rho.bottomLeftCorner(4, 4)).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(d.topLeftCorner(4, 4).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(d.bottomRightCorner(4, 4).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_LT((d - dephasing_term(rho, 0.7)).cwiseAbs().maxCoeff(), 1e-15);

    // cross-check against (gamma/2)(Sz rho Sz - rho)
    ComplexMatrix sz = ComplexMatrix::Identity(8, 8);
    sz.bottomRightCorner(4, 4) *= -1.0;
    EXPECT_LT((d - 0.35 * (sz * rho * sz - rho)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(LindbladRhs, BlockDiagonalStateIsDephasingFixedPoint) {
    ComplexMatrix rho = ComplexMatrix::Zero(6, 6);
    rho(0, 0) = 0.3;
    rho(4, 4) = 0.7;
    EXPECT_EQ(lindblad_rhs(rho, ComplexMatrix::Zero(6, 6), 2.0).cwiseAbs().maxCoeff(), 0.0);
}

TEST(LindbladRhs, HermitianAndTraceless) {
    std::mt19937_64 rng(47);
    const ComplexMatrix h = build_hamiltonian(5);
    for (int trial = 0; trial < 5; ++trial) {
        const ComplexMatrix d = lindblad_rhs(oracle::random_density(12, 4, rng), h, 1.3);
        EXPECT_LT(hermiticity_defect(d), 1e-13);
        EXPECT_LT(std::abs(d.trace()), 1e-13);
    }
    EXPECT_THROW(lindblad_rhs(ComplexMatrix::Identity(3, 3), ComplexMatrix::Identity(3, 3), 0.0), ShapeMismatch);
}

TEST(MasterEquation, StationaryGroundVacuum) {
    const std::size_t k = 6;
    ComplexMatrix rho = ComplexMatrix::Zero(14, 14);
    rho(7, 7) = 1.0; // |g,0>
    const auto g = grid(0.5, 10);
    const auto t = integrate_master_equation(rho, {1.0, 0.0, 0.005, k}, g);
    for (const auto& s : t.states) EXPECT_LT((s - rho).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(MasterEquation, CoherenceBetweenUncoupledLevelsDecaysExponentially) {
    // |e,k> and |g,0> are both dark, so only dephasing acts on their coherence.
    const std::size_t k = 5;
    const BipartiteShape shape{2, k + 1};
    ComplexVector psi = ComplexVector::Zero(12);
    psi(static_cast<Eigen::Index>(shape.index(0, k))) = 1.0 / std::sqrt(2.0);
    psi(static_cast<Eigen::Index>(shape.index(1, 0))) = 1.0 / std::sqrt(2.0);
    const auto g = grid(0.25, 20);
    for (auto scheme : {IntegrationScheme::InteractionRk4, IntegrationScheme::ClassicRk4}) {
        const double gamma = 0.8;
        const auto t = integrate_master_equation(projector(psi), {gamma, 0.0, 0.005, k, scheme}, g);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double coh = std::abs(t.states[i](static_cast<Eigen::Index>(shape.index(0, k)),
                                                    static_cast<Eigen::Index>(shape.index(1, 0))));
            EXPECT_NEAR(coh, 0.5 * std::exp(-gamma * g[i]), 1e-9);
        }
    }
}

TEST(MasterEquation, UndampedMatchesAnalyticEngine) {
    // Input truncated at k-1 evolves exactly inside a cutoff-k Hamiltonian.
    const std::size_t k = 20;
    const FieldTensor f = single_mode(6.0, k - 1);
    const AnalyticEvolver ev(f, 0.0);
    const ComplexMatrix rho0 = ev.at(0.0).to_composite().density();
    const auto g = grid(0.5, 20);
    const auto t = integrate_master_equation(rho0, {0.0, 0.0, 0.005, k}, g);
    for (std::size_t i = 0; i < g.size(); ++i)
        EXPECT_LT((t.states[i] - ev.at(g[i]).to_composite().density()).cwiseAbs().maxCoeff(), 1e-10) << g[i];
}

TEST(MasterEquation, DampingStartsAtSwitchOnTime) {
    const std::size_t k = 12;
    const FieldTensor f = single_mode(3.0, k - 1);
    const AnalyticEvolver ev(f, 0.0);
    const ComplexMatrix rho0 = ev.at(0.0).to_composite().density();
    // grid points straddle the switch-on time 1.3
    const std::vector<double> g{0.0, 0.5, 1.0, 1.5, 2.0};
    const auto t = integrate_master_equation(rho0, {1.0, 1.3, 0.005, k}, g);
    for (std::size_t i = 0; i < 3; ++i)
        EXPECT_LT((t.states[i] - ev.at(g[i]).to_composite().density()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_GT((t.states[3] - ev.at(g[3]).to_composite().density()).cwiseAbs().maxCoeff(), 1e-3);
    EXPECT_LT(purity(t.states[4]), 0.999);
}

TEST(MasterEquation, PreservesTraceExcitationAndPositivity) {
    const std::size_t k = 16;
    const FieldTensor f = single_mode(5.0, k - 1);
    const ComplexMatrix rho_padded = AnalyticEvolver(f, 0.9).at(0.0).to_composite().density();
    const ComplexMatrix n = excitation_number(k);
    const double n0 = (n * rho_padded).trace().real();
    const auto g = grid(0.5, 16);
    const auto t = integrate_master_equation(rho_padded, {1.0, 0.0, 0.005, k}, g);
    EXPECT_LT(t.stats.max_trace_drift, 1e-9);
    EXPECT_GE(t.stats.min_eigenvalue, kPositivityFloor);
    for (const auto& s : t.states) EXPECT_NEAR((n * s).trace().real(), n0, 1e-9);
}

TEST(MasterEquation, StepHalvingConverges) {
    const std::size_t k = 12;
    const ComplexMatrix rho0 = AnalyticEvolver(single_mode(4.0, k - 1), 0.0).at(0.0).to_composite().density();
    const auto g = grid(1.0, 4);
    const auto a = integrate_master_equation(rho0, {1.0, 0.0, 0.01, k}, g);
    const auto b = integrate_master_equation(rho0, {1.0, 0.0, 0.005, k}, g);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_LT((a.states[i] - b.states[i]).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(MasterEquation, ClassicRk4DriftsBelowFloorWithoutDamping) {
    const std::size_t k = 30;
    const ComplexMatrix rho0 = AnalyticEvolver(single_mode(10.0, k - 1), 0.0).at(0.0).to_composite().density();
    const auto g = grid(0.1, 40);
    EXPECT_THROW(integrate_master_equation(rho0, {0.0, 0.0, 0.005, k, IntegrationScheme::ClassicRk4}, g), PositivityLoss);
    EXPECT_NO_THROW(integrate_master_equation(rho0, {0.0, 0.0, 0.005, k, IntegrationScheme::InteractionRk4}, g));
}

TEST(MasterEquation, RejectsBadInput) {
    const std::size_t k = 3;
    ComplexMatrix rho = ComplexMatrix::Zero(8, 8);
    rho(0, 0) = 1.0;
    const auto g = grid(0.1, 3);
    EXPECT_THROW(integrate_master_equation(rho, {1.0, 0.0, 0.02, k}, g), StepTooLarge);
    EXPECT_NO_THROW(integrate_master_equation(rho, {0.0, 0.0, 0.02, k}, g));
    EXPECT_THROW(integrate_master_equation(rho, {-1.0, 0.0, 0.005, k}, g), ConfigInvalid);
    EXPECT_THROW(integrate_master_equation(rho, {0.0, 0.0, 0.0, k}, g), ConfigInvalid);
    EXPECT_THROW(integrate_master_equation(rho, {0.0, 0.0, 0.005, 4}, g), ShapeMismatch);
    const std::vector<double> bad_start{0.1, 0.2}, descending{0.0, 0.2, 0.1};
    EXPECT_THROW(integrate_master_equation(rho, {0.0, 0.0, 0.005, k}, bad_start), ConfigInvalid);
    EXPECT_THROW(integrate_master_equation(rho, {0.0, 0.0, 0.005, k}, descending), ConfigInvalid);
    EXPECT_THROW(integrate_master_equation(2.0 * rho, {0.0, 0.0, 0.005, k}, g), NotDensityMatrix);
}

TEST(AtomicInversion, VacuumRabiOscillation) {
    const AnalyticEvolver ev(single_mode(0.0, 0), 0.0);
    for (double tau = 0.0; tau < 6.0; tau += 0.3) {
        const auto psi = ev.at(tau).to_composite();
        EXPECT_NEAR(atomic_inversion(psi), std::cos(2 * tau), 1e-14);
        EXPECT_NEAR(atomic_inversion(psi.density(), psi.shape), std::cos(2 * tau), 1e-14);
    }
}

TEST(AtomicInversion, Examples) {
    const FieldTensor f = single_mode(2.0, 8);
    EXPECT_NEAR(atomic_inversion(initial_composite(AtomState{0.0}, f)), 1.0, 1e-14);
    EXPECT_NEAR(atomic_inversion(initial_composite(AtomState{kPi}, f)), -1.0, 1e-14);
    EXPECT_NEAR(atomic_inversion(initial_composite(AtomState{kPi / 2}, f)), 0.0, 1e-14);
    EXPECT_THROW(atomic_inversion(ComplexMatrix::Identity(6, 6), {2, 2}), ShapeMismatch);
}
