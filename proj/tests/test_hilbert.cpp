#include <cmath>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "phonobus/error.hpp"
#include "phonobus/hamiltonian.hpp"
#include "phonobus/hilbert.hpp"

using namespace phonobus;

namespace {

std::vector<Subsystem> qubit_and_modes(int n_modes) {
    std::vector<Subsystem> layout{{SubsystemKind::Qubit, "q0", 0}};
    for (int m = 0; m < n_modes; ++m) layout.push_back({SubsystemKind::Mode, "m" + std::to_string(m), m});
    return layout;
}

Eigen::MatrixXcd dense(const SparseOp& op) { return Eigen::MatrixXcd(op); }

}  // namespace

TEST(Hilbert, Dimensions) {
    EXPECT_EQ(HilbertSpace(qubit_and_modes(2), 3).dimension(), 18u);
    EXPECT_EQ(HilbertSpace(qubit_and_modes(2), 3, 1).dimension(), 4u);
    EXPECT_EQ(HilbertSpace(qubit_and_modes(2), 3, 2).dimension(), 9u);
    EXPECT_EQ(HilbertSpace(qubit_and_modes(5), 3, 2).dimension(), 27u);
    EXPECT_THROW(HilbertSpace(qubit_and_modes(6), 5), DomainError);
    EXPECT_NO_THROW(HilbertSpace(qubit_and_modes(6), 5, std::nullopt, 40000));
}

TEST(Hilbert, BasisOrdering) {
    const HilbertSpace s(qubit_and_modes(2), 3);
    // The first subsystem is the most significant digit.
    EXPECT_EQ(*s.index_of({0, 0, 1}), 1u);
    EXPECT_EQ(*s.index_of({0, 1, 0}), 3u);
    EXPECT_EQ(*s.index_of({1, 0, 0}), 9u);
    EXPECT_EQ(s.occupations(9), (std::vector<int>{1, 0, 0}));
    EXPECT_EQ(s.excitations(*s.index_of({1, 2, 1})), 4);
    const HilbertSpace capped(qubit_and_modes(2), 3, 1);
    EXPECT_FALSE(capped.index_of({1, 1, 0}).has_value());
    EXPECT_THROW(s.basis_vector({0, 3, 0}), std::exception);
}

TEST(Hilbert, LadderOperators) {
    const HilbertSpace s(qubit_and_modes(1), 5);
    const Eigen::MatrixXcd b = dense(s.lower(1));
    const Eigen::MatrixXcd bd = dense(s.raise(1));
    for (int q = 0; q < 2; ++q)
        for (int n = 1; n < 5; ++n) {
            const auto from = *s.index_of({q, n});
            const auto to = *s.index_of({q, n - 1});
            EXPECT_NEAR(b(to, from).real(), std::sqrt(n), 1e-15);
        }
    EXPECT_NEAR((bd - b.adjoint()).norm(), 0.0, 0.0);
    EXPECT_NEAR((dense(s.number(1)) - bd * b).norm(), 0.0, 1e-14);
    // [b, b†] = 1 below the cutoff.
    const Eigen::MatrixXcd comm = b * bd - bd * b;
    for (int q = 0; q < 2; ++q)
        for (int n = 0; n < 4; ++n) {
            const auto i = *s.index_of({q, n});
            EXPECT_NEAR(comm(i, i).real(), 1.0, 1e-14);
        }
    const Eigen::MatrixXcd sm = dense(s.lower(0));
    EXPECT_NEAR((sm * sm).norm(), 0.0, 0.0);
    EXPECT_NEAR((dense(s.number(0)) - sm.adjoint() * sm).norm(), 0.0, 0.0);
    EXPECT_NEAR((dense(s.total_excitations()) - dense(s.number(0)) - dense(s.number(1))).norm(), 0.0, 0.0);
    EXPECT_NEAR((dense(s.identity()) - Eigen::MatrixXcd::Identity(10, 10)).norm(), 0.0, 0.0);
}

TEST(Hilbert, CappedOperatorsStayInside) {
    const HilbertSpace s(qubit_and_modes(2), 3, 1);
    const Eigen::MatrixXcd bd = dense(s.raise(1));
    // Raising out of the single-excitation manifold is truncated away.
    const auto one = *s.index_of({0, 1, 0});
    EXPECT_NEAR(bd.col(one).norm(), 0.0, 0.0);
    const auto vac = *s.index_of({0, 0, 0});
    EXPECT_NEAR(bd(one, vac).real(), 1.0, 0.0);
}

TEST(Hilbert, EnlargedSpace) {
    const HilbertSpace s(qubit_and_modes(2), 3, 2);
    const HilbertSpace e = s.enlarged();
    EXPECT_EQ(e.fock_cutoff(), 4);
    EXPECT_EQ(*e.max_excitations(), 3);
    EXPECT_GT(e.dimension(), s.dimension());
}

TEST(Hamiltonian, ExchangeIsHermitianAndConserving) {
    const DeviceParams dev;
    const ModeSet modes = derive_modes(dev).select({-1, 0, 1});
    QubitSpec q;
    q.delta = dev.lambda_0() / 8.0;
    q.f_q = 4.005e9;
    const auto spec = assemble_full_hamiltonian({q}, modes, static_couplings({q}, modes), std::nullopt);
    EXPECT_NO_THROW(spec.validate());
    EXPECT_EQ(spec.qubit_count(), 1u);
    EXPECT_EQ(spec.mode_count(), 3u);
    EXPECT_EQ(spec.mode_site(0), 2);
    EXPECT_THROW(spec.mode_site(7), std::out_of_range);

    const HilbertSpace s(spec.layout, 3);
    const Eigen::MatrixXcd H = dense(static_hamiltonian(s, spec));
    EXPECT_NEAR((H - H.adjoint()).norm(), 0.0, 1e-9);
    const Eigen::MatrixXcd N = dense(s.total_excitations());
    EXPECT_NEAR((H * N - N * H).norm() / H.norm(), 0.0, 1e-14);
    // Rotating frame: qubit at f_q - f_0, modes at m f_fsr.
    const auto e = *s.index_of({1, 0, 0, 0});
    EXPECT_NEAR(H(e, e).real(), 5e6, 1e-3);
    const auto m1 = *s.index_of({0, 0, 0, 1});
    EXPECT_NEAR(H(m1, m1).real(), dev.f_fsr(), 1e-3);
    const auto m0 = *s.index_of({0, 0, 1, 0});
    EXPECT_NEAR(std::abs(H(e, m0)), q.g_0 / std::sqrt(2.0), 1e-3);
}

TEST(Hamiltonian, LabFrameAndDrive) {
    const DeviceParams dev;
    const ModeSet modes = derive_modes(dev).select({0});
    const QubitSpec q;
    const auto spec = assemble_full_hamiltonian({q}, modes, static_couplings({q}, modes),
                                                DriveSpec(40e6, 80e6), Frame::Lab);
    int drives = 0;
    for (const auto& t : spec.terms) {
        if (t.kind == TermKind::Drive) {
            ++drives;
            EXPECT_NEAR(t.coefficient, 40e6, 0.0);
            EXPECT_NEAR(t.frequency, 80e6, 0.0);
        }
        if (t.kind == TermKind::Number && t.site == spec.mode_site(0)) EXPECT_NEAR(t.coefficient, 4e9, 1e-3);
    }
    EXPECT_EQ(drives, 1);
    const HilbertSpace s(spec.layout, 2);
    EXPECT_THROW(static_hamiltonian(s, spec), Error);
}

TEST(Hamiltonian, ValidateRejectsBadTerms) {
    HamiltonianSpec spec;
    spec.layout = qubit_and_modes(1);
    spec.terms.push_back({TermKind::Exchange, 1, 1, 1.0, 0.0, 0.0, ""});
    EXPECT_THROW(spec.validate(), Error);
    spec.terms = {{TermKind::Number, 5, -1, 1.0, 0.0, 0.0, ""}};
    EXPECT_THROW(spec.validate(), Error);
    spec.terms = {{TermKind::Number, 0, -1, std::nan(""), 0.0, 0.0, ""}};
    EXPECT_THROW(spec.validate(), Error);
}

TEST(Hamiltonian, JaynesCummingsBlock) {
    const DeviceParams dev;
    const ModeSet modes = derive_modes(dev).select({0});
    QubitSpec q;
    q.delta = 0.0;
    q.g_0 = 3e6;
    const auto spec = assemble_full_hamiltonian({q}, modes, static_couplings({q}, modes), std::nullopt, Frame::Lab);
    const HilbertSpace s(spec.layout, 4);
    const Eigen::MatrixXcd H = dense(static_hamiltonian(s, spec));
    const auto e0 = *s.index_of({1, 0}), g1 = *s.index_of({0, 1});
    Eigen::Matrix2cd block;
    block << H(e0, e0), H(e0, g1), H(g1, e0), H(g1, g1);
    const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd>(block).eigenvalues();
    EXPECT_NEAR(ev(0), 4e9 - 3e6, 1e-3);
    EXPECT_NEAR(ev(1), 4e9 + 3e6, 1e-3);
    // No coupling leaks out of the block.
    for (Eigen::Index i = 0; i < H.rows(); ++i)
        if (i != static_cast<Eigen::Index>(e0) && i != static_cast<Eigen::Index>(g1)) {
            EXPECT_EQ(H(i, e0), cplx(0.0));
            EXPECT_EQ(H(i, g1), cplx(0.0));
        }
}

TEST(Hamiltonian, FullCombConservesExcitations) {
    const DeviceParams dev;
    const ModeSet modes = derive_modes(dev);
    QubitSpec q;
    q.delta = dev.lambda_0() / 8.0;
    const auto spec = assemble_full_hamiltonian({q}, modes, static_couplings({q}, modes), std::nullopt);
    const HilbertSpace s(spec.layout, 3, 2);
    const SparseOp H = static_hamiltonian(s, spec);
    const SparseOp N = s.total_excitations();
    const SparseOp comm = H * N - N * H;
    EXPECT_EQ(comm.norm(), 0.0);
}
