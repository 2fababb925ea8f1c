#include <cmath>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "phonobus/lindblad.hpp"

using namespace phonobus;

namespace {

using Mat = Eigen::MatrixXcd;
const cplx I(0.0, 1.0);

struct Model {
    double dq = 3e6, fm = 1e6, A = 2e6, fA = 5e6, phA = 0.3, c = 0.7e6, fx = 1.5e6, phx = -1.1;
};

HamiltonianSpec make_spec(const Model& p) {
    HamiltonianSpec spec;
    spec.layout = {{SubsystemKind::Qubit, "q0", 0}, {SubsystemKind::Mode, "m0", 0}};
    spec.terms = {{TermKind::Number, 0, -1, p.dq, 0.0, 0.0, ""},
                  {TermKind::Number, 1, -1, p.fm, 0.0, 0.0, ""},
                  {TermKind::Drive, 0, -1, p.A, p.fA, p.phA, ""},
                  {TermKind::Exchange, 0, 1, p.c, p.fx, p.phx, ""}};
    return spec;
}

// Hand-built operators with the qubit as the most significant factor.
struct Ops {
    Mat sm, b, n, nq, id;
    explicit Ops(int N) {
        Mat s2 = Mat::Zero(2, 2);
        s2(0, 1) = 1.0;
        Mat a = Mat::Zero(N, N);
        for (int k = 1; k < N; ++k) a(k - 1, k) = std::sqrt(double(k));
        const Mat i2 = Mat::Identity(2, 2), iN = Mat::Identity(N, N);
        sm = kron(s2, iN);
        b = kron(i2, a);
        n = b.adjoint() * b;
        nq = sm.adjoint() * sm;
        id = Mat::Identity(2 * N, 2 * N);
    }
    static Mat kron(const Mat& x, const Mat& y) {
        Mat out(x.rows() * y.rows(), x.cols() * y.cols());
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            for (Eigen::Index j = 0; j < x.cols(); ++j)
                out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
        return out;
    }
};

Mat hand_hamiltonian(const Model& p, const Ops& o, double t) {
    const cplx e = std::exp(I * (kTwoPi * p.fx * t + p.phx));
    const Mat X = e * o.sm.adjoint() * o.b;
    return p.dq * o.nq + p.fm * o.n + p.A * std::cos(kTwoPi * p.fA * t + p.phA) * o.nq +
           p.c * (X + X.adjoint());
}

Mat hand_rhs(const Mat& H, const std::vector<std::pair<Mat, double>>& jumps, const Mat& rho) {
    Mat out = -I * kTwoPi * (H * rho - rho * H);
    for (const auto& [L, r] : jumps) {
        const Mat LdL = L.adjoint() * L;
        out += kTwoPi * r * (L * rho * L.adjoint() - 0.5 * (LdL * rho + rho * LdL));
    }
    return out;
}

Mat random_state(Eigen::Index d, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    Mat a(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) a(i, j) = cplx(nd(rng), nd(rng));
    Mat rho = a * a.adjoint();
    return rho / rho.trace();
}

void check_against_hand(int N) {
    const Model p;
    const Ops o(N);
    const HamiltonianSpec spec = make_spec(p);
    const HilbertSpace space(spec.layout, N, std::nullopt, 1 << 14);
    const std::vector<Dissipator> diss{{space.lower(1), 0.2e6, "decay"},
                                       {space.raise(1), 0.05e6, "heat"},
                                       {space.lower(0), 0.1e6, "relax"}};
    const LindbladGenerator gen(space, spec, diss);
    EXPECT_TRUE(gen.time_dependent());
    const std::vector<std::pair<Mat, double>> jumps{{o.b, 0.2e6}, {o.b.adjoint(), 0.05e6}, {o.sm, 0.1e6}};
    const Mat rho = random_state(2 * N, 7u + N);
    Mat out;
    for (double t : {0.0, 1.7e-7, 3.3e-6}) {
        const Mat H = hand_hamiltonian(p, o, t);
        EXPECT_NEAR((gen.hamiltonian(t) - H).norm() / H.norm(), 0.0, 1e-14);
        gen.rhs(t, rho, out);
        const Mat ref = hand_rhs(H, jumps, rho);
        EXPECT_NEAR((out - ref).norm() / ref.norm(), 0.0, 1e-12) << "t=" << t;
        EXPECT_NEAR(std::abs(out.trace()), 0.0, 1e-12 * ref.norm());
        EXPECT_NEAR((out - out.adjoint()).norm() / out.norm(), 0.0, 1e-14);
    }
}

}  // namespace

TEST(Lindblad, SuperoperatorPathMatchesHandFormula) {
    ASSERT_LE(2u * 6u, LindbladGenerator::kSuperoperatorLimit);
    check_against_hand(6);
}

TEST(Lindblad, MatrixPathMatchesHandFormula) {
    ASSERT_GT(2u * 70u, LindbladGenerator::kSuperoperatorLimit);
    check_against_hand(70);
}

TEST(Lindblad, ThermalChannels) {
    const DeviceParams dev;
    const ModeSet modes = derive_modes(dev).select({0, 1});
    const QubitSpec q;
    const auto layout = make_layout({q}, modes);
    const HilbertSpace space(layout, 3);
    const double T = 0.1;
    const auto diss = thermal_dissipators(space, {q}, modes, T);
    ASSERT_EQ(diss.size(), 6u);
    for (const auto& d : diss) {
        double expected = -1.0;
        if (d.label.rfind("decay:", 0) == 0) {
            const Mode& m = modes.by_index(std::stoi(d.label.substr(6)));
            expected = m.gamma * (thermal_occupation(m.f, T) + 1.0);
        } else if (d.label.rfind("heat:", 0) == 0) {
            const Mode& m = modes.by_index(std::stoi(d.label.substr(5)));
            expected = m.gamma * thermal_occupation(m.f, T);
        } else if (d.label.rfind("relax:", 0) == 0) {
            expected = q.Gamma_sk * (thermal_occupation(q.f_q, T) + 1.0);
        } else if (d.label.rfind("excite:", 0) == 0) {
            expected = q.Gamma_sk * thermal_occupation(q.f_q, T);
        }
        EXPECT_NEAR(d.rate, expected, 1e-9 * expected) << d.label;
    }
    // At zero temperature the absorption channels vanish.
    EXPECT_EQ(thermal_dissipators(space, {q}, modes, 0.0).size(), 3u);
}

TEST(Lindblad, DensityStateDiagnostics) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(3);
    psi(0) = 1.0 / std::sqrt(2.0);
    psi(2) = I / std::sqrt(2.0);
    const DensityState s = DensityState::pure(psi, 1e-6);
    EXPECT_NEAR(s.trace_error(), 0.0, 1e-15);
    EXPECT_NEAR(s.hermiticity_error(), 0.0, 0.0);
    EXPECT_NEAR(s.min_eigenvalue(), 0.0, 1e-15);
    EXPECT_EQ(s.t, 1e-6);
    SparseOp z(3, 3);
    z.insert(0, 0) = 1.0;
    z.insert(2, 2) = -1.0;
    EXPECT_NEAR(s.expectation(z), 0.0, 1e-15);
}

TEST(Lindblad, StaticSpaceIsNotTimeDependent) {
    HamiltonianSpec spec;
    spec.layout = {{SubsystemKind::Qubit, "q0", 0}, {SubsystemKind::Mode, "m0", 0}};
    spec.terms = {{TermKind::Exchange, 0, 1, 1e6, 0.0, 0.0, ""}};
    const HilbertSpace space(spec.layout, 3);
    const LindbladGenerator gen(space, spec);
    EXPECT_FALSE(gen.time_dependent());
    EXPECT_EQ(gen.dimension(), 6u);
}

TEST(Lindblad, FirstMomentOfTheMode) {
    // d<b>/dt = -2πi f <b> - π γ <b> - 2πi g <σ01> holds exactly for the
    // undriven qubit-mode model at zero temperature.
    const DeviceParams dev;
    const ModeSet modes = derive_modes(dev).select({1});
    QubitSpec q;
    q.delta = dev.lambda_0() / 8.0;
    q.f_q = dev.f_0 + 7e6;
    const auto spec = assemble_full_hamiltonian({q}, modes, static_couplings({q}, modes), std::nullopt);
    const HilbertSpace space(spec.layout, 5);
    const LindbladGenerator gen(space, spec, thermal_dissipators(space, {q}, modes, 0.0));
    const double g = qubit_mode_coupling(q, modes[0], modes.k_0());
    const double f = modes[0].index * modes.f_fsr();
    const Mat b = Mat(space.lower(1)), sm = Mat(space.lower(0));
    for (unsigned seed : {1u, 2u, 3u}) {
        // Keep the top Fock level empty so the truncated ladder [b, b†] = 1 applies.
        Mat rho = random_state(static_cast<Eigen::Index>(space.dimension()), seed);
        for (Eigen::Index i = 0; i < rho.rows(); ++i)
            if (space.occupations(static_cast<std::size_t>(i))[1] == space.fock_cutoff() - 1) {
                rho.row(i).setZero();
                rho.col(i).setZero();
            }
        rho /= rho.trace();
        Mat drho;
        gen.rhs(0.0, rho, drho);
        const cplx lhs = (b * drho).trace();
        const cplx rhs = -I * kTwoPi * f * (b * rho).trace() - 0.5 * kTwoPi * modes[0].gamma * (b * rho).trace() -
                         I * kTwoPi * g * (sm * rho).trace();
        EXPECT_LT(std::abs(lhs - rhs), 1e-9 * std::abs(rhs));
    }
}
