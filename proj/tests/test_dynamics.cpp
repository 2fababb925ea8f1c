#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "phonobus/dynamics.hpp"
#include "phonobus/error.hpp"

using namespace phonobus;

namespace {

struct JaynesCummings {
    QubitSpec q;
    ModeSet modes;
    HamiltonianSpec spec;
    HilbertSpace space;

    explicit JaynesCummings(double g, int fock = 2)
        : q(make_qubit(g)),
          modes(derive_modes(DeviceParams{}).select({0})),
          spec(assemble_full_hamiltonian({q}, modes, static_couplings({q}, modes), std::nullopt)),
          space(spec.layout, fock) {}

    static QubitSpec make_qubit(double g) {
        QubitSpec q;
        q.g_0 = g;
        q.delta = 0.0;
        q.f_q = DeviceParams{}.f_0;
        return q;
    }

    SimResult run(double t_end, EvolveOptions opt = {}) const {
        const LindbladGenerator gen(space, spec);
        return evolve(gen, DensityState::pure(space.basis_vector({1, 0})), 0.0, t_end,
                      default_observables(space), opt);
    }
};

double max_cos2_error(const SimResult& r, double g) {
    const auto& p = r.at("P_e:q0");
    double err = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double c = std::cos(kTwoPi * g * r.times[i]);
        err = std::max(err, std::abs(p[i] - c * c));
    }
    return err;
}

// Single damped mode at zero rotating-frame frequency.
struct DampedMode {
    ModeSet modes = derive_modes(DeviceParams{}).select({0});
    HamiltonianSpec spec;
    HilbertSpace space;
    std::vector<Dissipator> diss;

    DampedMode(int fock, double T)
        : spec(make_spec()), space(spec.layout, fock),
          diss(thermal_dissipators(space, {}, modes, T)) {}

    static HamiltonianSpec make_spec() {
        HamiltonianSpec s;
        s.layout = {{SubsystemKind::Mode, "m0", 0}};
        s.terms = {{TermKind::Number, 0, -1, 0.0, 0.0, 0.0, ""}};
        return s;
    }
};

}  // namespace

TEST(Dynamics, JaynesCummingsVacuumRabi) {
    const double g = 1e6;
    const JaynesCummings jc(g);
    const SimResult r = jc.run(2.0 / g);
    ASSERT_EQ(r.times.size(), 201u);
    EXPECT_EQ(r.times.front(), 0.0);
    EXPECT_EQ(r.times.back(), 2.0 / g);
    EXPECT_LT(max_cos2_error(r, g), 1e-6);
    const auto& pe = r.at("P_e:q0");
    const auto& n0 = r.at("n:0");
    for (std::size_t i = 0; i < pe.size(); ++i) EXPECT_NEAR(pe[i] + n0[i], 1.0, 1e-7);
    EXPECT_LT(r.diagnostics.max_trace_error, 1e-9);
    EXPECT_TRUE(r.diagnostics.positivity_checked);
    EXPECT_THROW(r.at("n:7"), std::out_of_range);
}

TEST(Dynamics, ToleranceRefinementConverges) {
    const double g = 1e6;
    const JaynesCummings jc(g, 3);
    EvolveOptions loose, tight;
    loose.control.rtol = 1e-5;
    loose.control.atol = 1e-7;
    tight.control.rtol = 1e-10;
    tight.control.atol = 1e-12;
    const double e_loose = max_cos2_error(jc.run(3.0 / g, loose), g);
    const double e_tight = max_cos2_error(jc.run(3.0 / g, tight), g);
    EXPECT_LT(e_tight, e_loose);
    EXPECT_LT(e_tight, 1e-8);
}

TEST(Dynamics, BitwiseRepeatable) {
    const JaynesCummings jc(2e6, 3);
    const SimResult a = jc.run(1e-6);
    const SimResult b = jc.run(1e-6);
    EXPECT_EQ(a.at("P_e:q0"), b.at("P_e:q0"));
    EXPECT_EQ(a.steps.accepted, b.steps.accepted);
    std::ostringstream sa, sb;
    a.write_csv(sa);
    b.write_csv(sb);
    EXPECT_EQ(sa.str(), sb.str());
    EXPECT_EQ(sa.str().substr(0, sa.str().find('\n')), "t_s,P_e:q0,n:0");
}

TEST(Dynamics, ThermalisationOfOneMode) {
    const double T = 0.1;
    const DampedMode dm(9, T);
    const Mode& mode = dm.modes[0];
    const double nth = thermal_occupation(mode.f, T);
    const LindbladGenerator gen(dm.space, dm.spec, dm.diss);
    const double t_end = 6.0 / (kTwoPi * mode.gamma);
    const SimResult r = evolve(gen, DensityState::pure(dm.space.basis_vector({1})), 0.0, t_end,
                               default_observables(dm.space));
    const auto& n = r.at("n:0");
    for (std::size_t i = 0; i < n.size(); ++i)
        EXPECT_NEAR(n[i], nth + (1.0 - nth) * std::exp(-kTwoPi * mode.gamma * r.times[i]), 1e-5);
}

TEST(Dynamics, FirstMomentDecaysAtHalfLinewidthAtAnyTemperature) {
    for (double T : {0.0, 0.3}) {
        const DampedMode dm(26, T);
        const Mode& mode = dm.modes[0];
        const LindbladGenerator gen(dm.space, dm.spec, dm.diss);
        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(26);
        psi(0) = psi(1) = 1.0 / std::sqrt(2.0);
        const SparseOp X = dm.space.lower(0) + dm.space.raise(0);
        const SimResult r = evolve(gen, DensityState::pure(psi), 0.0, 2.0 / (kTwoPi * mode.gamma),
                                   {{"x", X}});
        const auto& x = r.at("x");
        for (std::size_t i = 0; i < x.size(); ++i)
            EXPECT_NEAR(x[i], std::exp(-0.5 * kTwoPi * mode.gamma * r.times[i]), 1e-5) << "T=" << T;
    }
}

TEST(Dynamics, IntegratorFailuresAreReported) {
    const JaynesCummings jc(1e6);
    EvolveOptions opt;
    opt.control.max_steps = 5;
    EXPECT_THROW(jc.run(5e-6, opt), StepSizeUnderflow);

    const LindbladGenerator gen(jc.space, jc.spec);
    DensityState bad = DensityState::pure(jc.space.basis_vector({1, 0}));
    bad.rho *= 1.1;
    EXPECT_THROW(evolve(gen, bad, 0.0, 1e-7, default_observables(jc.space)), TraceDrift);
    EXPECT_THROW(evolve(gen, DensityState::pure(jc.space.basis_vector({1, 0})), 1e-7, 0.0, {}), DomainError);
}

TEST(Dynamics, FrequencyEstimators) {
    const double f = 3.3e6, kappa = 2e5;
    std::vector<double> t, y, yd;
    for (int i = 0; i <= 2000; ++i) {
        const double ti = 4e-6 * i / 2000.0;
        t.push_back(ti);
        const double c = std::cos(kTwoPi * f * ti);
        y.push_back(0.5 + 0.5 * c);
        yd.push_back(0.5 + 0.5 * std::exp(-kappa * ti) * c);
    }
    EXPECT_NEAR(frequency_from_fit(t, y, 1e6, 10e6), f, 1e-5 * f);
    EXPECT_NEAR(frequency_from_fit(t, yd, 1e6, 10e6), f, 1e-4 * f);
    EXPECT_NEAR(frequency_from_crossings(t, y), f, 0.01 * f);
    EXPECT_NEAR(frequency_from_crossings(t, yd), f, 0.02 * f);
}

TEST(Dynamics, LinearisedAvoidedCrossing) {
    const DeviceParams dev;
    const ModeSet one = derive_modes(dev).select({0});
    QubitSpec q;
    q.g_0 = 0.5e6;
    q.delta = 0.0;
    q.f_q = one[0].f;
    const Eigen::VectorXcd ev = linearized_spectrum(q, one, one.k_0(), 0.0);
    // Closed-form eigenvalues of the 2x2 first-moment matrix.
    const cplx I(0.0, 1.0);
    const cplx a = q.f_q - 0.5 * I * q.Gamma_sk, b = one[0].f - 0.5 * I * one[0].gamma;
    const cplx mean = 0.5 * (a + b), root = std::sqrt(0.25 * (a - b) * (a - b) + q.g_0 * q.g_0);
    EXPECT_NEAR(std::abs(ev(0) - (mean - root)), 0.0, 1e-3);
    EXPECT_NEAR(std::abs(ev(1) - (mean + root)), 0.0, 1e-3);
    EXPECT_NEAR((ev(1) - ev(0)).real(), 2.0 * q.g_0, 0.01 * q.g_0);

    // Scanning f_q through each mode of the full comb at δ = λ_0/8.
    const ModeSet all = derive_modes(dev);
    q.delta = dev.lambda_0() / 8.0;
    for (int m : {0, 3}) {
        const double fm = all.by_index(m).f;
        const double g = std::abs(qubit_mode_coupling(q, all.by_index(m), all.k_0()));
        double best = 1e300, best_f = 0.0;
        for (int k = -20; k <= 20; ++k) {
            q.f_q = fm + 0.1e6 * k;
            const Eigen::VectorXcd e = linearized_spectrum(q, all, all.k_0(), 0.0);
            double gap = 1e300;
            for (Eigen::Index i = 0; i + 1 < e.size(); ++i)
                if (std::abs(e(i).real() - fm) < 5e6 && std::abs(e(i + 1).real() - fm) < 5e6)
                    gap = std::min(gap, e(i + 1).real() - e(i).real());
            if (gap < best) {
                best = gap;
                best_f = 0.1e6 * k;
            }
        }
        EXPECT_NEAR(best, 2.0 * g, 0.01 * 2.0 * g) << m;
        EXPECT_LE(std::abs(best_f), 0.1e6) << m;
    }
}
