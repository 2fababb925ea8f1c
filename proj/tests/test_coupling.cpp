#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "phonobus/bessel.hpp"
#include "phonobus/coupling.hpp"
#include "phonobus/error.hpp"

using namespace phonobus;

namespace {

const DeviceParams kDevice;
const ModeSet kModes = derive_modes(kDevice);

QubitSpec qubit_at(double delta) {
    QubitSpec q;
    q.delta = delta;
    return q;
}

}  // namespace

TEST(Coupling, CentreParity) {
    const QubitSpec q = qubit_at(0.0);
    for (const auto& mode : kModes) {
        const double g = qubit_mode_coupling(q, mode, kModes.k_0());
        if (mode.index % 2) {
            EXPECT_NEAR(g, 0.0, 1e-6) << mode.index;
        } else {
            const double sign = (mode.index / 2) % 2 ? -1.0 : 1.0;
            EXPECT_NEAR(g, sign * q.g_0, 1e-6) << mode.index;
        }
    }
}

TEST(Coupling, EighthWavelengthOffset) {
    const QubitSpec q = qubit_at(kDevice.lambda_0() / 8.0);
    const double expected = q.g_0 / std::sqrt(2.0);
    EXPECT_NEAR(expected, 79.9e6, 0.05e6);
    for (const auto& mode : kModes)
        EXPECT_NEAR(std::abs(qubit_mode_coupling(q, mode, kModes.k_0())), expected, 1e-6);
    // cos(π/4 + π/2) < 0 for m = 1.
    EXPECT_LT(qubit_mode_coupling(q, kModes.by_index(1), kModes.k_0()), 0.0);
}

TEST(Coupling, PositionPhaseModes) {
    const Mode& m3 = kModes.by_index(3);
    const double lam3 = m3.wavelength();
    for (double d : {0.0, 1.3e-7, -4.1e-7}) {
        EXPECT_NEAR(mode_amplitude_at(d + lam3, m3, kModes.k_0(), PositionPhase::Mode),
                    mode_amplitude_at(d, m3, kModes.k_0(), PositionPhase::Mode), 1e-12);
        EXPECT_NEAR(mode_amplitude_at(d + kDevice.lambda_0(), m3, kModes.k_0(), PositionPhase::Center),
                    mode_amplitude_at(d, m3, kModes.k_0(), PositionPhase::Center), 1e-12);
        EXPECT_NEAR(mode_amplitude_at(d, m3, kModes.k_0(), PositionPhase::Mode),
                    std::cos(m3.k * d + 3.0 * std::acos(-1.0) / 2.0), 1e-12);
    }
    // The two conventions agree at the centre.
    EXPECT_NEAR(mode_amplitude_at(0.0, m3, kModes.k_0(), PositionPhase::Mode),
                mode_amplitude_at(0.0, m3, kModes.k_0(), PositionPhase::Center), 1e-15);
}

TEST(Coupling, FlipChipSuppression) {
    QubitSpec q = qubit_at(0.0);
    const Mode& mode = kModes.by_index(0);
    double prev = qubit_mode_coupling(q, mode, kModes.k_0());
    EXPECT_NEAR(flip_chip_factor(q, mode), 1.0, 0.0);
    for (double d = 1e-8; d < 1e-6; d *= 2.0) {
        q.d_gap = d;
        const double g = qubit_mode_coupling(q, mode, kModes.k_0());
        EXPECT_LT(g, prev);
        EXPECT_NEAR(g, q.g_0 * std::exp(-mode.k * d), 1e-6);
        prev = g;
    }
}

TEST(Coupling, LinearInG0) {
    QubitSpec q = qubit_at(kDevice.lambda_0() / 8.0);
    const Mode& mode = kModes.by_index(2);
    const double g1 = qubit_mode_coupling(q, mode, kModes.k_0());
    q.g_0 *= 2.0;
    EXPECT_NEAR(qubit_mode_coupling(q, mode, kModes.k_0()), 2.0 * g1, 1e-6);
}

TEST(Coupling, SidebandStrengths) {
    const QubitSpec q = qubit_at(kDevice.lambda_0() / 8.0);
    const DriveSpec drive(40e6, 80e6);
    const Mode& mode = kModes.by_index(0);
    const double g = qubit_mode_coupling(q, mode, kModes.k_0());
    EXPECT_NEAR(std::abs(sideband_coupling(q, mode, kModes.k_0(), drive, 1)), 19.36e6, 0.01e6);
    double sum = 0.0;
    for (int n = -drive.n_max(); n <= drive.n_max(); ++n) {
        const double G = sideband_coupling(q, mode, kModes.k_0(), drive, n);
        EXPECT_NEAR(G, g * std::cyl_bessel_j(std::abs(n), 0.5) * ((n < 0 && n % 2) ? -1.0 : 1.0), 1e-6);
        sum += G * G;
    }
    EXPECT_NEAR(sum / (g * g), 1.0, 1e-11);
}

TEST(Coupling, DriveSpec) {
    EXPECT_EQ(DriveSpec(5e8, 1e8).n_max(), 14);
    EXPECT_EQ(DriveSpec(0.0, 1e8).n_max(), 0);
    EXPECT_THROW(DriveSpec(5e8, 1e8, 3), ValidationError);
    EXPECT_EQ(DriveSpec(5e8, 1e8, 20).n_max(), 20);
    EXPECT_THROW(DriveSpec(1e6, 0.0), ValidationError);
    const DriveSpec d = DriveSpec(4e8, 8e7).with_frequency(1e8);
    EXPECT_NEAR(d.ratio(), 5.0, 1e-15);
    EXPECT_NEAR(d.A_z(), 5e8, 1e-6);
}

TEST(Coupling, QubitValidation) {
    QubitSpec q;
    q.Gamma_sk = -1.0;
    try {
        validate(q, "qubits[1]");
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.key(), "qubits[1].Gamma_sk");
    }
}

TEST(Coupling, Tables) {
    QubitSpec a = qubit_at(0.0);
    QubitSpec b = qubit_at(kDevice.lambda_0() / 4.0);
    b.label = "q1";
    const CouplingTable t = static_couplings({a, b}, kModes);
    EXPECT_EQ(t.entries().size(), 2 * kModes.size());
    EXPECT_EQ(t.entries().front().qubit, "q0");
    EXPECT_EQ(t.entries().back().qubit, "q1");
    EXPECT_NEAR(t.at("q0", 0), a.g_0, 1e-6);
    EXPECT_NEAR(t.at("q1", 0), 0.0, 1e-6);
    EXPECT_THROW(t.at("q2", 0), std::out_of_range);

    const DriveSpec drive(40e6, 80e6);
    const CouplingTable s = sideband_table(a, kModes, drive);
    EXPECT_EQ(s.entries().size(), kModes.size() * (2 * drive.n_max() + 1));
    EXPECT_NEAR(s.at("q0", 2, -1), sideband_coupling(a, kModes.by_index(2), kModes.k_0(), drive, -1), 0.0);

    std::ostringstream os;
    t.write_csv(os);
    const std::string csv = os.str();
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "qubit,m,n,G_Hz");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), static_cast<long>(t.entries().size() + 1));
}
