#include "phonobus/coupling.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "phonobus/bessel.hpp"
#include "phonobus/error.hpp"
#include "phonobus/io.hpp"

namespace phonobus {

void validate(const QubitSpec& q, const std::string& key_prefix) {
    auto require = [&](bool ok, const char* field, const char* message) {
        if (!ok) throw ValidationError(key_prefix + "." + field, message);
    };
    require(std::isfinite(q.f_q) && q.f_q > 0, "f_q", "must be positive");
    require(std::isfinite(q.delta), "delta", "must be finite");
    require(std::isfinite(q.g_0) && q.g_0 >= 0, "g_0", "must be >= 0");
    require(std::isfinite(q.Gamma_sk) && q.Gamma_sk >= 0, "Gamma_sk", "must be >= 0");
    require(std::isfinite(q.d_gap) && q.d_gap >= 0, "d_gap", "must be >= 0");
    require(!q.label.empty(), "label", "must not be empty");
}

DriveSpec::DriveSpec(double A_z, double f_d, int n_max) : A_z_(A_z), f_d_(f_d), n_max_(n_max) {
    if (!(std::isfinite(f_d) && f_d > 0)) throw ValidationError("drive.f_d", "must be positive");
    if (!std::isfinite(A_z)) throw ValidationError("drive.A_z", "must be finite");
    const int needed = bessel_cutoff(A_z / f_d);
    if (n_max < 0) {
        n_max_ = needed;
    } else if (n_max < needed) {
        throw ValidationError("drive.n_max", "must be >= " + std::to_string(needed) +
                                                 " so that |J_n(A_z/f_d)| < 1e-6 beyond it");
    }
}

DriveSpec DriveSpec::with_frequency(double f_d) const {
    return DriveSpec(ratio() * f_d, f_d);
}

double mode_amplitude_at(double delta, const Mode& mode, double k_0, PositionPhase phase) {
    const double k = phase == PositionPhase::Center ? k_0 : mode.k;
    // Reduce m π/2 modulo 2π exactly before adding the continuous phase.
    const int quarter = ((mode.index % 4) + 4) % 4;
    const double arg = k * delta;
    switch (quarter) {
        case 0: return std::cos(arg);
        case 1: return -std::sin(arg);
        case 2: return -std::cos(arg);
        default: return std::sin(arg);
    }
}

double flip_chip_factor(const QubitSpec& q, const Mode& mode) {
    return std::exp(-mode.k * q.d_gap);
}

double qubit_mode_coupling(const QubitSpec& q, const Mode& mode, double k_0, PositionPhase phase) {
    return q.g_0 * mode_amplitude_at(q.delta, mode, k_0, phase) * flip_chip_factor(q, mode);
}

double sideband_coupling(const QubitSpec& q, const Mode& mode, double k_0, const DriveSpec& drive,
                         int n, PositionPhase phase) {
    if (std::abs(n) > drive.n_max())
        throw DomainError("sideband order " + std::to_string(n) + " exceeds n_max");
    return qubit_mode_coupling(q, mode, k_0, phase) * bessel_j(n, drive.ratio());
}

double CouplingTable::at(const std::string& qubit, int m, int n) const {
    for (const auto& e : entries_)
        if (e.qubit == qubit && e.m == m && e.n == n) return e.G;
    throw std::out_of_range("no coupling for (" + qubit + ", " + std::to_string(m) + ", " +
                            std::to_string(n) + ")");
}

void CouplingTable::write_csv(std::ostream& os) const {
    os << "qubit,m,n,G_Hz\n";
    for (const auto& e : entries_)
        os << e.qubit << ',' << e.m << ',' << e.n << ',' << io::format_double(e.G) << '\n';
}

CouplingTable static_couplings(const std::vector<QubitSpec>& qubits, const ModeSet& modes,
                               PositionPhase phase) {
    CouplingTable table;
    for (const auto& q : qubits)
        for (const auto& mode : modes)
            table.add({q.label, mode.index, 0, qubit_mode_coupling(q, mode, modes.k_0(), phase)});
    return table;
}

CouplingTable sideband_table(const QubitSpec& q, const ModeSet& modes, const DriveSpec& drive,
                             PositionPhase phase) {
    const auto J = bessel_j_table(drive.n_max(), drive.ratio());
    CouplingTable table;
    for (const auto& mode : modes) {
        const double g = qubit_mode_coupling(q, mode, modes.k_0(), phase);
        for (int n = -drive.n_max(); n <= drive.n_max(); ++n)
            table.add({q.label, mode.index, n, g * J[n + drive.n_max()]});
    }
    return table;
}

}  // namespace phonobus
