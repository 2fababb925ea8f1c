#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "phonobus/params.hpp"

namespace phonobus {

struct QubitSpec {
    std::string label = "q0";
    double f_q = 4.0e9;      // Hz
    double delta = 0.0;      // m, x = L_c/2 + delta
    double g_0 = 113.0e6;    // Hz
    double Gamma_sk = 0.4e6; // Hz
    double d_gap = 0.0;      // m, flip-chip separation

    bool operator==(const QubitSpec&) const = default;
};

void validate(const QubitSpec& q, const std::string& key_prefix = "qubit");

// Longitudinal modulation A_z cos(2π f_d t) σ11.
class DriveSpec {
public:
    DriveSpec() : DriveSpec(0.0, 80.0e6) {}
    // n_max < 0 selects the smallest cutoff with |J_n(A_z/f_d)| < 1e-6 beyond
    // it; an explicit n_max below that cutoff throws ValidationError.
    DriveSpec(double A_z, double f_d, int n_max = -1);

    double A_z() const { return A_z_; }
    double f_d() const { return f_d_; }
    int n_max() const { return n_max_; }
    double ratio() const { return A_z_ / f_d_; }

    // Same amplitude-to-frequency ratio at a new drive frequency.
    DriveSpec with_frequency(double f_d) const;

    bool operator==(const DriveSpec&) const = default;

private:
    double A_z_;
    double f_d_;
    int n_max_;
};

// Standing-wave amplitude of `mode` at offset delta from the cavity centre.
double mode_amplitude_at(double delta, const Mode& mode, double k_0,
                         PositionPhase phase = PositionPhase::Center);

double flip_chip_factor(const QubitSpec& q, const Mode& mode);

// Signed single-phonon coupling g_m (Hz), including flip-chip suppression.
double qubit_mode_coupling(const QubitSpec& q, const Mode& mode, double k_0,
                           PositionPhase phase = PositionPhase::Center);

// G_{m,n} = g_m J_n(A_z / f_d).
double sideband_coupling(const QubitSpec& q, const Mode& mode, double k_0,
                         const DriveSpec& drive, int n,
                         PositionPhase phase = PositionPhase::Center);

struct CouplingEntry {
    std::string qubit;
    int m = 0;
    int n = 0;
    double G = 0.0;  // Hz
};

// Static couplings g_m (n = 0) or sideband couplings G_{m,n}, in
// qubit-major, ascending (m, n) order.
class CouplingTable {
public:
    const std::vector<CouplingEntry>& entries() const { return entries_; }
    void add(CouplingEntry e) { entries_.push_back(std::move(e)); }

    // Throws std::out_of_range when no entry matches.
    double at(const std::string& qubit, int m, int n = 0) const;

    void write_csv(std::ostream& os) const;

private:
    std::vector<CouplingEntry> entries_;
};

CouplingTable static_couplings(const std::vector<QubitSpec>& qubits, const ModeSet& modes,
                               PositionPhase phase = PositionPhase::Center);

CouplingTable sideband_table(const QubitSpec& q, const ModeSet& modes, const DriveSpec& drive,
                             PositionPhase phase = PositionPhase::Center);

}  // namespace phonobus
