#pragma once

#include <string>
#include <utility>
#include <vector>

#include "phonobus/coupling.hpp"
#include "phonobus/hamiltonian.hpp"

namespace phonobus {

// A second-order term with denominator Δ is accepted when
// |Δ| > max(coupling_factor * |coupling|, linewidth_factor * max(Γ_sk, γ_m)).
struct DispersiveGuard {
    double coupling_factor = 1.0;
    double linewidth_factor = 10.0;
};

struct EffectiveOptions {
    PositionPhase phase = PositionPhase::Center;
    DispersiveGuard guard;
};

// χ_m = Σ_n g_m² J_n² / (f_m - f_q - n f_d). Throws NearResonanceError.
double chi_shift(const QubitSpec& q, const ModeSet& modes, const DriveSpec& drive, int m,
                 const EffectiveOptions& options = {});

// G_{m,m'} = Σ_n g_m g_m' J_n J_n' [1/(2(f_m - f_q - n f_d)) + 1/(2(f_m' - f_q - n' f_d))]
// with n' = n + order_difference.
double phonon_phonon_coupling(const QubitSpec& q, const ModeSet& modes, const DriveSpec& drive,
                              int m, int m2, int order_difference,
                              const EffectiveOptions& options = {});

struct SidebandResonance {
    int m = 0;
    int n = 0;
    double G = 0.0;         // Hz
    double detuning = 0.0;  // f_q - f_m + n f_d, Hz
};

struct QubitModeEffective {
    std::string qubit;
    std::vector<SidebandResonance> resonances;
    std::vector<SidebandResonance> off_resonant;
};

// Resonances for the requested (m, n) pairs. With `include_off_resonant`,
// every other (mode, sideband) pair with |G| >= min_coupling is kept as an
// oscillating term.
QubitModeEffective qubit_mode_effective(const QubitSpec& q, const ModeSet& modes,
                                        const DriveSpec& drive,
                                        const std::vector<std::pair<int, int>>& targets,
                                        bool include_off_resonant = false,
                                        double min_coupling = 0.0,
                                        PositionPhase phase = PositionPhase::Center);

struct PhononPhononEffective {
    int m = 0;
    int m2 = 0;
    int order_difference = 0;             // n' - n
    std::vector<std::pair<int, double>> chi;  // (mode index, χ) for every mode in the set
    double G = 0.0;
    double f_d = 0.0;
    double residual = 0.0;  // (n'-n) f_d + (f_m + χ_m) - (f_m' + χ_m')
    double chi_of(int mode) const;
};

// n' - n defaults to round((f_m' - f_m) / f_d).
PhononPhononEffective phonon_phonon_effective(const QubitSpec& q, const ModeSet& modes,
                                              const DriveSpec& drive, int m, int m2,
                                              const EffectiveOptions& options = {});

struct ModeContribution {
    int m = 0;
    double g_A = 0.0;
    double g_B = 0.0;
    double Delta = 0.0;  // f_m - (f_A + f_B)/2
    double G = 0.0;      // -g_A g_B / Δ
};

struct QubitQubitEffective {
    std::string qubit_A;
    std::string qubit_B;
    double f_mean = 0.0;
    double delta_A = 0.0;  // Δ̃_A
    double delta_B = 0.0;  // Δ̃_B
    double G_AB = 0.0;
    std::vector<ModeContribution> contributions;
};

QubitQubitEffective qubit_qubit_coupling(const QubitSpec& qA, const QubitSpec& qB,
                                         const ModeSet& modes,
                                         const EffectiveOptions& options = {});

enum class MatchingKind { QubitMode1, QubitMode2, PhononPhonon };

struct MatchingOptions {
    int sideband = -1;           // n for QubitMode1
    double tolerance = 1.0e3;    // Hz
    int max_iterations = 200;
    double scan_step = 0.25e6;   // Hz, bracket search step for PhononPhonon
    EffectiveOptions effective;
};

struct MatchingResult {
    DriveSpec drive;
    double residual = 0.0;  // Hz
    int iterations = 0;
    int order_difference = 0;
};

// Qubit-mode kinds are solved in closed form at the initial A_z/f_d ratio;
// PhononPhonon root-finds f_d (Brent) at fixed A_z/f_d. Throws
// NoConvergenceError or propagates NearResonanceError.
MatchingResult solve_matching(MatchingKind kind, const QubitSpec& q, const ModeSet& modes,
                              const std::vector<int>& targets, const DriveSpec& initial,
                              const MatchingOptions& options = {});

// Re-evaluates the matching condition at `drive`; for QubitMode2 the larger
// of the two residuals.
double matching_residual(MatchingKind kind, const QubitSpec& q, const ModeSet& modes,
                         const std::vector<int>& targets, const DriveSpec& drive,
                         const MatchingOptions& options = {});

// Embed each model into `layout` as an abstract term list.
HamiltonianSpec build_effective_hamiltonian(const QubitModeEffective& model,
                                            std::vector<Subsystem> layout);
HamiltonianSpec build_effective_hamiltonian(const PhononPhononEffective& model,
                                            std::vector<Subsystem> layout);
HamiltonianSpec build_effective_hamiltonian(const QubitQubitEffective& model,
                                            std::vector<Subsystem> layout);

}  // namespace phonobus
