#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "phonobus/integrator.hpp"
#include "phonobus/lindblad.hpp"

namespace phonobus {

struct Observable {
    std::string name;
    SparseOp op;
};

// "P_e:<label>" for every qubit and "n:<m>" for every mode.
std::vector<Observable> default_observables(const HilbertSpace& space);

struct Series {
    std::string name;
    std::vector<double> values;
};

struct StateDiagnostics {
    double max_trace_error = 0.0;
    double max_hermiticity_error = 0.0;
    double min_eigenvalue = 0.0;  // most negative eigenvalue seen (0 if not checked)
    bool positivity_checked = false;
};

struct SimResult {
    std::vector<double> times;  // s
    std::vector<Series> series;
    DensityState final_state;
    StateDiagnostics diagnostics;
    StepStats steps;

    const std::vector<double>& at(const std::string& name) const;
    void write_csv(std::ostream& os) const;
};

struct EvolveOptions {
    StepControl control;
    std::size_t samples = 201;  // uniform output grid including both ends
    double trace_tolerance = 1e-7;
    double hermiticity_tolerance = 1e-10;
    double positivity_tolerance = 1e-8;
    // Eigen-decompose ρ at every sample; automatic when unset (on for
    // dimension <= 128).
    std::optional<bool> check_positivity;
};

// Integrates the master equation on a uniform output grid over
// [t_start, t_end]. Throws TraceDrift, StepSizeUnderflow, or IntegratorError
// when a state invariant is violated at a sample.
SimResult evolve(const LindbladGenerator& generator, const DensityState& rho0,
                 double t_start, double t_end, const std::vector<Observable>& observables,
                 const EvolveOptions& options = {});

// Population-oscillation frequency from mean-level crossings with hysteresis.
double frequency_from_crossings(const std::vector<double>& t, const std::vector<double>& y);

// Frequency of the least-squares damped sinusoid
// c0 + e^{-κt} (a + b cos 2πft + c sin 2πft) with f in [f_lo, f_hi] and
// κ >= 0 (grid scan refined by golden-section search).
double frequency_from_fit(const std::vector<double>& t, const std::vector<double>& y,
                          double f_lo, double f_hi);

struct SeriesComparison {
    std::string name;
    double max_deviation = 0.0;
    double frequency_crossings_full = 0.0;
    double frequency_crossings_effective = 0.0;
    double frequency_fit_full = 0.0;
    double frequency_fit_effective = 0.0;
};

struct ComparisonReport {
    std::vector<SeriesComparison> series;
    double max_deviation = 0.0;
    std::string target;          // observable used for the swap fidelity
    double swap_time = 0.0;      // s, time of the target's first maximum (effective)
    double fidelity_full = 0.0;  // target population of the full run at swap_time
    double fidelity_effective = 0.0;
    SimResult full;
    SimResult effective;
};

// Runs both Hamiltonians from the same initial state on the same space and
// compares every observable. Frequencies are searched below f_max.
ComparisonReport compare_effective_vs_full(const HilbertSpace& space,
                                           const HamiltonianSpec& effective,
                                           const HamiltonianSpec& full,
                                           const std::vector<Dissipator>& dissipators,
                                           const DensityState& rho0, double t_end,
                                           const std::string& target, double f_max,
                                           const EvolveOptions& options = {});

// Complex polariton frequencies (Hz) of the weak-excitation first-moment
// matrix: diagonal f - i γ (n_th + 1)/2, symmetric couplings g_m between the
// qubit and each mode. Eigenvalues sorted by real part.
Eigen::VectorXcd linearized_spectrum(const QubitSpec& qubit, const ModeSet& modes,
                                     double k_0, double T,
                                     PositionPhase phase = PositionPhase::Center);

}  // namespace phonobus
