#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "phonobus/config.hpp"
#include "phonobus/dynamics.hpp"
#include "phonobus/effective.hpp"

namespace phonobus {

struct SweepAxis {
    std::string name;
    std::vector<double> values;
};

struct SweepSpec {
    std::string figure_id;
    std::vector<SweepAxis> axes;
    Config fixed;
    std::vector<std::string> columns;

    // Throws ValidationError for empty or non-monotone grids.
    void validate() const;
};

struct Dataset {
    SweepSpec spec;
    std::vector<std::vector<double>> rows;
    nlohmann::json notes = nlohmann::json::object();

    void write_csv(std::ostream& os) const;
    nlohmann::json meta() const;
};

// Number of sweep workers: PHONOBUS_THREADS if set (>= 1), otherwise the
// hardware concurrency.
unsigned sweep_threads();

// Calls job(i) for i in [0, count) on a small work queue. Jobs must write
// into pre-sized storage keyed by i.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& job);

std::vector<double> linspace(double a, double b, std::size_t n);
std::vector<double> logspace(double a, double b, std::size_t n);

// ---- Coupling strengths, decay ratios and thermal populations ----------

struct Fig2Data {
    Dataset couplings_vs_position;  // fig2a
    Dataset ratios;                 // fig2b
    Dataset thermal;                // fig2c
};

Fig2Data fig2_sweep(const Config& config, std::size_t points = 101);

// ---- Sideband access of one or two modes --------------------------------

enum class AccessMode { OneMode, TwoMode, Detuned };

// Operating point for sideband access. The selective-access regime needs
// |G_{m,n}| well below the free spectral range, so the qubit sits at δ = 0
// (odd modes decoupled) behind a flip-chip gap with k_0 d = gap_k0d. Two-mode
// access puts the carrier only f_fsr away from both targets, which needs the
// weaker coupling of pair_gap_k0d to keep the two transfers symmetric.
struct AccessBundle {
    double qubit_offset = 400.0e6;   // f_q - f_0
    double gap_k0d = 2.5;
    double pair_gap_k0d = 4.0;
    double delta = 0.0;              // m
    double drive_ratio = 0.5;        // A_z / f_d
    std::vector<int> modes = {-2, -1, 0, 1, 2};
    int target = 0;                  // one-mode target
    std::pair<int, int> pair = {0, 2};  // two-mode targets (qubit placed halfway)
    double detune_factor = 10.0;     // Detuned: drive offset in units of |G|
    int fock_cutoff = 3;
    int max_excitations = 2;
    double periods = 2.5;            // simulated population periods
    std::size_t samples = 2001;
};

struct AccessResult {
    AccessMode mode = AccessMode::OneMode;
    Config bundle;
    ModeSet modes;
    MatchingResult matching;
    double G_expected = 0.0;          // |g_m J_1(A_z/f_d)|
    double rabi_fit = 0.0;            // Hz, population oscillation frequency
    double rabi_crossings = 0.0;
    double leakage = 0.0;             // max non-target mode population
    double peak_target = 0.0;         // max of the drive-period averaged target population
                                      // (sum for two modes)
    double quarter_period_a = 0.0;    // two-mode: populations at t = 1/(4√2|G|)
    double quarter_period_b = 0.0;
    double runtime_s = 0.0;
    SimResult sim;
    std::optional<ComparisonReport> comparison;
};

AccessResult fig3_protocol(const Config& config, AccessMode mode,
                           const AccessBundle& bundle = {});

// ---- Qubit-mediated phonon-phonon coupling --------------------------------

struct PhononBundle {
    double qubit_offset = 400.0e6;
    double drive_ratio = 5.0;
    double f_d_guess = 80.0e6;
    int m = -2;
    int m2 = 2;
    std::vector<double> ratio_grid = linspace(4.5, 5.5, 101);
    std::vector<double> f_d_grid = linspace(76.0e6, 84.0e6, 101);
    // Modes retained in the full swap simulation (default: the targets).
    std::vector<int> swap_modes = {-2, 2};
    int fock_cutoff = 3;
    int max_excitations = 2;
    double swap_periods = 1.5;  // in units of 1/(2|G|)
    std::size_t samples = 2001;
};

struct PhononResult {
    Config bundle;
    Dataset map;  // fig4a: G, χ_m - χ_m', residual over (ratio, f_d)
    MatchingResult matching;
    PhononPhononEffective model;
    double peak_transfer = 0.0;
    double peak_time = 0.0;
    double predicted_swap_time = 0.0;
    double sweep_runtime_s = 0.0;
    double runtime_s = 0.0;
    SimResult sim;  // fig4b
};

PhononResult fig4_sweep(const Config& config, const PhononBundle& bundle = {},
                        bool run_swap = true);

// ---- Phonon-mediated qubit-qubit coupling ---------------------------------

struct QubitPairBundle {
    double mean_frequency = 3.2e9;
    double delta_A_wavelengths = 0.25;
    double delta_B_wavelengths = -1.75;
    std::vector<int> mode_counts = {1, 3, 5, 7, 9, 11};
    std::vector<double> detunings = linspace(0.0, 50.0e6, 101);
    double ratio_cap = 1.0e12;
};

struct QubitPairResult {
    Config bundle;
    Dataset vs_mode_count;  // fig5a
    Dataset vs_detuning;    // fig5b
    std::vector<double> G_AB;  // per mode count
};

// The N_p modes mediating the coupling are the N_p modes closest to the
// mean qubit frequency.
QubitPairResult fig5_sweep(const Config& config, const QubitPairBundle& bundle = {});

// ---- Acceptance ------------------------------------------------------------

struct Criterion {
    int id = 0;
    std::string name;
    double measured = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

struct AcceptanceReport {
    std::vector<Criterion> criteria;
    bool overall_pass() const;
    const Criterion* find(int id) const;
    nlohmann::json to_json() const;
};

struct AcceptanceOptions {
    double tolerance_scale = 1.0;  // multiplies every tolerance band
    unsigned seed = 20240611;
    std::vector<int> only;         // empty: run all
    // Executable used for the determinism criterion; the library writer is
    // used when empty.
    std::string cli_path;
    std::filesystem::path scratch_dir = std::filesystem::temp_directory_path() / "phonobus_accept";
};

AcceptanceReport run_acceptance(const Config& config = Config::defaults(),
                                const AcceptanceOptions& options = {});

// ---- Output -----------------------------------------------------------------

// Writes results/<figure_id>/data.csv and meta.json (+ plot.svg).
void write_dataset(const Dataset& dataset, const std::filesystem::path& root, bool svg,
                   const std::string& svg_content = {});

// Writes every panel of figure `id` (2..5) under `root`; returns the figure
// ids written.
std::vector<std::string> write_figure(int id, const Config& config,
                                      const std::filesystem::path& root, bool svg);

}  // namespace phonobus
