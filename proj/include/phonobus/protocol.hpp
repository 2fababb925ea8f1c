#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "phonobus/config.hpp"
#include "phonobus/dynamics.hpp"

namespace phonobus {

enum class HamiltonianKind { Full, Effective, Both };
enum class EffectiveKind { QubitMode, PhononPhonon, QubitQubit };

// Simulation recipe read from a protocol file. Keys:
//   hamiltonian      "full" | "effective" | "both"
//   effective_kind   "qubit_mode" | "phonon_phonon" | "qubit_qubit"
//   modes            mode indices kept (default: all)
//   fock_cutoff, max_excitations
//   frame            "rotating" | "lab" (full model only)
//   initial          {"qubits": [labels], "modes": {"<m>": n}}
//   t_span           [t0, t1] in seconds
//   samples, observables, dissipation, temperature
//   targets          [[m, n], ...] for qubit_mode, [m, m'] for phonon_phonon
//   off_resonant     keep non-resonant sidebands in the qubit_mode model
//   target           observable used for the swap report ("both")
//   drive            {A_z, f_d} override
struct Protocol {
    HamiltonianKind hamiltonian = HamiltonianKind::Full;
    EffectiveKind effective_kind = EffectiveKind::QubitMode;
    std::optional<std::vector<int>> modes;
    int fock_cutoff = 3;
    std::optional<int> max_excitations;
    Frame frame = Frame::RotatingAtF0;
    std::vector<std::string> excited_qubits;
    std::map<int, int> mode_occupation;
    double t_start = 0.0;
    double t_end = 0.0;
    std::size_t samples = 201;
    std::vector<std::string> observables;  // empty: all
    bool dissipation = true;
    std::optional<double> temperature;
    std::vector<std::pair<int, int>> sideband_targets;
    std::vector<int> mode_targets;
    bool off_resonant = false;
    std::string target;
    std::optional<DriveSpec> drive;
};

// Throws ValidationError with the offending key path.
Protocol parse_protocol(const nlohmann::json& j);
Protocol load_protocol(const std::filesystem::path& path);

struct ProtocolOutcome {
    std::optional<SimResult> full;
    std::optional<SimResult> effective;
    std::optional<ComparisonReport> comparison;
};

ProtocolOutcome run_protocol(const Config& config, const Protocol& protocol);

// Writes full.csv / effective.csv and, for comparisons, comparison.json into
// `dir`; returns the file names written.
std::vector<std::string> write_protocol_outputs(const ProtocolOutcome& outcome,
                                                const std::filesystem::path& dir);

}  // namespace phonobus
