#include "phonobus/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "phonobus/effective.hpp"
#include "phonobus/error.hpp"

namespace phonobus {

using nlohmann::json;

namespace {

const std::set<std::string> kKeys = {
    "hamiltonian", "effective_kind", "modes", "fock_cutoff", "max_excitations", "frame",
    "initial", "t_span", "samples", "observables", "dissipation", "temperature", "targets",
    "off_resonant", "target", "drive"};

std::string str(const json& j, const std::string& key) {
    if (!j.is_string()) throw ValidationError(key, "must be a string");
    return j.get<std::string>();
}

double num(const json& j, const std::string& key) {
    if (!j.is_number() || !std::isfinite(j.get<double>()))
        throw ValidationError(key, "must be a finite number");
    return j.get<double>();
}

int integer(const json& j, const std::string& key) {
    if (!j.is_number_integer()) throw ValidationError(key, "must be an integer");
    return j.get<int>();
}

bool boolean(const json& j, const std::string& key) {
    if (!j.is_boolean()) throw ValidationError(key, "must be true or false");
    return j.get<bool>();
}

const json& array(const json& j, const std::string& key) {
    if (!j.is_array()) throw ValidationError(key, "must be an array");
    return j;
}

}  // namespace

Protocol parse_protocol(const json& j) {
    if (!j.is_object()) throw ValidationError("<root>", "protocol must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!kKeys.count(it.key())) throw ValidationError(it.key(), "unknown key");

    Protocol p;
    if (auto it = j.find("hamiltonian"); it != j.end()) {
        const auto v = str(*it, "hamiltonian");
        if (v == "full") p.hamiltonian = HamiltonianKind::Full;
        else if (v == "effective") p.hamiltonian = HamiltonianKind::Effective;
        else if (v == "both") p.hamiltonian = HamiltonianKind::Both;
        else throw ValidationError("hamiltonian", "must be full, effective or both");
    }
    if (auto it = j.find("effective_kind"); it != j.end()) {
        const auto v = str(*it, "effective_kind");
        if (v == "qubit_mode") p.effective_kind = EffectiveKind::QubitMode;
        else if (v == "phonon_phonon") p.effective_kind = EffectiveKind::PhononPhonon;
        else if (v == "qubit_qubit") p.effective_kind = EffectiveKind::QubitQubit;
        else throw ValidationError("effective_kind", "must be qubit_mode, phonon_phonon or qubit_qubit");
    }
    if (auto it = j.find("modes"); it != j.end()) {
        std::vector<int> m;
        const auto& a = array(*it, "modes");
        for (std::size_t i = 0; i < a.size(); ++i) m.push_back(integer(a[i], "modes[" + std::to_string(i) + "]"));
        if (m.empty()) throw ValidationError("modes", "must not be empty");
        p.modes = m;
    }
    if (auto it = j.find("fock_cutoff"); it != j.end()) {
        p.fock_cutoff = integer(*it, "fock_cutoff");
        if (p.fock_cutoff < 1) throw ValidationError("fock_cutoff", "must be >= 1");
    }
    if (auto it = j.find("max_excitations"); it != j.end() && !it->is_null()) {
        p.max_excitations = integer(*it, "max_excitations");
        if (*p.max_excitations < 0) throw ValidationError("max_excitations", "must be >= 0");
    }
    if (auto it = j.find("frame"); it != j.end()) {
        const auto v = str(*it, "frame");
        if (v == "rotating") p.frame = Frame::RotatingAtF0;
        else if (v == "lab") p.frame = Frame::Lab;
        else throw ValidationError("frame", "must be rotating or lab");
    }
    if (auto it = j.find("initial"); it != j.end()) {
        if (!it->is_object()) throw ValidationError("initial", "must be an object");
        for (auto k = it->begin(); k != it->end(); ++k) {
            if (k.key() == "qubits") {
                const auto& a = array(*k, "initial.qubits");
                for (std::size_t i = 0; i < a.size(); ++i)
                    p.excited_qubits.push_back(str(a[i], "initial.qubits[" + std::to_string(i) + "]"));
            } else if (k.key() == "modes") {
                if (!k->is_object()) throw ValidationError("initial.modes", "must be an object");
                for (auto e = k->begin(); e != k->end(); ++e) {
                    const std::string key = "initial.modes." + e.key();
                    int m = 0;
                    try {
                        std::size_t used = 0;
                        m = std::stoi(e.key(), &used);
                        if (used != e.key().size()) throw std::invalid_argument(e.key());
                    } catch (const std::exception&) {
                        throw ValidationError(key, "mode key must be an integer");
                    }
                    const int n = integer(*e, key);
                    if (n < 0) throw ValidationError(key, "must be >= 0");
                    p.mode_occupation[m] = n;
                }
            } else {
                throw ValidationError("initial." + k.key(), "unknown key");
            }
        }
    }
    {
        auto it = j.find("t_span");
        if (it == j.end()) throw ValidationError("t_span", "is required");
        const auto& a = array(*it, "t_span");
        if (a.size() != 2) throw ValidationError("t_span", "must hold [t_start, t_end]");
        p.t_start = num(a[0], "t_span[0]");
        p.t_end = num(a[1], "t_span[1]");
        if (!(p.t_end > p.t_start)) throw ValidationError("t_span", "t_end must exceed t_start");
    }
    if (auto it = j.find("samples"); it != j.end()) {
        const int s = integer(*it, "samples");
        if (s < 2) throw ValidationError("samples", "must be >= 2");
        p.samples = static_cast<std::size_t>(s);
    }
    if (auto it = j.find("observables"); it != j.end()) {
        const auto& a = array(*it, "observables");
        for (std::size_t i = 0; i < a.size(); ++i)
            p.observables.push_back(str(a[i], "observables[" + std::to_string(i) + "]"));
    }
    if (auto it = j.find("dissipation"); it != j.end()) p.dissipation = boolean(*it, "dissipation");
    if (auto it = j.find("temperature"); it != j.end()) {
        p.temperature = num(*it, "temperature");
        if (*p.temperature < 0) throw ValidationError("temperature", "must be >= 0");
    }
    if (auto it = j.find("targets"); it != j.end()) {
        const auto& a = array(*it, "targets");
        for (std::size_t i = 0; i < a.size(); ++i) {
            const std::string key = "targets[" + std::to_string(i) + "]";
            if (a[i].is_array()) {
                if (a[i].size() != 2) throw ValidationError(key, "must be [m, n]");
                p.sideband_targets.emplace_back(integer(a[i][0], key + "[0]"), integer(a[i][1], key + "[1]"));
            } else {
                p.mode_targets.push_back(integer(a[i], key));
            }
        }
    }
    if (auto it = j.find("off_resonant"); it != j.end()) p.off_resonant = boolean(*it, "off_resonant");
    if (auto it = j.find("target"); it != j.end()) p.target = str(*it, "target");
    if (auto it = j.find("drive"); it != j.end()) {
        if (!it->is_object()) throw ValidationError("drive", "must be an object");
        double A_z = 0.0, f_d = 80e6;
        for (auto k = it->begin(); k != it->end(); ++k) {
            if (k.key() == "A_z") A_z = num(*k, "drive.A_z");
            else if (k.key() == "f_d") f_d = num(*k, "drive.f_d");
            else throw ValidationError("drive." + k.key(), "unknown key");
        }
        p.drive = DriveSpec(A_z, f_d);
    }
    if (p.hamiltonian != HamiltonianKind::Full) {
        if (p.effective_kind == EffectiveKind::QubitMode && p.sideband_targets.empty())
            throw ValidationError("targets", "qubit_mode needs [[m, n], ...] targets");
        if (p.effective_kind == EffectiveKind::PhononPhonon && p.mode_targets.size() != 2)
            throw ValidationError("targets", "phonon_phonon needs [m, m'] targets");
    }
    return p;
}

Protocol load_protocol(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path.string(), "cannot open protocol file");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string(), std::string("invalid JSON: ") + e.what());
    }
    return parse_protocol(j);
}

namespace {

HamiltonianSpec effective_spec(const Config& config, const Protocol& p, const ModeSet& modes,
                               const DriveSpec& drive, const std::vector<Subsystem>& layout) {
    const auto phase = config.device.position_phase;
    EffectiveOptions opt;
    opt.phase = phase;
    const QubitSpec& q = config.qubits.at(0);
    switch (p.effective_kind) {
        case EffectiveKind::QubitMode:
            return build_effective_hamiltonian(
                qubit_mode_effective(q, modes, drive, p.sideband_targets, p.off_resonant, 0.0, phase), layout);
        case EffectiveKind::PhononPhonon:
            return build_effective_hamiltonian(
                phonon_phonon_effective(q, modes, drive, p.mode_targets[0], p.mode_targets[1], opt), layout);
        case EffectiveKind::QubitQubit:
            if (config.qubits.size() < 2) throw ValidationError("qubits", "qubit_qubit needs two qubits");
            return build_effective_hamiltonian(
                qubit_qubit_coupling(config.qubits[0], config.qubits[1], modes, opt), layout);
    }
    throw Error("unreachable");
}

std::vector<Observable> pick(const HilbertSpace& space, const std::vector<std::string>& names) {
    auto all = default_observables(space);
    if (names.empty()) return all;
    std::vector<Observable> out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        auto it = std::find_if(all.begin(), all.end(), [&](const Observable& o) { return o.name == names[i]; });
        if (it == all.end())
            throw ValidationError("observables[" + std::to_string(i) + "]", "unknown observable " + names[i]);
        out.push_back(*it);
    }
    return out;
}

}  // namespace

ProtocolOutcome run_protocol(const Config& config, const Protocol& p) {
    const ModeSet all = derive_modes(config.device);
    ModeSet modes = all;
    if (p.modes) {
        for (std::size_t i = 0; i < p.modes->size(); ++i)
            if (!all.contains((*p.modes)[i]))
                throw ValidationError("modes[" + std::to_string(i) + "]", "mode not in the comb");
        modes = all.select(*p.modes);
    }
    // The qubit-qubit model uses only the first two qubits; other models one.
    std::vector<QubitSpec> qubits = config.qubits;
    const std::size_t keep = p.hamiltonian != HamiltonianKind::Full &&
                                     p.effective_kind == EffectiveKind::QubitQubit
                                 ? 2
                                 : qubits.size();
    if (qubits.size() > keep) qubits.resize(keep);
    const DriveSpec drive = p.drive.value_or(config.drive);

    HilbertSpace space(make_layout(qubits, modes), p.fock_cutoff, p.max_excitations);
    std::vector<int> occ(space.layout().size(), 0);
    for (const auto& label : p.excited_qubits) {
        bool found = false;
        for (std::size_t i = 0; i < qubits.size(); ++i)
            if (qubits[i].label == label) occ[i] = 1, found = true;
        if (!found) throw ValidationError("initial.qubits", "unknown qubit " + label);
    }
    for (const auto& [m, n] : p.mode_occupation) {
        if (!modes.contains(m)) throw ValidationError("initial.modes." + std::to_string(m), "mode not simulated");
        const auto& layout = space.layout();
        for (std::size_t i = 0; i < layout.size(); ++i)
            if (layout[i].kind == SubsystemKind::Mode && layout[i].mode_index == m) occ[i] = n;
    }
    if (!space.index_of(occ)) throw ValidationError("initial", "state lies outside the truncated space");
    DensityState rho0 = DensityState::pure(space.basis_vector(occ), p.t_start);

    std::vector<Dissipator> diss;
    if (p.dissipation)
        diss = thermal_dissipators(space, qubits, modes, p.temperature.value_or(config.device.T_bath));
    const std::optional<DriveSpec> full_drive =
        drive.A_z() != 0.0 ? std::optional<DriveSpec>(drive) : std::nullopt;
    auto full_spec = [&] {
        return assemble_full_hamiltonian(qubits, modes, static_couplings(qubits, modes, config.device.position_phase),
                                         full_drive, p.frame);
    };
    EvolveOptions eopt;
    eopt.samples = p.samples;

    ProtocolOutcome out;
    const auto obs = pick(space, p.observables);
    switch (p.hamiltonian) {
        case HamiltonianKind::Full: {
            LindbladGenerator gen(space, full_spec(), diss);
            out.full = evolve(gen, rho0, p.t_start, p.t_end, obs, eopt);
            break;
        }
        case HamiltonianKind::Effective: {
            LindbladGenerator gen(space, effective_spec(config, p, modes, drive, space.layout()), diss);
            out.effective = evolve(gen, rho0, p.t_start, p.t_end, obs, eopt);
            break;
        }
        case HamiltonianKind::Both: {
            const std::string target = p.target.empty() ? obs.back().name : p.target;
            auto report = compare_effective_vs_full(space, effective_spec(config, p, modes, drive, space.layout()),
                                                    full_spec(), diss, rho0, p.t_end, target,
                                                    0.5 * p.samples / (p.t_end - p.t_start), eopt);
            out.full = report.full;
            out.effective = report.effective;
            out.comparison = std::move(report);
            break;
        }
    }
    return out;
}

std::vector<std::string> write_protocol_outputs(const ProtocolOutcome& outcome,
                                                const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> files;
    auto csv = [&](const SimResult& r, const std::string& name) {
        std::ofstream os(dir / name, std::ios::binary);
        r.write_csv(os);
        files.push_back(name);
    };
    if (outcome.full) csv(*outcome.full, "full.csv");
    if (outcome.effective) csv(*outcome.effective, "effective.csv");
    if (outcome.comparison) {
        const auto& c = *outcome.comparison;
        json series = json::array();
        for (const auto& s : c.series)
            series.push_back({{"name", s.name},
                              {"max_deviation", s.max_deviation},
                              {"frequency_fit_full_Hz", s.frequency_fit_full},
                              {"frequency_fit_effective_Hz", s.frequency_fit_effective},
                              {"frequency_crossings_full_Hz", s.frequency_crossings_full},
                              {"frequency_crossings_effective_Hz", s.frequency_crossings_effective}});
        const json j = {{"max_deviation", c.max_deviation},
                        {"target", c.target},
                        {"swap_time_s", c.swap_time},
                        {"fidelity_full", c.fidelity_full},
                        {"fidelity_effective", c.fidelity_effective},
                        {"series", series}};
        std::ofstream os(dir / "comparison.json", std::ios::binary);
        os << j.dump(2) << '\n';
        files.push_back("comparison.json");
    }
    return files;
}

}  // namespace phonobus
