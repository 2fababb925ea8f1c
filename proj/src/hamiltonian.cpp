#include "phonobus/hamiltonian.hpp"

#include <cmath>
#include <stdexcept>

#include "phonobus/error.hpp"

namespace phonobus {

void HamiltonianSpec::validate() const {
    const int n = static_cast<int>(layout.size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const Term& t = terms[i];
        const std::string where = "term " + std::to_string(i);
        if (t.site < 0 || t.site >= n) throw Error(where + ": site out of range");
        if (!std::isfinite(t.coefficient) || !std::isfinite(t.frequency) ||
            !std::isfinite(t.phase))
            throw Error(where + ": non-finite coefficient");
        if (t.kind == TermKind::Exchange) {
            if (t.partner < 0 || t.partner >= n) throw Error(where + ": partner out of range");
            if (t.partner == t.site) throw Error(where + ": exchange needs two distinct sites");
        }
    }
}

int HamiltonianSpec::qubit_site(const std::string& label) const {
    for (std::size_t i = 0; i < layout.size(); ++i)
        if (layout[i].kind == SubsystemKind::Qubit && layout[i].label == label)
            return static_cast<int>(i);
    throw std::out_of_range("no qubit labelled " + label);
}

int HamiltonianSpec::mode_site(int m) const {
    for (std::size_t i = 0; i < layout.size(); ++i)
        if (layout[i].kind == SubsystemKind::Mode && layout[i].mode_index == m)
            return static_cast<int>(i);
    throw std::out_of_range("no mode " + std::to_string(m) + " in layout");
}

std::size_t HamiltonianSpec::qubit_count() const {
    std::size_t c = 0;
    for (const auto& s : layout) c += s.kind == SubsystemKind::Qubit;
    return c;
}

std::size_t HamiltonianSpec::mode_count() const { return layout.size() - qubit_count(); }

std::vector<Subsystem> make_layout(const std::vector<QubitSpec>& qubits, const ModeSet& modes) {
    std::vector<Subsystem> layout;
    for (const auto& q : qubits) layout.push_back({SubsystemKind::Qubit, q.label, 0});
    for (const auto& m : modes)
        layout.push_back({SubsystemKind::Mode, "m" + std::to_string(m.index), m.index});
    return layout;
}

HamiltonianSpec assemble_full_hamiltonian(const std::vector<QubitSpec>& qubits,
                                          const ModeSet& modes,
                                          const CouplingTable& couplings,
                                          const std::optional<DriveSpec>& drive, Frame frame) {
    HamiltonianSpec spec;
    spec.layout = make_layout(qubits, modes);
    // The centre frequency is recovered from any mode, which also covers
    // subsets that exclude m = 0.
    double f_ref = 0.0;
    if (frame == Frame::RotatingAtF0 && !modes.empty())
        f_ref = modes[0].f - modes[0].index * modes.f_fsr();
    for (std::size_t i = 0; i < qubits.size(); ++i) {
        const int site = static_cast<int>(i);
        spec.terms.push_back({TermKind::Number, site, -1, qubits[i].f_q - f_ref, 0.0, 0.0, "qubit"});
        if (drive && drive->A_z() != 0.0)
            spec.terms.push_back({TermKind::Drive, site, -1, drive->A_z(), drive->f_d(), 0.0, "drive"});
    }
    for (const auto& m : modes) {
        const double f = frame == Frame::RotatingAtF0 ? m.index * modes.f_fsr() : m.f;
        spec.terms.push_back({TermKind::Number, spec.mode_site(m.index), -1, f, 0.0, 0.0, "mode"});
    }
    for (const auto& q : qubits) {
        const int qs = spec.qubit_site(q.label);
        for (const auto& m : modes) {
            const double g = couplings.at(q.label, m.index, 0);
            if (g == 0.0) continue;
            // g (b σ10 + h.c.) = g (σ10 b + h.c.)
            spec.terms.push_back({TermKind::Exchange, qs, spec.mode_site(m.index), g, 0.0, 0.0, "coupling"});
        }
    }
    spec.validate();
    return spec;
}

}  // namespace phonobus
