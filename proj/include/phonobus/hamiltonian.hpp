#pragma once

#include <optional>
#include <string>
#include <vector>

#include "phonobus/coupling.hpp"
#include "phonobus/params.hpp"

namespace phonobus {

enum class SubsystemKind { Qubit, Mode };

struct Subsystem {
    SubsystemKind kind = SubsystemKind::Qubit;
    std::string label;
    int mode_index = 0;  // cavity mode index m, modes only

    bool operator==(const Subsystem&) const = default;
};

// Term semantics (coefficients in Hz, scaled by 2π only inside the
// integrator):
//   Number:   c N_site                            (σ11 or b†b)
//   Drive:    c cos(2π f t + φ) N_site
//   Exchange: c [e^{i(2π f t + φ)} R_site L_partner + h.c.]
// where R is the raising operator (σ10 or b†) and L the lowering operator
// (σ01 or b). Exchange is Hermitian by construction.
enum class TermKind { Number, Drive, Exchange };

struct Term {
    TermKind kind = TermKind::Number;
    int site = 0;
    int partner = -1;
    double coefficient = 0.0;
    double frequency = 0.0;
    double phase = 0.0;
    std::string note;  // free-form tag ("resonant", "off-resonant", ...)
};

// Abstract operator expression over an ordered subsystem layout
// (qubits first, then modes in ascending m).
struct HamiltonianSpec {
    std::vector<Subsystem> layout;
    std::vector<Term> terms;

    // Throws Error on out-of-range sites, non-finite coefficients or an
    // exchange term whose two sites coincide.
    void validate() const;

    int qubit_site(const std::string& label) const;
    int mode_site(int m) const;
    std::size_t qubit_count() const;
    std::size_t mode_count() const;
};

std::vector<Subsystem> make_layout(const std::vector<QubitSpec>& qubits, const ModeSet& modes);

enum class Frame { Lab, RotatingAtF0 };

// H = Σ f_q σ11 + Σ f_m b†b + Σ g_m (b σ10 + h.c.) + Σ_q A_z cos(2π f_d t) σ11.
// In the rotating frame f_q -> f_q - f_0 and f_m -> m f_fsr. Couplings are
// looked up in `couplings` (entries with n = 0) for every (qubit, mode) pair.
HamiltonianSpec assemble_full_hamiltonian(const std::vector<QubitSpec>& qubits,
                                          const ModeSet& modes,
                                          const CouplingTable& couplings,
                                          const std::optional<DriveSpec>& drive,
                                          Frame frame = Frame::RotatingAtF0);

}  // namespace phonobus
