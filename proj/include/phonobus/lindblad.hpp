#pragma once

#include <string>
#include <vector>

#include "phonobus/hilbert.hpp"

namespace phonobus {

// Jump operator L with rate r (Hz): contributes 2π r (L ρ L† - ½{L†L, ρ}).
struct Dissipator {
    SparseOp L;
    double rate = 0.0;
    std::string label;
};

// Per mode: b at γ_m (n_th + 1) and b† at γ_m n_th. Per qubit: σ01 at
// Γ_sk (n_sk + 1) and σ10 at Γ_sk n_sk, with n_sk evaluated at f_q.
// Zero-rate channels are omitted.
std::vector<Dissipator> thermal_dissipators(const HilbertSpace& space,
                                            const std::vector<QubitSpec>& qubits,
                                            const ModeSet& modes, double T);

struct DensityState {
    Eigen::MatrixXcd rho;
    double t = 0.0;  // s

    static DensityState pure(const Eigen::VectorXcd& psi, double t = 0.0);

    double trace_error() const;        // |tr ρ - 1|
    double hermiticity_error() const;  // max |ρ - ρ†|
    double min_eigenvalue() const;
    double expectation(const SparseOp& op) const;  // Re tr(O ρ)
};

// Hamiltonian and dissipators compiled into matrices on one space. Small
// spaces are additionally compiled into sparse superoperators acting on
// vec(ρ), which is much faster than per-operator products there.
class LindbladGenerator {
public:
    static constexpr std::size_t kSuperoperatorLimit = 128;

    LindbladGenerator(const HilbertSpace& space, const HamiltonianSpec& spec,
                      std::vector<Dissipator> dissipators = {});

    std::size_t dimension() const { return dim_; }
    bool time_dependent() const { return !modulated_.empty(); }

    // H(t) in Hz.
    Eigen::MatrixXcd hamiltonian(double t) const;

    // dρ/dt written into `out` (resized as needed).
    void rhs(double t, const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const;

private:
    struct Modulated {
        SparseOp cos_part;  // multiplies cos(2π f t + φ)
        SparseOp sin_part;  // multiplies sin(2π f t + φ)
        double frequency = 0.0;
        double phase = 0.0;
    };

    std::size_t dim_ = 0;
    SparseOp h_static_eff_;  // H_static - (i/2) Σ r L†L
    std::vector<Modulated> modulated_;
    std::vector<SparseOp> jumps_;      // sqrt(r) L
    std::vector<SparseOp> jumps_adj_;
    bool use_super_ = false;
    SparseOp super_static_;
    std::vector<std::pair<SparseOp, SparseOp>> super_modulated_;  // (cos, sin) parts
    mutable Eigen::MatrixXcd scratch_;
    mutable Eigen::MatrixXcd scratch2_;
};

Eigen::MatrixXcd lindblad_rhs(const LindbladGenerator& generator, const DensityState& state);

}  // namespace phonobus
