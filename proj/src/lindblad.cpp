#include "phonobus/lindblad.hpp"

#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>

#include "phonobus/error.hpp"

namespace phonobus {

namespace {

// a ⊗ b with a's index as the slow one, so vec(B X A^T) = (A ⊗ B) vec(X).
SparseOp kron(const SparseOp& a, const SparseOp& b) {
    std::vector<Eigen::Triplet<cplx>> t;
    t.reserve(static_cast<std::size_t>(a.nonZeros()) * static_cast<std::size_t>(b.nonZeros()));
    for (int ka = 0; ka < a.outerSize(); ++ka)
        for (SparseOp::InnerIterator ia(a, ka); ia; ++ia)
            for (int kb = 0; kb < b.outerSize(); ++kb)
                for (SparseOp::InnerIterator ib(b, kb); ib; ++ib)
                    t.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                                   ia.value() * ib.value());
    SparseOp out(a.rows() * b.rows(), a.cols() * b.cols());
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

// Superoperator of ρ -> -2πi (M ρ - ρ M†).
SparseOp commutator_super(const SparseOp& M, const SparseOp& I) {
    const SparseOp conjM = M.conjugate();
    return cplx(0.0, -kTwoPi) * (kron(I, M) - kron(conjM, I));
}

}  // namespace

std::vector<Dissipator> thermal_dissipators(const HilbertSpace& space,
                                            const std::vector<QubitSpec>& qubits,
                                            const ModeSet& modes, double T) {
    std::vector<Dissipator> out;
    auto push = [&](SparseOp L, double rate, std::string label) {
        if (rate > 0.0) out.push_back({std::move(L), rate, std::move(label)});
    };
    const auto& layout = space.layout();
    for (std::size_t i = 0; i < layout.size(); ++i) {
        const int site = static_cast<int>(i);
        const Subsystem& s = layout[i];
        if (s.kind == SubsystemKind::Qubit) {
            const QubitSpec* q = nullptr;
            for (const auto& cand : qubits)
                if (cand.label == s.label) q = &cand;
            if (!q) throw DomainError("no qubit parameters for " + s.label);
            const double n = thermal_occupation(q->f_q, T);
            push(space.lower(site), q->Gamma_sk * (n + 1.0), "relax:" + s.label);
            push(space.raise(site), q->Gamma_sk * n, "excite:" + s.label);
        } else {
            const Mode& mode = modes.by_index(s.mode_index);
            const double n = thermal_occupation(mode.f, T);
            const std::string m = std::to_string(mode.index);
            push(space.lower(site), mode.gamma * (n + 1.0), "decay:" + m);
            push(space.raise(site), mode.gamma * n, "heat:" + m);
        }
    }
    return out;
}

DensityState DensityState::pure(const Eigen::VectorXcd& psi, double t) {
    DensityState s;
    s.rho = psi * psi.adjoint();
    s.t = t;
    return s;
}

double DensityState::trace_error() const { return std::abs(rho.trace() - cplx(1.0, 0.0)); }

double DensityState::hermiticity_error() const {
    return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

double DensityState::min_eigenvalue() const {
    const Eigen::MatrixXcd h = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

double DensityState::expectation(const SparseOp& op) const {
    cplx acc = 0.0;
    for (int k = 0; k < op.outerSize(); ++k)
        for (SparseOp::InnerIterator it(op, k); it; ++it) acc += it.value() * rho(it.col(), it.row());
    return acc.real();
}

LindbladGenerator::LindbladGenerator(const HilbertSpace& space, const HamiltonianSpec& spec,
                                     std::vector<Dissipator> dissipators)
    : dim_(space.dimension()) {
    spec.validate();
    if (spec.layout != space.layout())
        throw Error("Hamiltonian layout does not match the Hilbert space");
    const auto D = static_cast<Eigen::Index>(dim_);
    SparseOp h_static(D, D);
    // Oscillating terms sharing (frequency, phase) are merged into one pair.
    std::map<std::pair<double, double>, Modulated> grouped;
    const cplx I(0.0, 1.0);
    for (const auto& t : spec.terms) {
        const SparseOp op = term_operator(space, t);
        if (t.kind == TermKind::Number) {
            h_static += t.coefficient * op;
            continue;
        }
        if (t.frequency == 0.0) {
            if (t.kind == TermKind::Drive) {
                h_static += t.coefficient * std::cos(t.phase) * op;
            } else {
                const cplx c = t.coefficient * std::polar(1.0, t.phase);
                h_static += c * op + std::conj(c) * SparseOp(op.adjoint());
            }
            continue;
        }
        auto& slot = grouped[{t.frequency, t.phase}];
        if (slot.cos_part.rows() == 0) {
            slot.cos_part = SparseOp(D, D);
            slot.sin_part = SparseOp(D, D);
            slot.frequency = t.frequency;
            slot.phase = t.phase;
        }
        if (t.kind == TermKind::Drive) {
            slot.cos_part += t.coefficient * op;
        } else {
            // c (e^{iθ} X + e^{-iθ} X†) = c cosθ (X + X†) + c sinθ i (X - X†)
            const SparseOp adj(op.adjoint());
            slot.cos_part += t.coefficient * (op + adj);
            slot.sin_part += (I * t.coefficient) * (op - adj);
        }
    }
    for (auto& [key, m] : grouped) {
        m.cos_part.prune(cplx(0.0));
        m.sin_part.prune(cplx(0.0));
        modulated_.push_back(std::move(m));
    }
    SparseOp loss(D, D);
    for (const auto& d : dissipators) {
        if (d.L.rows() != D || d.L.cols() != D)
            throw Error("dissipator '" + d.label + "' has the wrong dimension");
        const SparseOp J = std::sqrt(d.rate) * d.L;
        const SparseOp Jadj(J.adjoint());
        loss += SparseOp(Jadj * J);
        jumps_.push_back(J);
        jumps_adj_.push_back(Jadj);
    }
    h_static_eff_ = h_static - (0.5 * I) * loss;
    h_static_eff_.makeCompressed();

    use_super_ = dim_ <= kSuperoperatorLimit;
    if (use_super_) {
        SparseOp id(D, D);
        id.setIdentity();
        super_static_ = commutator_super(h_static_eff_, id);
        for (const auto& J : jumps_) super_static_ += kTwoPi * kron(SparseOp(J.conjugate()), J);
        super_static_.makeCompressed();
        for (const auto& m : modulated_)
            super_modulated_.emplace_back(commutator_super(m.cos_part, id),
                                          commutator_super(m.sin_part, id));
    }
}

Eigen::MatrixXcd LindbladGenerator::hamiltonian(double t) const {
    // Hermitian part of the compiled operator plus the modulated terms.
    const SparseOp adj(h_static_eff_.adjoint());
    Eigen::MatrixXcd H = Eigen::MatrixXcd(0.5 * (h_static_eff_ + adj));
    for (const auto& m : modulated_) {
        const double theta = kTwoPi * m.frequency * t + m.phase;
        H += std::cos(theta) * Eigen::MatrixXcd(m.cos_part) +
             std::sin(theta) * Eigen::MatrixXcd(m.sin_part);
    }
    return H;
}

void LindbladGenerator::rhs(double t, const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const {
    const auto D = static_cast<Eigen::Index>(dim_);
    out.resize(D, D);
    if (use_super_) {
        Eigen::Map<const Eigen::VectorXcd> v(rho.data(), D * D);
        Eigen::Map<Eigen::VectorXcd> o(out.data(), D * D);
        o.noalias() = super_static_ * v;
        for (std::size_t k = 0; k < modulated_.size(); ++k) {
            const double theta = kTwoPi * modulated_[k].frequency * t + modulated_[k].phase;
            const auto& [sc, ss] = super_modulated_[k];
            if (sc.nonZeros() != 0) o.noalias() += std::cos(theta) * (sc * v);
            if (ss.nonZeros() != 0) o.noalias() += std::sin(theta) * (ss * v);
        }
        return;
    }
    // A = H_eff ρ; dρ/dt = -2πi (A - A†) + 2π Σ J ρ J†.
    scratch_.noalias() = h_static_eff_ * rho;
    for (const auto& m : modulated_) {
        const double theta = kTwoPi * m.frequency * t + m.phase;
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        if (m.cos_part.nonZeros() != 0) scratch_.noalias() += c * (m.cos_part * rho);
        if (m.sin_part.nonZeros() != 0) scratch_.noalias() += s * (m.sin_part * rho);
    }
    out.noalias() = cplx(0.0, -kTwoPi) * (scratch_ - scratch_.adjoint());
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
        scratch2_.noalias() = jumps_[k] * rho;
        out.noalias() += kTwoPi * (scratch2_ * jumps_adj_[k]);
    }
}

Eigen::MatrixXcd lindblad_rhs(const LindbladGenerator& generator, const DensityState& state) {
    Eigen::MatrixXcd out;
    generator.rhs(state.t, state.rho, out);
    return out;
}

}  // namespace phonobus
