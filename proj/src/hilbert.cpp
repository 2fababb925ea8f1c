#include "phonobus/hilbert.hpp"

#include <cmath>
#include <numeric>

#include "phonobus/error.hpp"

namespace phonobus {

HilbertSpace::HilbertSpace(std::vector<Subsystem> layout, int fock_cutoff,
                           std::optional<int> max_excitations, std::size_t max_dimension)
    : layout_(std::move(layout)),
      fock_cutoff_(fock_cutoff),
      max_excitations_(max_excitations),
      max_dimension_(max_dimension) {
    if (fock_cutoff < 1) throw DomainError("fock_cutoff must be at least 1");
    if (max_excitations && *max_excitations < 0)
        throw DomainError("max_excitations must be non-negative");
    std::size_t product = 1;
    for (const auto& s : layout_) {
        const int d = s.kind == SubsystemKind::Qubit ? 2 : fock_cutoff;
        dims_.push_back(d);
        product *= static_cast<std::size_t>(d);
        if (product > (std::size_t{1} << 24))
            throw DomainError("product space too large to enumerate");
    }
    if (!max_excitations && product > max_dimension_)
        throw DomainError("Hilbert space dimension " + std::to_string(product) +
                          " exceeds the limit " + std::to_string(max_dimension_));

    lookup_.assign(product, -1);
    std::vector<int> occ(dims_.size(), 0);
    for (std::size_t flat_index = 0; flat_index < product; ++flat_index) {
        // Decode with the first subsystem most significant.
        std::size_t rest = flat_index;
        for (std::size_t k = dims_.size(); k-- > 0;) {
            occ[k] = static_cast<int>(rest % dims_[k]);
            rest /= dims_[k];
        }
        const int total = std::accumulate(occ.begin(), occ.end(), 0);
        if (max_excitations && total > *max_excitations) continue;
        lookup_[flat_index] = static_cast<std::ptrdiff_t>(states_.size());
        states_.push_back(occ);
        if (states_.size() > max_dimension_)
            throw DomainError("Hilbert space dimension exceeds the limit " +
                              std::to_string(max_dimension_));
    }
}

std::size_t HilbertSpace::flat(const std::vector<int>& occ) const {
    std::size_t f = 0;
    for (std::size_t k = 0; k < dims_.size(); ++k) f = f * dims_[k] + occ[k];
    return f;
}

int HilbertSpace::excitations(std::size_t i) const {
    return std::accumulate(states_[i].begin(), states_[i].end(), 0);
}

std::optional<std::size_t> HilbertSpace::index_of(const std::vector<int>& occ) const {
    if (occ.size() != dims_.size()) return std::nullopt;
    for (std::size_t k = 0; k < occ.size(); ++k)
        if (occ[k] < 0 || occ[k] >= dims_[k]) return std::nullopt;
    const auto j = lookup_[flat(occ)];
    if (j < 0) return std::nullopt;
    return static_cast<std::size_t>(j);
}

SparseOp HilbertSpace::lower(int site) const {
    if (site < 0 || site >= static_cast<int>(dims_.size()))
        throw DomainError("site out of range");
    std::vector<Eigen::Triplet<cplx>> triplets;
    std::vector<int> occ;
    for (std::size_t i = 0; i < states_.size(); ++i) {
        const int n = states_[i][site];
        if (n == 0) continue;
        occ = states_[i];
        --occ[site];
        if (auto j = index_of(occ)) triplets.emplace_back(*j, i, std::sqrt(static_cast<double>(n)));
    }
    SparseOp op(dimension(), dimension());
    op.setFromTriplets(triplets.begin(), triplets.end());
    return op;
}

SparseOp HilbertSpace::raise(int site) const { return SparseOp(lower(site).adjoint()); }

SparseOp HilbertSpace::number(int site) const {
    if (site < 0 || site >= static_cast<int>(dims_.size()))
        throw DomainError("site out of range");
    std::vector<Eigen::Triplet<cplx>> triplets;
    for (std::size_t i = 0; i < states_.size(); ++i)
        if (states_[i][site] != 0) triplets.emplace_back(i, i, states_[i][site]);
    SparseOp op(dimension(), dimension());
    op.setFromTriplets(triplets.begin(), triplets.end());
    return op;
}

SparseOp HilbertSpace::total_excitations() const {
    std::vector<Eigen::Triplet<cplx>> triplets;
    for (std::size_t i = 0; i < states_.size(); ++i)
        if (const int e = excitations(i)) triplets.emplace_back(i, i, e);
    SparseOp op(dimension(), dimension());
    op.setFromTriplets(triplets.begin(), triplets.end());
    return op;
}

SparseOp HilbertSpace::identity() const {
    SparseOp op(dimension(), dimension());
    op.setIdentity();
    return op;
}

Eigen::VectorXcd HilbertSpace::basis_vector(const std::vector<int>& occ) const {
    const auto j = index_of(occ);
    if (!j) throw DomainError("occupation outside the truncated space");
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dimension());
    psi(*j) = 1.0;
    return psi;
}

HilbertSpace HilbertSpace::enlarged(int by) const {
    std::optional<int> cap;
    if (max_excitations_) cap = *max_excitations_ + by;
    return HilbertSpace(layout_, fock_cutoff_ + by, cap, max_dimension_ * 8);
}

SparseOp term_operator(const HilbertSpace& space, const Term& term) {
    switch (term.kind) {
        case TermKind::Number:
        case TermKind::Drive:
            return space.number(term.site);
        case TermKind::Exchange:
            return SparseOp(space.raise(term.site) * space.lower(term.partner));
    }
    return {};
}

SparseOp static_hamiltonian(const HilbertSpace& space, const HamiltonianSpec& spec) {
    spec.validate();
    SparseOp H(space.dimension(), space.dimension());
    for (const auto& t : spec.terms) {
        if (t.frequency != 0.0)
            throw Error("static_hamiltonian: term '" + t.note + "' oscillates in time");
        const SparseOp op = term_operator(space, t);
        switch (t.kind) {
            case TermKind::Number:
                H += t.coefficient * op;
                break;
            case TermKind::Drive:
                H += t.coefficient * std::cos(t.phase) * op;
                break;
            case TermKind::Exchange: {
                const cplx c = t.coefficient * std::polar(1.0, t.phase);
                H += c * op;
                H += std::conj(c) * SparseOp(op.adjoint());
                break;
            }
        }
    }
    return H;
}

}  // namespace phonobus
