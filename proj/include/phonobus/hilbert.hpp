#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "phonobus/constants.hpp"
#include "phonobus/hamiltonian.hpp"

namespace phonobus {

using SparseOp = Eigen::SparseMatrix<cplx>;

// Truncated product space. Qubits have dimension 2; each mode keeps Fock
// levels 0..fock_cutoff-1. An optional cap on the total excitation number
// keeps only product states with Σ n_i <= max_excitations; the RWA
// Hamiltonian conserves that number, so the cap truncates only thermally
// created excitations.
class HilbertSpace {
public:
    static constexpr std::size_t kDefaultMaxDimension = 4096;

    HilbertSpace(std::vector<Subsystem> layout, int fock_cutoff,
                 std::optional<int> max_excitations = std::nullopt,
                 std::size_t max_dimension = kDefaultMaxDimension);

    const std::vector<Subsystem>& layout() const { return layout_; }
    const std::vector<int>& dims() const { return dims_; }
    std::size_t dimension() const { return states_.size(); }
    std::optional<int> max_excitations() const { return max_excitations_; }
    int fock_cutoff() const { return fock_cutoff_; }

    // Occupation vector of basis state i (one entry per subsystem).
    const std::vector<int>& occupations(std::size_t i) const { return states_[i]; }
    int excitations(std::size_t i) const;
    // Index of the basis state with the given occupations; nullopt if it is
    // outside the truncated space.
    std::optional<std::size_t> index_of(const std::vector<int>& occ) const;

    SparseOp lower(int site) const;
    SparseOp raise(int site) const;
    SparseOp number(int site) const;
    SparseOp total_excitations() const;
    SparseOp identity() const;

    Eigen::VectorXcd basis_vector(const std::vector<int>& occ) const;

    // Same layout, every mode cutoff and the excitation cap raised by `by`.
    HilbertSpace enlarged(int by = 1) const;

private:
    std::size_t flat(const std::vector<int>& occ) const;

    std::vector<Subsystem> layout_;
    std::vector<int> dims_;
    int fock_cutoff_;
    std::optional<int> max_excitations_;
    std::size_t max_dimension_;
    std::vector<std::vector<int>> states_;
    std::vector<std::ptrdiff_t> lookup_;  // flat product index -> basis index or -1
};

// Sparse matrix of a single term's operator part (coefficient and time factor
// excluded). For Exchange terms this is R_site L_partner, without the h.c.
SparseOp term_operator(const HilbertSpace& space, const Term& term);

// Static Hermitian matrix of all time-independent terms; throws Error if an
// oscillating term is present.
SparseOp static_hamiltonian(const HilbertSpace& space, const HamiltonianSpec& spec);

}  // namespace phonobus
