#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdmc/linalg.hpp"

namespace sdmc {

// Hilbert-space cap for anything that materializes the full many-body matrix.
inline constexpr std::size_t kDefaultDimensionCap = 4096;

class DimensionCapExceeded : public std::length_error {
public:
    using std::length_error::length_error;
};

class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct SiteSpec {
    std::size_t dimension = 2;
    ComplexMatrix local_hamiltonian;  // energy units
};

// One family of pairwise couplings  sum_{i<j} lambda_ij x_i ⊗ x_j.
//
// `constants` is the full N×N matrix as supplied; validation requires it to be
// exactly symmetric with a zero diagonal, and everything downstream reads only
// the upper triangle (one value per unordered pair).
struct CouplingChannel {
    std::vector<ComplexMatrix> site_operators;
    std::vector<std::vector<double>> constants;

    double lambda(std::size_t i, std::size_t j) const { return i < j ? constants[i][j] : constants[j][i]; }

    // Uniform operator on every site, couplings given as unordered pairs.
    static CouplingChannel uniform(std::size_t n_sites, const ComplexMatrix& op);
    CouplingChannel& set_pair(std::size_t i, std::size_t j, double value);
};

struct ModelSpec {
    std::vector<SiteSpec> sites;
    std::vector<CouplingChannel> channels;
    double hbar = 1.0;

    std::size_t site_count() const { return sites.size(); }
    std::vector<std::size_t> dimensions() const;
    // Product of site dimensions, saturating instead of overflowing.
    std::size_t total_dimension() const;
};

struct InitialTerm {
    double weight = 1.0;
    std::vector<ComplexMatrix> factors;
};

// rho(0) = sum_k weight_k  ⊗_i factors_k[i]
struct InitialState {
    std::vector<InitialTerm> terms;

    static InitialState product(std::vector<ComplexMatrix> factors);
    ComplexMatrix full_matrix(std::size_t cap = kDefaultDimensionCap) const;
};

enum class IssueKind {
    empty_model,
    bad_hbar,
    site_dimension,
    hamiltonian_not_hermitian,
    channel_shape,
    operator_shape,
    operator_not_hermitian,
    coupling_not_symmetric,
    coupling_diagonal,
    coupling_not_finite,
    initial_state_empty,
    initial_weights,
    factor_shape,
    factor_not_hermitian,
    factor_trace,
    factor_not_positive,
};

struct ValidationIssue {
    IssueKind kind;
    std::string message;
    std::optional<std::size_t> channel;
    std::optional<std::size_t> site;
    std::optional<std::size_t> other_site;
    std::optional<std::size_t> term;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool ok() const { return issues.empty(); }
    bool has(IssueKind kind) const;
    std::string summary() const;
};

ValidationReport validate(const ModelSpec& spec);
ValidationReport validate(const ModelSpec& spec, const InitialState& init);
// Throws ValidationError carrying the report summary.
void require_valid(const ModelSpec& spec, const InitialState& init);

ComplexMatrix assemble_full_hamiltonian(const ModelSpec& spec, std::size_t cap = kDefaultDimensionCap);

// Independent complex Wiener processes: one per channel and ordered pair (i, j)
// with lambda_ij != 0.
std::size_t noise_count(const ModelSpec& spec);

namespace states {
ComplexMatrix up();
ComplexMatrix down();
// All four entries 1/2: the |+><+| projector.
ComplexMatrix plus();
ComplexMatrix maximally_mixed(std::size_t dimension = 2);
}  // namespace states

}  // namespace sdmc
