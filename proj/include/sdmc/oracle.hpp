#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sdmc/linalg.hpp"
#include "sdmc/model.hpp"

namespace sdmc {

struct FullState {
    double time = 0.0;
    ComplexMatrix rho;
};

// ρ(t) = U ρ(0) U†, U = exp(-i H t / hbar), on the full Hilbert space. `times`
// must be nondecreasing and nonnegative; U is computed once per distinct gap
// between consecutive times and reused.
std::vector<FullState> evolve_exact(const ModelSpec& spec, const InitialState& init, std::span<const double> times,
                                    std::size_t cap = kDefaultDimensionCap);

ComplexMatrix exact_reduced(const FullState& state, std::span<const std::size_t> dims,
                            std::span<const std::size_t> keep);

// tr(O ρ) with O = ⊗ of the placed operators and identity elsewhere.
complex exact_expectation(const FullState& state, std::span<const std::size_t> dims,
                          std::span<const SitePlacement> placements);

}  // namespace sdmc
