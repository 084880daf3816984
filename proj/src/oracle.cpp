#include "sdmc/oracle.hpp"

#include <cmath>
#include <algorithm>
#include <stdexcept>

namespace sdmc {

std::vector<FullState> evolve_exact(const ModelSpec& spec, const InitialState& init, std::span<const double> times,
                                    std::size_t cap) {
    require_valid(spec, init);
    const ComplexMatrix h = assemble_full_hamiltonian(spec, cap);
    const ComplexMatrix rho0 = init.full_matrix(cap);

    struct Cached {
        double gap;
        ComplexMatrix u;
        ComplexMatrix u_adj;
    };
    // Gaps that differ only by rounding (k*dt grids) share one propagator.
    std::vector<Cached> propagators;
    auto propagator_for = [&](double gap) -> const Cached& {
        for (const auto& c : propagators) {
            if (std::abs(c.gap - gap) <= 1e-13 * std::max(1.0, gap)) {
                return c;
            }
        }
        ComplexMatrix generator = h;
        generator *= complex{0.0, -gap / spec.hbar};
        ComplexMatrix u = matrix_exp(generator);
        ComplexMatrix u_adj = u.adjoint();
        propagators.push_back({gap, std::move(u), std::move(u_adj)});
        return propagators.back();
    };

    std::vector<FullState> out;
    out.reserve(times.size());
    ComplexMatrix rho = rho0;
    double current = 0.0;
    for (double t : times) {
        if (!(t >= current) || !std::isfinite(t)) {
            throw std::invalid_argument("evolve_exact: times must be finite, nonnegative and nondecreasing");
        }
        const double gap = t - current;
        if (gap > 0.0) {
            const Cached& c = propagator_for(gap);
            rho = matmul(matmul(c.u, rho), c.u_adj);
        }
        current = t;
        out.push_back({t, rho});
    }
    return out;
}

ComplexMatrix exact_reduced(const FullState& state, std::span<const std::size_t> dims,
                            std::span<const std::size_t> keep) {
    return partial_trace(state.rho, dims, keep);
}

complex exact_expectation(const FullState& state, std::span<const std::size_t> dims,
                          std::span<const SitePlacement> placements) {
    const ComplexMatrix op = embed_product(dims, placements);
    if (op.rows() != state.rho.rows()) {
        throw ShapeError("exact_expectation: operator does not match state dimension");
    }
    // tr(O ρ) without forming the product
    complex total{0.0, 0.0};
    for (std::size_t a = 0; a < op.rows(); ++a) {
        for (std::size_t b = 0; b < op.cols(); ++b) {
            total += op(a, b) * state.rho(b, a);
        }
    }
    return total;
}

}  // namespace sdmc
