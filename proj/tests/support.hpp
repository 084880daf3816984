#pragma once

#include <cmath>
#include <random>

#include "sdmc/linalg.hpp"
#include "sdmc/model.hpp"

namespace sdmc::test {

inline ComplexMatrix random_matrix(std::mt19937_64& gen, std::size_t rows, std::size_t cols, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    ComplexMatrix m(rows, cols);
    for (auto& v : m.entries()) {
        v = complex(u(gen), u(gen));
    }
    return m;
}

inline ComplexMatrix random_hermitian(std::mt19937_64& gen, std::size_t n, double scale = 1.0) {
    const ComplexMatrix a = random_matrix(gen, n, n, scale);
    ComplexMatrix h = a + a.adjoint();
    h *= complex(0.5, 0.0);
    return h;
}

// A A† / tr(A A†): Hermitian, positive semidefinite, unit trace.
inline ComplexMatrix random_density(std::mt19937_64& gen, std::size_t n) {
    const ComplexMatrix a = random_matrix(gen, n, n);
    ComplexMatrix rho = matmul(a, a.adjoint());
    rho *= complex(1.0 / rho.trace().real(), 0.0);
    return rho;
}

inline ComplexMatrix diag2(double a, double b) { return ComplexMatrix{{a, 0.0}, {0.0, b}}; }

inline ComplexMatrix qubit_state(double p_up, complex coherence) {
    return ComplexMatrix{{p_up, coherence}, {std::conj(coherence), 1.0 - p_up}};
}

}  // namespace sdmc::test
