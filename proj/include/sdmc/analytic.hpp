#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "sdmc/linalg.hpp"
#include "sdmc/model.hpp"
#include "sdmc/noise.hpp"

namespace sdmc {

class ClosedFormUnavailable : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct TwoSpinSolution {
    ComplexMatrix rho1;
    ComplexMatrix rho2;
};

// Path solution of the two-spin σz⊗σz problem (λ = hbar = 1, no field) given
// the integrated noises ω12(t), ω21(t):
//   ρ1(t) = [[e^{-i ω21*} ρ1¹¹, e^{ω12} ρ1¹²], [e^{-ω12} ρ1²¹, e^{i ω21*} ρ1²²]]
// and ρ2(t) the same with 1 <-> 2 swapped.
TwoSpinSolution two_spin_trajectory(const ComplexMatrix& rho1, const ComplexMatrix& rho2, complex omega12,
                                    complex omega21);

// Closed forms for models whose local Hamiltonians and coupling operators are
// all diagonal in the site basis (the Ising-z family, with longitudinal fields).
class IsingZClosedForm {
public:
    // Throws ClosedFormUnavailable if some x_i does not commute with h_i (to
    // 1e-12) or if the operators are not diagonal in the site basis.
    IsingZClosedForm(const ModelSpec& spec, const InitialState& init);

    std::size_t site_count() const noexcept { return h_diag_.size(); }
    const NoiseLayout& layout() const noexcept { return layout_; }

    // Exact ρ_i^R(t). For spin-1/2 with x = σz this is
    //   [[ρ¹¹, f_i(t)], [f_i(t)*, ρ²²]],
    //   f_i(t) = ρ_i¹² e^{-i(h¹¹-h²²)t} Π_{k≠i} (ρ_k¹¹ e^{-2iλ_ik t} + ρ_k²² e^{2iλ_ik t})   (hbar = 1)
    ComplexMatrix reduced(std::size_t site, double t) const;

    // One stochastic realization of ρ_i(t) for the first initial term, given
    // the integrated noise ω(t) for every entry of layout().
    ComplexMatrix trajectory_state(std::size_t site, double t, std::span<const complex> integrated_noise) const;

private:
    double hbar_;
    NoiseLayout layout_;
    std::vector<std::vector<double>> h_diag_;                // [site][a]
    std::vector<std::vector<std::vector<double>>> x_diag_;  // [channel][site][a]
    std::vector<std::vector<std::vector<double>>> lambda_;  // [channel][i][j]
    InitialState init_;
};

ComplexMatrix ising_z_reduced(const IsingZClosedForm& form, std::size_t site, double t);

// E[exp(alpha W_t)] for a real Wiener process with variance t: exp(alpha² t / 2).
complex gaussian_exponential_average(complex alpha, double t);

// E[exp(alpha ω_t + beta ω_t*)] for one complex Wiener process normalized as
// E[dω* dω] = 2 dt, E[dω dω] = 0. Equals exp(2 alpha beta t); for example
// E[exp(ω12 + ω21)] = 1 and E[exp(ω + i ω*)] = e^{2it}.
complex complex_noise_exponential_average(complex alpha, complex beta, double t);

}  // namespace sdmc
