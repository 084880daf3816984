#include "sdmc/analytic.hpp"

#include <cmath>
#include <string>

namespace sdmc {

namespace {

constexpr double kCommuteTol = 1e-12;

bool is_diagonal(const ComplexMatrix& m) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (r != c && std::abs(m(r, c)) > kCommuteTol) {
                return false;
            }
        }
    }
    return true;
}

std::vector<double> real_diagonal(const ComplexMatrix& m) {
    std::vector<double> d(m.rows());
    for (std::size_t a = 0; a < m.rows(); ++a) {
        d[a] = m(a, a).real();
    }
    return d;
}

void require_qubit(const ComplexMatrix& m, const char* what) {
    if (m.rows() != 2 || m.cols() != 2) {
        throw ShapeError(std::string(what) + ": 2x2 spin-1/2 state required");
    }
}

}  // namespace

TwoSpinSolution two_spin_trajectory(const ComplexMatrix& rho1, const ComplexMatrix& rho2, complex omega12,
                                    complex omega21) {
    require_qubit(rho1, "two_spin_trajectory");
    require_qubit(rho2, "two_spin_trajectory");
    const complex i{0.0, 1.0};
    auto solve = [&](const ComplexMatrix& rho, complex forward, complex backward) {
        ComplexMatrix out(2, 2);
        out(0, 0) = std::exp(-i * std::conj(backward)) * rho(0, 0);
        out(0, 1) = std::exp(forward) * rho(0, 1);
        out(1, 0) = std::exp(-forward) * rho(1, 0);
        out(1, 1) = std::exp(i * std::conj(backward)) * rho(1, 1);
        return out;
    };
    return {solve(rho1, omega12, omega21), solve(rho2, omega21, omega12)};
}

IsingZClosedForm::IsingZClosedForm(const ModelSpec& spec, const InitialState& init)
    : hbar_(spec.hbar), layout_(spec), init_(init) {
    require_valid(spec, init);
    const std::size_t n = spec.site_count();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& h = spec.sites[i].local_hamiltonian;
        for (std::size_t c = 0; c < spec.channels.size(); ++c) {
            const auto& x = spec.channels[c].site_operators[i];
            if (commutator(x, h).max_abs() > kCommuteTol) {
                throw ClosedFormUnavailable("site " + std::to_string(i) + ": coupling operator of channel " +
                                            std::to_string(c) + " does not commute with the local Hamiltonian");
            }
            if (!is_diagonal(x)) {
                throw ClosedFormUnavailable("site " + std::to_string(i) + ": coupling operator of channel " +
                                            std::to_string(c) + " is not diagonal in the site basis");
            }
        }
        if (!is_diagonal(h)) {
            throw ClosedFormUnavailable("site " + std::to_string(i) + ": local Hamiltonian is not diagonal");
        }
        h_diag_.push_back(real_diagonal(h));
    }
    for (const auto& ch : spec.channels) {
        std::vector<std::vector<double>> xs;
        for (std::size_t i = 0; i < n; ++i) {
            xs.push_back(real_diagonal(ch.site_operators[i]));
        }
        x_diag_.push_back(std::move(xs));
        std::vector<std::vector<double>> lam(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j) {
                    lam[i][j] = ch.lambda(i, j);
                }
            }
        }
        lambda_.push_back(std::move(lam));
    }
}

ComplexMatrix IsingZClosedForm::reduced(std::size_t site, double t) const {
    const std::size_t n = site_count();
    if (site >= n) {
        throw std::out_of_range("IsingZClosedForm::reduced: site out of range");
    }
    const std::size_t d = h_diag_[site].size();
    const complex i{0.0, 1.0};
    const double scale = t / hbar_;
    ComplexMatrix out(d, d);
    for (const auto& term : init_.terms) {
        const auto& rho = term.factors[site];
        for (std::size_t a = 0; a < d; ++a) {
            for (std::size_t b = 0; b < d; ++b) {
                if (rho(a, b) == complex{0.0, 0.0}) {
                    continue;
                }
                complex value = rho(a, b) * std::exp(-i * (h_diag_[site][a] - h_diag_[site][b]) * scale);
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == site) {
                        continue;
                    }
                    const auto& rk = term.factors[k];
                    complex factor{0.0, 0.0};
                    for (std::size_t c = 0; c < rk.rows(); ++c) {
                        double phase = 0.0;
                        for (std::size_t ch = 0; ch < x_diag_.size(); ++ch) {
                            phase += lambda_[ch][site][k] * (x_diag_[ch][site][a] - x_diag_[ch][site][b]) *
                                     x_diag_[ch][k][c];
                        }
                        factor += rk(c, c) * std::exp(-i * phase * scale);
                    }
                    value *= factor;
                }
                out(a, b) += term.weight * value;
            }
        }
    }
    return out;
}

ComplexMatrix IsingZClosedForm::trajectory_state(std::size_t site, double t,
                                                 std::span<const complex> integrated_noise) const {
    if (integrated_noise.size() != layout_.size()) {
        throw std::invalid_argument("trajectory_state: one integrated noise value per layout entry required");
    }
    const std::size_t n = site_count();
    const std::size_t d = h_diag_.at(site).size();
    const complex i{0.0, 1.0};
    const auto& rho = init_.terms.front().factors[site];
    ComplexMatrix out(d, d);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < d; ++b) {
            complex exponent = -i * (h_diag_[site][a] - h_diag_[site][b]) * t / hbar_;
            for (std::size_t ch = 0; ch < x_diag_.size(); ++ch) {
                const double xa = x_diag_[ch][site][a];
                const double xb = x_diag_[ch][site][b];
                for (std::size_t j = 0; j < n; ++j) {
                    const double lam = lambda_[ch][site][j];
                    if (j == site || lam == 0.0) {
                        continue;
                    }
                    const complex coef = std::sqrt(complex{hbar_ * lam, 0.0}) / (2.0 * hbar_);
                    const complex w_ij = integrated_noise[*layout_.index_of(ch, site, j)];
                    const complex w_ji = integrated_noise[*layout_.index_of(ch, j, site)];
                    exponent += coef * ((xa - xb) * w_ij - i * (xa + xb) * std::conj(w_ji));
                }
            }
            out(a, b) = rho(a, b) * std::exp(exponent);
        }
    }
    return out;
}

ComplexMatrix ising_z_reduced(const IsingZClosedForm& form, std::size_t site, double t) {
    return form.reduced(site, t);
}

complex gaussian_exponential_average(complex alpha, double t) {
    if (t < 0.0) {
        throw std::invalid_argument("gaussian_exponential_average: t must be nonnegative");
    }
    return std::exp(alpha * alpha * t / 2.0);
}

complex complex_noise_exponential_average(complex alpha, complex beta, double t) {
    if (t < 0.0) {
        throw std::invalid_argument("complex_noise_exponential_average: t must be nonnegative");
    }
    return std::exp(2.0 * alpha * beta * t);
}

}  // namespace sdmc
