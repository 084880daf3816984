#include "sdmc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sdmc {

namespace {

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError(std::string(what) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + ")");
    }
}

void require_square(const ComplexMatrix& a, const char* what) {
    if (!a.is_square()) {
        throw ShapeError(std::string(what) + ": square matrix required");
    }
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, complex{0.0, 0.0}) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<complex> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
        throw ShapeError("ComplexMatrix: entry count does not match rows*cols");
    }
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<complex>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
        if (row.size() != cols_) {
            throw ShapeError("ComplexMatrix: ragged initializer");
        }
        data_.insert(data_.end(), row.begin(), row.end());
    }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const complex> diag) {
    ComplexMatrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) {
        m(i, i) = diag[i];
    }
    return m;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
    require_same_shape(*this, other, "operator+=");
    for (std::size_t k = 0; k < data_.size(); ++k) {
        data_[k] += other.data_[k];
    }
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
    require_same_shape(*this, other, "operator-=");
    for (std::size_t k = 0; k < data_.size(); ++k) {
        data_[k] -= other.data_[k];
    }
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(complex s) {
    for (auto& x : data_) {
        x *= s;
    }
    return *this;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            out(c, r) = std::conj((*this)(r, c));
        }
    }
    return out;
}

ComplexMatrix ComplexMatrix::transpose() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            out(c, r) = (*this)(r, c);
        }
    }
    return out;
}

complex ComplexMatrix::trace() const {
    require_square(*this, "trace");
    complex t{0.0, 0.0};
    for (std::size_t i = 0; i < rows_; ++i) {
        t += (*this)(i, i);
    }
    return t;
}

double ComplexMatrix::max_abs() const {
    double m = 0.0;
    for (const auto& x : data_) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

bool ComplexMatrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](const complex& x) { return std::isfinite(x.real()) && std::isfinite(x.imag()); });
}

void ComplexMatrix::fill(complex value) { std::fill(data_.begin(), data_.end(), value); }

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(complex s, ComplexMatrix a) { return a *= s; }
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) { return matmul(a, b); }

void matmul_into(ComplexMatrix& out, const ComplexMatrix& a, const ComplexMatrix& b) {
    const std::size_t n = a.rows();
    const std::size_t inner = a.cols();
    const std::size_t m = b.cols();
    complex* o = out.data();
    const complex* pa = a.data();
    const complex* pb = b.data();
    if (n == 2 && inner == 2 && m == 2) {
        o[0] = pa[0] * pb[0] + pa[1] * pb[2];
        o[1] = pa[0] * pb[1] + pa[1] * pb[3];
        o[2] = pa[2] * pb[0] + pa[3] * pb[2];
        o[3] = pa[2] * pb[1] + pa[3] * pb[3];
        return;
    }
    for (std::size_t r = 0; r < n; ++r) {
        complex* orow = o + r * m;
        for (std::size_t c = 0; c < m; ++c) {
            orow[c] = 0.0;
        }
        for (std::size_t k = 0; k < inner; ++k) {
            const complex av = pa[r * inner + k];
            if (av == complex{0.0, 0.0}) {
                continue;
            }
            const complex* brow = pb + k * m;
            for (std::size_t c = 0; c < m; ++c) {
                orow[c] += av * brow[c];
            }
        }
    }
}

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()) + ")");
    }
    ComplexMatrix out(a.rows(), b.cols());
    matmul_into(out, a, b);
    return out;
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_square(a, "commutator");
    require_same_shape(a, b, "commutator");
    return matmul(a, b) - matmul(b, a);
}

ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_square(a, "anticommutator");
    require_same_shape(a, b, "anticommutator");
    return matmul(a, b) + matmul(b, a);
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t ar = 0; ar < a.rows(); ++ar) {
        for (std::size_t ac = 0; ac < a.cols(); ++ac) {
            const complex av = a(ar, ac);
            for (std::size_t br = 0; br < b.rows(); ++br) {
                for (std::size_t bc = 0; bc < b.cols(); ++bc) {
                    out(ar * b.rows() + br, ac * b.cols() + bc) = av * b(br, bc);
                }
            }
        }
    }
    return out;
}

ComplexMatrix kron_all(std::span<const ComplexMatrix> factors) {
    if (factors.empty()) {
        return ComplexMatrix::identity(1);
    }
    ComplexMatrix out = factors.front();
    for (std::size_t k = 1; k < factors.size(); ++k) {
        out = kron(out, factors[k]);
    }
    return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& m,
                            std::span<const std::size_t> dims,
                            std::span<const std::size_t> keep) {
    require_square(m, "partial_trace");
    const std::size_t n_sites = dims.size();
    const std::size_t total =
        std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>{});
    if (total != m.rows()) {
        throw ShapeError("partial_trace: product of site dimensions (" + std::to_string(total) +
                         ") does not match matrix dimension " + std::to_string(m.rows()));
    }
    if (keep.empty()) {
        throw ShapeError("partial_trace: at least one site must be kept");
    }
    std::vector<bool> kept(n_sites, false);
    for (std::size_t s : keep) {
        if (s >= n_sites) {
            throw ShapeError("partial_trace: site index " + std::to_string(s) + " out of range");
        }
        if (kept[s]) {
            throw ShapeError("partial_trace: site " + std::to_string(s) + " listed twice");
        }
        kept[s] = true;
    }

    std::size_t kept_dim = 1;
    std::size_t traced_dim = 1;
    for (std::size_t s = 0; s < n_sites; ++s) {
        (kept[s] ? kept_dim : traced_dim) *= dims[s];
    }

    // Split every full index into (kept index, traced index), both in kron order.
    std::vector<std::size_t> kept_index(total);
    std::vector<std::size_t> traced_index(total);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        std::size_t k_idx = 0, k_stride = 1, t_idx = 0, t_stride = 1;
        for (std::size_t s = n_sites; s-- > 0;) {
            const std::size_t digit = rem % dims[s];
            rem /= dims[s];
            if (kept[s]) {
                k_idx += digit * k_stride;
                k_stride *= dims[s];
            } else {
                t_idx += digit * t_stride;
                t_stride *= dims[s];
            }
        }
        kept_index[flat] = k_idx;
        traced_index[flat] = t_idx;
    }

    // by_traced[t][k] = full index with traced part t and kept part k
    std::vector<std::size_t> by_traced(total);
    for (std::size_t flat = 0; flat < total; ++flat) {
        by_traced[traced_index[flat] * kept_dim + kept_index[flat]] = flat;
    }

    ComplexMatrix out(kept_dim, kept_dim);
    for (std::size_t t = 0; t < traced_dim; ++t) {
        const std::size_t* rows = &by_traced[t * kept_dim];
        for (std::size_t a = 0; a < kept_dim; ++a) {
            for (std::size_t b = 0; b < kept_dim; ++b) {
                out(a, b) += m(rows[a], rows[b]);
            }
        }
    }
    return out;
}

ComplexMatrix embed(std::span<const std::size_t> dims, std::size_t site, const ComplexMatrix& op) {
    const SitePlacement placement{site, op};
    return embed_product(dims, std::span<const SitePlacement>(&placement, 1));
}

ComplexMatrix embed_product(std::span<const std::size_t> dims, std::span<const SitePlacement> placements) {
    std::vector<ComplexMatrix> factors;
    factors.reserve(dims.size());
    for (std::size_t d : dims) {
        factors.push_back(ComplexMatrix::identity(d));
    }
    std::vector<bool> used(dims.size(), false);
    for (const auto& p : placements) {
        if (p.site >= dims.size()) {
            throw ShapeError("embed: site index " + std::to_string(p.site) + " out of range");
        }
        if (p.op.rows() != dims[p.site] || p.op.cols() != dims[p.site]) {
            throw ShapeError("embed: operator does not match dimension of site " + std::to_string(p.site));
        }
        if (used[p.site]) {
            throw ShapeError("embed: site " + std::to_string(p.site) + " placed twice");
        }
        used[p.site] = true;
        factors[p.site] = p.op;
    }
    return kron_all(factors);
}

double one_norm(const ComplexMatrix& a) {
    double best = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) {
        double col = 0.0;
        for (std::size_t r = 0; r < a.rows(); ++r) {
            col += std::abs(a(r, c));
        }
        best = std::max(best, col);
    }
    return best;
}

ComplexMatrix matrix_exp(const ComplexMatrix& m) {
    require_square(m, "matrix_exp");
    if (!m.all_finite()) {
        throw std::domain_error("matrix_exp: non-finite entries");
    }
    const std::size_t n = m.rows();
    const double norm = one_norm(m);
    int squarings = 0;
    if (norm > 0.5) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    }
    ComplexMatrix a = m;
    a *= std::ldexp(1.0, -squarings);

    // Taylor series; ||a|| <= 1/2 so 30 terms is far past double precision.
    ComplexMatrix result = ComplexMatrix::identity(n);
    ComplexMatrix term = ComplexMatrix::identity(n);
    ComplexMatrix scratch(n, n);
    for (int k = 1; k <= 30; ++k) {
        matmul_into(scratch, term, a);
        term = scratch;
        term *= 1.0 / k;
        result += term;
        if (one_norm(term) <= std::numeric_limits<double>::epsilon() * 1e-2 * one_norm(result)) {
            break;
        }
    }
    for (int s = 0; s < squarings; ++s) {
        matmul_into(scratch, result, result);
        std::swap(scratch, result);
    }
    return result;
}

std::vector<double> hermitian_eigenvalues(const ComplexMatrix& h) {
    require_square(h, "hermitian_eigenvalues");
    const std::size_t n = h.rows();
    const std::size_t m = 2 * n;
    // Real symmetric embedding [[Re, -Im], [Im, Re]]; every eigenvalue of h
    // appears twice in its spectrum.
    std::vector<double> a(m * m);
    auto at = [&](std::size_t r, std::size_t c) -> double& { return a[r * m + c]; };
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            // symmetrize so slightly non-Hermitian input still gives a symmetric problem
            const complex v = 0.5 * (h(r, c) + std::conj(h(c, r)));
            at(r, c) = v.real();
            at(r + n, c + n) = v.real();
            at(r, c + n) = -v.imag();
            at(r + n, c) = v.imag();
        }
    }

    double frob = 0.0;
    for (double v : a) {
        frob += v * v;
    }
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < m; ++p) {
            for (std::size_t q = p + 1; q < m; ++q) {
                off += at(p, q) * at(p, q);
            }
        }
        if (off <= 1e-32 * frob) {
            break;
        }
        for (std::size_t p = 0; p < m; ++p) {
            for (std::size_t q = p + 1; q < m; ++q) {
                const double apq = at(p, q);
                if (std::abs(apq) < 1e-300) {
                    continue;
                }
                const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < m; ++k) {
                    const double akp = at(k, p);
                    const double akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < m; ++k) {
                    const double apk = at(p, k);
                    const double aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }

    std::vector<double> doubled(m);
    for (std::size_t i = 0; i < m; ++i) {
        doubled[i] = at(i, i);
    }
    std::sort(doubled.begin(), doubled.end());
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) {
        eig[i] = 0.5 * (doubled[2 * i] + doubled[2 * i + 1]);
    }
    return eig;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
    }
    return m;
}

double hermiticity_defect(const ComplexMatrix& a) {
    require_square(a, "hermiticity_defect");
    double m = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = r; c < a.cols(); ++c) {
            m = std::max(m, std::abs(a(r, c) - std::conj(a(c, r))));
        }
    }
    return m;
}

namespace pauli {
ComplexMatrix identity() { return ComplexMatrix::identity(2); }
ComplexMatrix sigma_x() { return {{0.0, 1.0}, {1.0, 0.0}}; }
ComplexMatrix sigma_y() { return {{0.0, complex{0.0, -1.0}}, {complex{0.0, 1.0}, 0.0}}; }
ComplexMatrix sigma_z() { return {{1.0, 0.0}, {0.0, -1.0}}; }
}  // namespace pauli

ComplexMatrix named_operator(const std::string& name) {
    if (name == "identity") return pauli::identity();
    if (name == "sigma_x") return pauli::sigma_x();
    if (name == "sigma_y") return pauli::sigma_y();
    if (name == "sigma_z") return pauli::sigma_z();
    throw std::invalid_argument("unknown operator name '" + name + "'");
}

}  // namespace sdmc
