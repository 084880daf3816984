#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdmc {

using complex = std::complex<double>;

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Dense complex matrix, row-major.
//
// Tensor-product convention used everywhere in this library: in kron(a, b)
// and in every many-site operator or state, site 0 is the leftmost factor and
// its index varies slowest. A basis state |s_0 s_1 ... s_{N-1}> has flat index
// ((s_0 * d_1 + s_1) * d_2 + s_2) ...
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols);
    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<complex> entries);
    ComplexMatrix(std::initializer_list<std::initializer_list<complex>> rows);

    static ComplexMatrix identity(std::size_t n);
    static ComplexMatrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
    static ComplexMatrix diagonal(std::span<const complex> diag);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool is_square() const noexcept { return rows_ == cols_; }
    bool empty() const noexcept { return data_.empty(); }

    complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<complex> entries() noexcept { return data_; }
    std::span<const complex> entries() const noexcept { return data_; }
    complex* data() noexcept { return data_.data(); }
    const complex* data() const noexcept { return data_.data(); }

    ComplexMatrix& operator+=(const ComplexMatrix& other);
    ComplexMatrix& operator-=(const ComplexMatrix& other);
    ComplexMatrix& operator*=(complex s);

    ComplexMatrix adjoint() const;
    ComplexMatrix transpose() const;
    complex trace() const;
    double max_abs() const;
    bool all_finite() const;
    void fill(complex value);

    friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<complex> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(complex s, ComplexMatrix a);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);
// out = a * b without allocating; out must already have the right shape and
// must not alias a or b.
void matmul_into(ComplexMatrix& out, const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix kron_all(std::span<const ComplexMatrix> factors);

// Trace out every site not listed in `keep`. `dims` are the site dimensions in
// kron order; kept sites stay in ascending order regardless of how `keep` is
// listed.
ComplexMatrix partial_trace(const ComplexMatrix& m,
                            std::span<const std::size_t> dims,
                            std::span<const std::size_t> keep);

// I ⊗ ... ⊗ op ⊗ ... ⊗ I with `op` on `site`.
ComplexMatrix embed(std::span<const std::size_t> dims, std::size_t site, const ComplexMatrix& op);

struct SitePlacement {
    std::size_t site;
    ComplexMatrix op;
};
// Product of operators on distinct sites, identity elsewhere.
ComplexMatrix embed_product(std::span<const std::size_t> dims, std::span<const SitePlacement> placements);

// Scaling and squaring with a truncated Taylor series.
ComplexMatrix matrix_exp(const ComplexMatrix& m);

// Eigenvalues of a Hermitian matrix in ascending order (cyclic Jacobi).
std::vector<double> hermitian_eigenvalues(const ComplexMatrix& h);

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);
// max |a_ij - conj(a_ji)|
double hermiticity_defect(const ComplexMatrix& a);
double one_norm(const ComplexMatrix& a);

namespace pauli {
ComplexMatrix identity();
ComplexMatrix sigma_x();
ComplexMatrix sigma_y();
ComplexMatrix sigma_z();
}  // namespace pauli

// Named operator lookup: "identity", "sigma_x", "sigma_y", "sigma_z".
// Throws std::invalid_argument for unknown names.
ComplexMatrix named_operator(const std::string& name);

}  // namespace sdmc
