#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "sdmc/engine.hpp"
#include "sdmc/linalg.hpp"
#include "sdmc/model.hpp"

namespace sdmc {

// Streaming mean and per-entry variance of complex matrix samples (Welford),
// with the Chan et al. pairwise merge. Real and imaginary parts are tracked
// separately.
class MomentAccumulator {
public:
    MomentAccumulator() = default;
    MomentAccumulator(std::size_t rows, std::size_t cols);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::uint64_t count() const noexcept { return count_; }

    void add(std::span<const complex> sample);
    void add(const ComplexMatrix& sample);
    void merge(const MomentAccumulator& other);

    ComplexMatrix mean() const;
    // Sample variance (n - 1 denominator) of real and imaginary parts; zero
    // while fewer than two samples have been seen.
    std::vector<double> variance_re() const;
    std::vector<double> variance_im() const;
    std::vector<double> stderr_re() const;
    std::vector<double> stderr_im() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::uint64_t count_ = 0;
    std::vector<complex> mean_;
    std::vector<double> m2_re_;
    std::vector<double> m2_im_;
};

MomentAccumulator merge(const MomentAccumulator& a, const MomentAccumulator& b);

// Per-trajectory samples whose noise average gives the exact quantity.
// ρ_j Π_{i≠j} tr ρ_i
ComplexMatrix reduced_one_body(const Snapshot& snap, std::size_t j);
// (ρ_i ⊗ ρ_j) Π_{k≠i,j} tr ρ_k, in the order given (i first).
ComplexMatrix reduced_two_body(const Snapshot& snap, std::size_t i, std::size_t j);
// ⊗_i ρ_i
ComplexMatrix full_state(const Snapshot& snap, std::size_t cap = kDefaultDimensionCap);

struct EstimateRequests {
    std::vector<std::size_t> sites;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    bool full_state = false;

    bool empty() const { return sites.empty() && pairs.empty() && !full_state; }
};

struct MatrixEstimate {
    ComplexMatrix mean;
    std::vector<double> se_re;  // row-major, same layout as mean
    std::vector<double> se_im;
    std::uint64_t count = 0;

    double max_se() const;
};

struct ReducedSeries {
    std::vector<double> times;
    std::vector<std::size_t> site_dims;
    std::uint64_t trajectories = 0;
    std::map<std::size_t, std::vector<MatrixEstimate>> one_body;
    std::map<std::pair<std::size_t, std::size_t>, std::vector<MatrixEstimate>> two_body;
    std::vector<MatrixEstimate> full;
};

// One MomentAccumulator per requested quantity and recorded time.
class EnsembleAccumulator {
public:
    EnsembleAccumulator() = default;
    EnsembleAccumulator(const EstimateRequests& requests, std::vector<std::size_t> site_dims, std::size_t record_count,
                        std::size_t cap = kDefaultDimensionCap);

    void add(std::size_t record_index, const Snapshot& snap);
    // Mixed initial states: the sample is Σ_k weights[k] * sample(terms[k]),
    // every term integrated along the same noise path.
    void add(std::size_t record_index, std::span<const Snapshot> terms, std::span<const double> weights);
    void merge(const EnsembleAccumulator& other);
    std::uint64_t count(std::size_t record_index) const;

    ReducedSeries finish(std::vector<double> times) const;

private:
    enum class Kind { one_body, two_body, full };
    struct Quantity {
        Kind kind;
        std::size_t i = 0;
        std::size_t j = 0;
        std::size_t dim = 0;
    };

    void compute_sample(const Quantity& q, const Snapshot& snap, ComplexMatrix& out) const;

    std::vector<std::size_t> dims_;
    std::vector<Quantity> quantities_;
    std::size_t records_ = 0;
    std::vector<MomentAccumulator> acc_;  // [record][quantity]
    std::vector<ComplexMatrix> scratch_;
    ComplexMatrix term_scratch_;
};

struct ValueEstimate {
    complex mean;
    double se_re = 0.0;
    double se_im = 0.0;

    // Standard error of the complex value, sqrt(se_re^2 + se_im^2).
    double se() const;
};

// tr(op ρ_j^R(t)) with first-order error propagation, entries treated as
// independent. Uses the one-body series for j, or a partial trace of any
// requested pair containing j.
std::vector<ValueEstimate> observable(const ReducedSeries& series, std::size_t site, const ComplexMatrix& op);

// tr((A ⊗ B) ρ_ij^R) - tr(A ρ_i^R) tr(B ρ_j^R)
std::vector<ValueEstimate> correlation(const ReducedSeries& series, std::size_t i, std::size_t j,
                                       const ComplexMatrix& op_a, const ComplexMatrix& op_b);

// Pair estimate ordered as (i, j), permuting a stored (j, i) estimate if needed.
std::vector<MatrixEstimate> pair_estimates(const ReducedSeries& series, std::size_t i, std::size_t j);
std::vector<MatrixEstimate> site_estimates(const ReducedSeries& series, std::size_t site);

// Smallest eigenvalue of the Hermitian part of each mean matrix.
std::vector<double> min_eigenvalues(const std::vector<MatrixEstimate>& series);

}  // namespace sdmc
