#include "sdmc/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sdmc {

MomentAccumulator::MomentAccumulator(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), mean_(rows * cols), m2_re_(rows * cols, 0.0), m2_im_(rows * cols, 0.0) {}

void MomentAccumulator::add(std::span<const complex> sample) {
    if (sample.size() != mean_.size()) {
        throw ShapeError("MomentAccumulator::add: sample shape mismatch");
    }
    ++count_;
    const double inv_n = 1.0 / static_cast<double>(count_);
    for (std::size_t k = 0; k < sample.size(); ++k) {
        const complex delta = sample[k] - mean_[k];
        mean_[k] += delta * inv_n;
        const complex delta2 = sample[k] - mean_[k];
        m2_re_[k] += delta.real() * delta2.real();
        m2_im_[k] += delta.imag() * delta2.imag();
    }
}

void MomentAccumulator::add(const ComplexMatrix& sample) {
    if (sample.rows() != rows_ || sample.cols() != cols_) {
        throw ShapeError("MomentAccumulator::add: sample shape mismatch");
    }
    add(sample.entries());
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
    if (other.rows_ != rows_ || other.cols_ != cols_) {
        throw ShapeError("MomentAccumulator::merge: shape mismatch");
    }
    if (other.count_ == 0) {
        return;
    }
    if (count_ == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(count_);
    const double nb = static_cast<double>(other.count_);
    const double n = na + nb;
    for (std::size_t k = 0; k < mean_.size(); ++k) {
        const complex delta = other.mean_[k] - mean_[k];
        mean_[k] += delta * (nb / n);
        m2_re_[k] += other.m2_re_[k] + delta.real() * delta.real() * (na * nb / n);
        m2_im_[k] += other.m2_im_[k] + delta.imag() * delta.imag() * (na * nb / n);
    }
    count_ += other.count_;
}

ComplexMatrix MomentAccumulator::mean() const { return ComplexMatrix(rows_, cols_, mean_); }

namespace {

std::vector<double> scaled(const std::vector<double>& m2, std::uint64_t count, bool standard_error) {
    std::vector<double> out(m2.size(), 0.0);
    if (count < 2) {
        return out;
    }
    const double n = static_cast<double>(count);
    for (std::size_t k = 0; k < m2.size(); ++k) {
        const double var = std::max(m2[k], 0.0) / (n - 1.0);
        out[k] = standard_error ? std::sqrt(var / n) : var;
    }
    return out;
}

}  // namespace

std::vector<double> MomentAccumulator::variance_re() const { return scaled(m2_re_, count_, false); }
std::vector<double> MomentAccumulator::variance_im() const { return scaled(m2_im_, count_, false); }
std::vector<double> MomentAccumulator::stderr_re() const { return scaled(m2_re_, count_, true); }
std::vector<double> MomentAccumulator::stderr_im() const { return scaled(m2_im_, count_, true); }

MomentAccumulator merge(const MomentAccumulator& a, const MomentAccumulator& b) {
    MomentAccumulator out = a;
    out.merge(b);
    return out;
}

ComplexMatrix reduced_one_body(const Snapshot& snap, std::size_t j) {
    const std::size_t n = snap.site_states.size();
    if (j >= n) {
        throw std::out_of_range("reduced_one_body: site " + std::to_string(j) + " out of range");
    }
    complex weight{1.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) {
        if (k != j) {
            weight *= snap.traces[k];
        }
    }
    ComplexMatrix out = snap.site_states[j];
    out *= weight;
    return out;
}

ComplexMatrix reduced_two_body(const Snapshot& snap, std::size_t i, std::size_t j) {
    const std::size_t n = snap.site_states.size();
    if (i == j) {
        throw std::out_of_range("reduced_two_body: sites must differ");
    }
    if (i >= n || j >= n) {
        throw std::out_of_range("reduced_two_body: site index out of range");
    }
    complex weight{1.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) {
        if (k != i && k != j) {
            weight *= snap.traces[k];
        }
    }
    ComplexMatrix out = kron(snap.site_states[i], snap.site_states[j]);
    out *= weight;
    return out;
}

ComplexMatrix full_state(const Snapshot& snap, std::size_t cap) {
    std::size_t total = 1;
    for (const auto& m : snap.site_states) {
        total *= m.rows();
        if (total > cap) {
            throw DimensionCapExceeded("full_state: dimension exceeds cap " + std::to_string(cap));
        }
    }
    return kron_all(snap.site_states);
}

double MatrixEstimate::max_se() const {
    double m = 0.0;
    for (std::size_t k = 0; k < se_re.size(); ++k) {
        m = std::max({m, se_re[k], se_im[k]});
    }
    return m;
}

EnsembleAccumulator::EnsembleAccumulator(const EstimateRequests& requests, std::vector<std::size_t> site_dims,
                                         std::size_t record_count, std::size_t cap)
    : dims_(std::move(site_dims)), records_(record_count) {
    const std::size_t n = dims_.size();
    for (std::size_t s : requests.sites) {
        if (s >= n) {
            throw std::out_of_range("requested site " + std::to_string(s) + " out of range");
        }
        quantities_.push_back({Kind::one_body, s, s, dims_[s]});
    }
    for (const auto& [i, j] : requests.pairs) {
        if (i >= n || j >= n || i == j) {
            throw std::out_of_range("requested pair (" + std::to_string(i) + "," + std::to_string(j) + ") is invalid");
        }
        quantities_.push_back({Kind::two_body, i, j, dims_[i] * dims_[j]});
    }
    if (requests.full_state) {
        std::size_t total = 1;
        for (std::size_t d : dims_) {
            total *= d;
            if (total > cap) {
                throw DimensionCapExceeded("full-state request exceeds dimension cap " + std::to_string(cap));
            }
        }
        quantities_.push_back({Kind::full, 0, 0, total});
    }
    acc_.reserve(records_ * quantities_.size());
    for (std::size_t r = 0; r < records_; ++r) {
        for (const auto& q : quantities_) {
            acc_.emplace_back(q.dim, q.dim);
        }
    }
    for (const auto& q : quantities_) {
        scratch_.emplace_back(q.dim, q.dim);
    }
}

void EnsembleAccumulator::compute_sample(const Quantity& q, const Snapshot& snap, ComplexMatrix& out) const {
    switch (q.kind) {
        case Kind::one_body:
            out = reduced_one_body(snap, q.i);
            break;
        case Kind::two_body:
            out = reduced_two_body(snap, q.i, q.j);
            break;
        case Kind::full:
            out = kron_all(snap.site_states);
            break;
    }
}

void EnsembleAccumulator::add(std::size_t record_index, const Snapshot& snap) {
    if (record_index >= records_) {
        throw std::out_of_range("EnsembleAccumulator::add: record index out of range");
    }
    const std::size_t nq = quantities_.size();
    for (std::size_t q = 0; q < nq; ++q) {
        compute_sample(quantities_[q], snap, scratch_[q]);
        acc_[record_index * nq + q].add(scratch_[q]);
    }
}

void EnsembleAccumulator::add(std::size_t record_index, std::span<const Snapshot> terms,
                              std::span<const double> weights) {
    if (terms.size() == 1 && weights.size() == 1 && weights[0] == 1.0) {
        add(record_index, terms[0]);
        return;
    }
    if (record_index >= records_) {
        throw std::out_of_range("EnsembleAccumulator::add: record index out of range");
    }
    if (terms.size() != weights.size() || terms.empty()) {
        throw std::invalid_argument("EnsembleAccumulator::add: one weight per term required");
    }
    const std::size_t nq = quantities_.size();
    for (std::size_t q = 0; q < nq; ++q) {
        ComplexMatrix& sum = scratch_[q];
        sum.fill(complex{0.0, 0.0});
        for (std::size_t k = 0; k < terms.size(); ++k) {
            compute_sample(quantities_[q], terms[k], term_scratch_);
            term_scratch_ *= weights[k];
            sum += term_scratch_;
        }
        acc_[record_index * nq + q].add(sum);
    }
}

void EnsembleAccumulator::merge(const EnsembleAccumulator& other) {
    if (other.acc_.size() != acc_.size()) {
        throw ShapeError("EnsembleAccumulator::merge: layout mismatch");
    }
    for (std::size_t k = 0; k < acc_.size(); ++k) {
        acc_[k].merge(other.acc_[k]);
    }
}

std::uint64_t EnsembleAccumulator::count(std::size_t record_index) const {
    if (quantities_.empty()) {
        return 0;
    }
    return acc_.at(record_index * quantities_.size()).count();
}

ReducedSeries EnsembleAccumulator::finish(std::vector<double> times) const {
    if (times.size() != records_) {
        throw std::invalid_argument("EnsembleAccumulator::finish: one time per record required");
    }
    ReducedSeries series;
    series.times = std::move(times);
    series.site_dims = dims_;
    series.trajectories = records_ > 0 ? count(0) : 0;
    const std::size_t nq = quantities_.size();
    for (std::size_t q = 0; q < nq; ++q) {
        std::vector<MatrixEstimate> values;
        values.reserve(records_);
        for (std::size_t r = 0; r < records_; ++r) {
            const auto& a = acc_[r * nq + q];
            values.push_back({a.mean(), a.stderr_re(), a.stderr_im(), a.count()});
        }
        const auto& quantity = quantities_[q];
        switch (quantity.kind) {
            case Kind::one_body:
                series.one_body[quantity.i] = std::move(values);
                break;
            case Kind::two_body:
                series.two_body[{quantity.i, quantity.j}] = std::move(values);
                break;
            case Kind::full:
                series.full = std::move(values);
                break;
        }
    }
    return series;
}

double ValueEstimate::se() const { return std::hypot(se_re, se_im); }

namespace {

MatrixEstimate permute_pair(const MatrixEstimate& e, std::size_t d_first, std::size_t d_second) {
    // e is over (second ⊗ first) with dims (d_second, d_first); return (first ⊗ second)
    const std::size_t dim = d_first * d_second;
    MatrixEstimate out{ComplexMatrix(dim, dim), std::vector<double>(dim * dim), std::vector<double>(dim * dim), e.count};
    for (std::size_t a1 = 0; a1 < d_first; ++a1) {
        for (std::size_t a2 = 0; a2 < d_second; ++a2) {
            for (std::size_t b1 = 0; b1 < d_first; ++b1) {
                for (std::size_t b2 = 0; b2 < d_second; ++b2) {
                    const std::size_t src = (a2 * d_first + a1) * dim + (b2 * d_first + b1);
                    const std::size_t dst = (a1 * d_second + a2) * dim + (b1 * d_second + b2);
                    out.mean.data()[dst] = e.mean.data()[src];
                    out.se_re[dst] = e.se_re[src];
                    out.se_im[dst] = e.se_im[src];
                }
            }
        }
    }
    return out;
}

// Trace out the second site of a (first ⊗ second) pair estimate.
MatrixEstimate trace_second(const MatrixEstimate& e, std::size_t d_first, std::size_t d_second) {
    MatrixEstimate out{ComplexMatrix(d_first, d_first), std::vector<double>(d_first * d_first, 0.0),
                       std::vector<double>(d_first * d_first, 0.0), e.count};
    const std::size_t dim = d_first * d_second;
    for (std::size_t a = 0; a < d_first; ++a) {
        for (std::size_t b = 0; b < d_first; ++b) {
            double var_re = 0.0;
            double var_im = 0.0;
            for (std::size_t c = 0; c < d_second; ++c) {
                const std::size_t k = (a * d_second + c) * dim + (b * d_second + c);
                out.mean(a, b) += e.mean.data()[k];
                var_re += e.se_re[k] * e.se_re[k];
                var_im += e.se_im[k] * e.se_im[k];
            }
            out.se_re[a * d_first + b] = std::sqrt(var_re);
            out.se_im[a * d_first + b] = std::sqrt(var_im);
        }
    }
    return out;
}

// Σ_ab op_ba m_ab with independent-entry error propagation.
ValueEstimate trace_product(const ComplexMatrix& op, const MatrixEstimate& e) {
    const std::size_t d = op.rows();
    ValueEstimate v{complex{0.0, 0.0}, 0.0, 0.0};
    double var_re = 0.0;
    double var_im = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < d; ++b) {
            const complex w = op(b, a);
            const std::size_t k = a * d + b;
            v.mean += w * e.mean.data()[k];
            const double sr2 = e.se_re[k] * e.se_re[k];
            const double si2 = e.se_im[k] * e.se_im[k];
            var_re += w.real() * w.real() * sr2 + w.imag() * w.imag() * si2;
            var_im += w.imag() * w.imag() * sr2 + w.real() * w.real() * si2;
        }
    }
    v.se_re = std::sqrt(var_re);
    v.se_im = std::sqrt(var_im);
    return v;
}

void check_op(const ComplexMatrix& op, std::size_t dim, const char* what) {
    if (op.rows() != dim || op.cols() != dim) {
        throw ShapeError(std::string(what) + ": operator does not match site dimension");
    }
}

}  // namespace

std::vector<MatrixEstimate> pair_estimates(const ReducedSeries& series, std::size_t i, std::size_t j) {
    if (auto it = series.two_body.find({i, j}); it != series.two_body.end()) {
        return it->second;
    }
    if (auto it = series.two_body.find({j, i}); it != series.two_body.end()) {
        std::vector<MatrixEstimate> out;
        out.reserve(it->second.size());
        for (const auto& e : it->second) {
            out.push_back(permute_pair(e, series.site_dims.at(i), series.site_dims.at(j)));
        }
        return out;
    }
    throw std::out_of_range("no two-body estimate for pair (" + std::to_string(i) + "," + std::to_string(j) + ")");
}

std::vector<MatrixEstimate> site_estimates(const ReducedSeries& series, std::size_t site) {
    if (auto it = series.one_body.find(site); it != series.one_body.end()) {
        return it->second;
    }
    for (const auto& [key, values] : series.two_body) {
        if (key.first != site && key.second != site) {
            continue;
        }
        const std::size_t other = key.first == site ? key.second : key.first;
        const auto ordered = pair_estimates(series, site, other);
        std::vector<MatrixEstimate> out;
        out.reserve(ordered.size());
        for (const auto& e : ordered) {
            out.push_back(trace_second(e, series.site_dims.at(site), series.site_dims.at(other)));
        }
        return out;
    }
    throw std::out_of_range("no estimate available for site " + std::to_string(site));
}

std::vector<ValueEstimate> observable(const ReducedSeries& series, std::size_t site, const ComplexMatrix& op) {
    if (site >= series.site_dims.size()) {
        throw std::out_of_range("observable: site out of range");
    }
    check_op(op, series.site_dims[site], "observable");
    const auto estimates = site_estimates(series, site);
    std::vector<ValueEstimate> out;
    out.reserve(estimates.size());
    for (const auto& e : estimates) {
        out.push_back(trace_product(op, e));
    }
    return out;
}

std::vector<ValueEstimate> correlation(const ReducedSeries& series, std::size_t i, std::size_t j,
                                       const ComplexMatrix& op_a, const ComplexMatrix& op_b) {
    if (i == j) {
        throw std::out_of_range("correlation: sites must differ");
    }
    if (i >= series.site_dims.size() || j >= series.site_dims.size()) {
        throw std::out_of_range("correlation: site out of range");
    }
    check_op(op_a, series.site_dims[i], "correlation");
    check_op(op_b, series.site_dims[j], "correlation");
    const ComplexMatrix ab = kron(op_a, op_b);
    const auto pair = pair_estimates(series, i, j);
    const auto a = observable(series, i, op_a);
    const auto b = observable(series, j, op_b);
    std::vector<ValueEstimate> out;
    out.reserve(pair.size());
    for (std::size_t t = 0; t < pair.size(); ++t) {
        const ValueEstimate joint = trace_product(ab, pair[t]);
        const complex ya = a[t].mean;
        const complex zb = b[t].mean;
        ValueEstimate c{joint.mean - ya * zb, 0.0, 0.0};
        // δ(YZ) = Z δY + Y δZ
        auto spread = [](complex w, const ValueEstimate& v, double& vr, double& vi) {
            vr += w.real() * w.real() * v.se_re * v.se_re + w.imag() * w.imag() * v.se_im * v.se_im;
            vi += w.imag() * w.imag() * v.se_re * v.se_re + w.real() * w.real() * v.se_im * v.se_im;
        };
        double var_re = joint.se_re * joint.se_re;
        double var_im = joint.se_im * joint.se_im;
        spread(zb, a[t], var_re, var_im);
        spread(ya, b[t], var_re, var_im);
        c.se_re = std::sqrt(var_re);
        c.se_im = std::sqrt(var_im);
        out.push_back(c);
    }
    return out;
}

std::vector<double> min_eigenvalues(const std::vector<MatrixEstimate>& series) {
    std::vector<double> out;
    out.reserve(series.size());
    for (const auto& e : series) {
        ComplexMatrix herm = e.mean + e.mean.adjoint();
        herm *= 0.5;
        out.push_back(hermitian_eigenvalues(herm).front());
    }
    return out;
}

}  // namespace sdmc
