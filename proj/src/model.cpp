#include "sdmc/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sdmc {

namespace {

constexpr double kHermitianTol = 1e-12;
constexpr double kTraceTol = 1e-12;
constexpr double kPositivityTol = -1e-10;
constexpr double kWeightTol = 1e-12;

}  // namespace

CouplingChannel CouplingChannel::uniform(std::size_t n_sites, const ComplexMatrix& op) {
    CouplingChannel ch;
    ch.site_operators.assign(n_sites, op);
    ch.constants.assign(n_sites, std::vector<double>(n_sites, 0.0));
    return ch;
}

CouplingChannel& CouplingChannel::set_pair(std::size_t i, std::size_t j, double value) {
    if (i == j) {
        throw std::invalid_argument("set_pair: coupling of a site to itself");
    }
    constants.at(i).at(j) = value;
    constants.at(j).at(i) = value;
    return *this;
}

std::vector<std::size_t> ModelSpec::dimensions() const {
    std::vector<std::size_t> dims;
    dims.reserve(sites.size());
    for (const auto& s : sites) {
        dims.push_back(s.dimension);
    }
    return dims;
}

std::size_t ModelSpec::total_dimension() const {
    std::size_t total = 1;
    for (const auto& s : sites) {
        if (s.dimension != 0 && total > std::numeric_limits<std::size_t>::max() / s.dimension) {
            return std::numeric_limits<std::size_t>::max();
        }
        total *= s.dimension;
    }
    return total;
}

InitialState InitialState::product(std::vector<ComplexMatrix> factors) {
    InitialState init;
    init.terms.push_back(InitialTerm{1.0, std::move(factors)});
    return init;
}

ComplexMatrix InitialState::full_matrix(std::size_t cap) const {
    if (terms.empty()) {
        throw ValidationError("initial state has no terms");
    }
    std::size_t total = 1;
    for (const auto& f : terms.front().factors) {
        total *= f.rows();
    }
    if (total > cap) {
        throw DimensionCapExceeded("initial state dimension " + std::to_string(total) + " exceeds cap " +
                                   std::to_string(cap));
    }
    ComplexMatrix rho(total, total);
    for (const auto& term : terms) {
        ComplexMatrix t = kron_all(term.factors);
        t *= term.weight;
        rho += t;
    }
    return rho;
}

bool ValidationReport::has(IssueKind kind) const {
    return std::any_of(issues.begin(), issues.end(), [kind](const auto& i) { return i.kind == kind; });
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    for (std::size_t k = 0; k < issues.size(); ++k) {
        if (k) os << "; ";
        os << issues[k].message;
    }
    return os.str();
}

ValidationReport validate(const ModelSpec& spec) {
    ValidationReport report;
    auto add = [&](IssueKind kind, std::string msg, std::optional<std::size_t> channel = {},
                   std::optional<std::size_t> site = {}, std::optional<std::size_t> other = {}) {
        report.issues.push_back({kind, std::move(msg), channel, site, other, std::nullopt});
    };

    const std::size_t n = spec.sites.size();
    if (n == 0) {
        add(IssueKind::empty_model, "model has no sites");
    }
    if (!(spec.hbar > 0.0) || !std::isfinite(spec.hbar)) {
        add(IssueKind::bad_hbar, "hbar must be positive and finite");
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto& site = spec.sites[i];
        const auto& h = site.local_hamiltonian;
        if (site.dimension == 0 || h.rows() != site.dimension || h.cols() != site.dimension) {
            add(IssueKind::site_dimension,
                "site " + std::to_string(i) + ": local Hamiltonian is not " + std::to_string(site.dimension) +
                    "x" + std::to_string(site.dimension),
                std::nullopt, i);
            continue;
        }
        if (!h.all_finite() || hermiticity_defect(h) > kHermitianTol) {
            add(IssueKind::hamiltonian_not_hermitian, "site " + std::to_string(i) + ": local Hamiltonian is not Hermitian",
                std::nullopt, i);
        }
    }

    for (std::size_t c = 0; c < spec.channels.size(); ++c) {
        const auto& ch = spec.channels[c];
        const std::string tag = "channel " + std::to_string(c);
        if (ch.site_operators.size() != n || ch.constants.size() != n ||
            std::any_of(ch.constants.begin(), ch.constants.end(), [n](const auto& row) { return row.size() != n; })) {
            add(IssueKind::channel_shape, tag + ": operators and coupling matrix must cover all " + std::to_string(n) + " sites",
                c);
            continue;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const auto& x = ch.site_operators[i];
            if (x.rows() != spec.sites[i].dimension || x.cols() != spec.sites[i].dimension) {
                add(IssueKind::operator_shape, tag + ": operator on site " + std::to_string(i) + " has wrong dimension", c, i);
            } else if (!x.all_finite() || hermiticity_defect(x) > kHermitianTol) {
                add(IssueKind::operator_not_hermitian, tag + ": operator on site " + std::to_string(i) + " is not Hermitian",
                    c, i);
            }
            if (ch.constants[i][i] != 0.0) {
                add(IssueKind::coupling_diagonal, tag + ": lambda[" + std::to_string(i) + "][" + std::to_string(i) + "] must be 0",
                    c, i, i);
            }
            for (std::size_t j = i + 1; j < n; ++j) {
                const double a = ch.constants[i][j];
                const double b = ch.constants[j][i];
                if (!std::isfinite(a) || !std::isfinite(b)) {
                    add(IssueKind::coupling_not_finite,
                        tag + ": lambda for pair (" + std::to_string(i) + "," + std::to_string(j) + ") is not finite", c, i, j);
                } else if (a != b) {
                    add(IssueKind::coupling_not_symmetric,
                        tag + ": lambda[" + std::to_string(i) + "][" + std::to_string(j) + "] != lambda[" + std::to_string(j) +
                            "][" + std::to_string(i) + "]",
                        c, i, j);
                }
            }
        }
    }
    return report;
}

ValidationReport validate(const ModelSpec& spec, const InitialState& init) {
    ValidationReport report = validate(spec);
    const std::size_t n = spec.sites.size();
    if (init.terms.empty()) {
        report.issues.push_back({IssueKind::initial_state_empty, "initial state has no terms", {}, {}, {}, {}});
        return report;
    }
    double weight_sum = 0.0;
    for (std::size_t k = 0; k < init.terms.size(); ++k) {
        const auto& term = init.terms[k];
        weight_sum += term.weight;
        const std::string tag = "initial term " + std::to_string(k);
        if (term.factors.size() != n) {
            report.issues.push_back({IssueKind::factor_shape, tag + ": expected one factor per site", {}, {}, {}, k});
            continue;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const auto& f = term.factors[i];
            const std::string where = tag + ", site " + std::to_string(i);
            if (f.rows() != spec.sites[i].dimension || f.cols() != spec.sites[i].dimension) {
                report.issues.push_back({IssueKind::factor_shape, where + ": factor has wrong dimension", {}, i, {}, k});
                continue;
            }
            if (!f.all_finite() || hermiticity_defect(f) > kHermitianTol) {
                report.issues.push_back({IssueKind::factor_not_hermitian, where + ": factor is not Hermitian", {}, i, {}, k});
                continue;
            }
            const complex tr = f.trace();
            if (std::abs(tr - 1.0) > kTraceTol) {
                std::ostringstream os;
                os << where << ": factor trace " << tr.real() << " is not 1";
                report.issues.push_back({IssueKind::factor_trace, os.str(), {}, i, {}, k});
            }
            const auto eig = hermitian_eigenvalues(f);
            if (!eig.empty() && eig.front() < kPositivityTol) {
                report.issues.push_back(
                    {IssueKind::factor_not_positive, where + ": factor has a negative eigenvalue", {}, i, {}, k});
            }
        }
    }
    if (std::abs(weight_sum - 1.0) > kWeightTol) {
        report.issues.push_back({IssueKind::initial_weights, "initial term weights do not sum to 1", {}, {}, {}, {}});
    }
    return report;
}

void require_valid(const ModelSpec& spec, const InitialState& init) {
    const auto report = validate(spec, init);
    if (!report.ok()) {
        throw ValidationError(report.summary());
    }
}

ComplexMatrix assemble_full_hamiltonian(const ModelSpec& spec, std::size_t cap) {
    const auto dims = spec.dimensions();
    const std::size_t total = spec.total_dimension();
    if (total > cap) {
        throw DimensionCapExceeded("Hilbert-space dimension " + std::to_string(total) + " exceeds cap " +
                                   std::to_string(cap));
    }
    ComplexMatrix h(total, total);
    for (std::size_t i = 0; i < spec.sites.size(); ++i) {
        h += embed(dims, i, spec.sites[i].local_hamiltonian);
    }
    for (const auto& ch : spec.channels) {
        for (std::size_t i = 0; i < spec.sites.size(); ++i) {
            for (std::size_t j = i + 1; j < spec.sites.size(); ++j) {
                const double lambda = ch.lambda(i, j);
                if (lambda == 0.0) {
                    continue;
                }
                const SitePlacement placements[] = {{i, ch.site_operators[i]}, {j, ch.site_operators[j]}};
                ComplexMatrix term = embed_product(dims, placements);
                term *= lambda;
                h += term;
            }
        }
    }
    return h;
}

std::size_t noise_count(const ModelSpec& spec) {
    std::size_t count = 0;
    for (const auto& ch : spec.channels) {
        for (std::size_t i = 0; i < spec.sites.size(); ++i) {
            for (std::size_t j = i + 1; j < spec.sites.size(); ++j) {
                if (ch.lambda(i, j) != 0.0) {
                    count += 2;
                }
            }
        }
    }
    return count;
}

namespace states {
ComplexMatrix up() { return {{1.0, 0.0}, {0.0, 0.0}}; }
ComplexMatrix down() { return {{0.0, 0.0}, {0.0, 1.0}}; }
ComplexMatrix plus() { return {{0.5, 0.5}, {0.5, 0.5}}; }
ComplexMatrix maximally_mixed(std::size_t dimension) {
    ComplexMatrix m = ComplexMatrix::identity(dimension);
    m *= 1.0 / static_cast<double>(dimension);
    return m;
}
}  // namespace states

}  // namespace sdmc
