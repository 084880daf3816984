#include "sdmc/engine.hpp"

#include <cmath>
#include <string>

namespace sdmc {

void IntegrationGrid::check() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw std::invalid_argument("grid: dt must be positive");
    }
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
        throw std::invalid_argument("grid: t_end must be nonnegative");
    }
    if (record_stride < 1) {
        throw std::invalid_argument("grid: record_stride must be at least 1");
    }
    const double steps = t_end / dt;
    if (std::abs(steps - std::round(steps)) > 1e-6) {
        throw std::invalid_argument("grid: t_end must be an integer multiple of dt");
    }
}

std::size_t IntegrationGrid::step_count() const { return static_cast<std::size_t>(std::llround(t_end / dt)); }

std::size_t IntegrationGrid::record_count() const { return step_count() / record_stride + 1; }

std::vector<double> IntegrationGrid::record_times() const {
    std::vector<double> times(record_count());
    for (std::size_t k = 0; k < times.size(); ++k) {
        times[k] = static_cast<double>(k * record_stride) * dt;
    }
    return times;
}

TrajectoryBlowUp::TrajectoryBlowUp(double time, std::size_t site)
    : std::runtime_error("trajectory blow-up: non-finite state on site " + std::to_string(site) + " at t=" +
                         std::to_string(time)),
      time_(time),
      site_(site) {}

Propagator::Propagator(const ModelSpec& spec, double dt, Scheme scheme)
    : dt_(dt), scheme_(scheme), layout_(spec) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("Propagator: dt must be positive");
    }
    const auto report = validate(spec);
    if (!report.ok()) {
        throw ValidationError(report.summary());
    }
    const std::size_t n = spec.site_count();
    const double hbar = spec.hbar;
    sites_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        SiteData site;
        site.dimension = spec.sites[i].dimension;
        site.drift = spec.sites[i].local_hamiltonian;
        site.drift *= complex{0.0, -dt / hbar};
        site.unitary = matrix_exp(site.drift);
        site.unitary_adj = site.unitary.adjoint();
        for (std::size_t c = 0; c < spec.channels.size(); ++c) {
            const auto& ch = spec.channels[c];
            ChannelTerms terms{ch.site_operators[i], {}};
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i || ch.lambda(i, j) == 0.0) {
                    continue;
                }
                const complex root = std::sqrt(complex{hbar * ch.lambda(i, j), 0.0});
                terms.terms.push_back({*layout_.index_of(c, i, j), *layout_.index_of(c, j, i), root / (2.0 * hbar)});
            }
            if (!terms.terms.empty()) {
                site.channels.push_back(std::move(terms));
            }
        }
        sites_.push_back(std::move(site));
    }
}

Propagator::Workspace Propagator::make_workspace() const {
    Workspace ws;
    for (const auto& s : sites_) {
        ws.next.emplace_back(s.dimension, s.dimension);
        ws.x_rho.emplace_back(s.dimension, s.dimension);
        ws.rho_x.emplace_back(s.dimension, s.dimension);
        ws.tmp.emplace_back(s.dimension, s.dimension);
    }
    return ws;
}

namespace {

inline void mul2(const complex* a, const complex* b, complex* o) {
    o[0] = a[0] * b[0] + a[1] * b[2];
    o[1] = a[0] * b[1] + a[1] * b[3];
    o[2] = a[2] * b[0] + a[3] * b[2];
    o[3] = a[2] * b[1] + a[3] * b[3];
}

inline bool finite(const complex* v, std::size_t n) {
    bool ok = true;
    for (std::size_t k = 0; k < n; ++k) {
        ok &= std::isfinite(v[k].real()) & std::isfinite(v[k].imag());
    }
    return ok;
}

}  // namespace

void Propagator::advance_qubit(const SiteData& site, const complex* dw, const complex* in, complex* out) const {
    const complex minus_i{0.0, -1.0};
    complex acc[4] = {in[0], in[1], in[2], in[3]};
    complex xr[4];
    complex rx[4];
    for (const auto& ch : site.channels) {
        complex a{0.0, 0.0};
        complex b{0.0, 0.0};
        for (const auto& t : ch.terms) {
            a += t.coefficient * dw[t.forward];
            b += t.coefficient * std::conj(dw[t.backward]);
        }
        mul2(ch.op.data(), in, xr);
        mul2(in, ch.op.data(), rx);
        const complex left = a + minus_i * b;
        const complex right = -(a - minus_i * b);
        for (int k = 0; k < 4; ++k) {
            acc[k] += left * xr[k] + right * rx[k];
        }
    }
    if (scheme_ == Scheme::euler_maruyama) {
        mul2(site.drift.data(), in, xr);
        mul2(in, site.drift.data(), rx);
        for (int k = 0; k < 4; ++k) {
            out[k] = acc[k] + (xr[k] - rx[k]);
        }
    } else {
        mul2(site.unitary.data(), acc, xr);
        mul2(xr, site.unitary_adj.data(), out);
    }
}

void Propagator::advance_general(const SiteData& site, const complex* dw, const ComplexMatrix& rho,
                                 ComplexMatrix& next, ComplexMatrix& x_rho, ComplexMatrix& rho_x,
                                 ComplexMatrix& tmp) const {
    const complex minus_i{0.0, -1.0};
    const std::size_t count = rho.size();
    complex* out = next.data();
    const complex* in = rho.data();
    for (std::size_t k = 0; k < count; ++k) {
        out[k] = in[k];
    }
    for (const auto& ch : site.channels) {
        complex a{0.0, 0.0};
        complex b{0.0, 0.0};
        for (const auto& t : ch.terms) {
            a += t.coefficient * dw[t.forward];
            b += t.coefficient * std::conj(dw[t.backward]);
        }
        // a [x, ρ] - i b {x, ρ} = (a - i b) xρ - (a + i b) ρx
        matmul_into(x_rho, ch.op, rho);
        matmul_into(rho_x, rho, ch.op);
        const complex left = a + minus_i * b;
        const complex right = -(a - minus_i * b);
        const complex* xr = x_rho.data();
        const complex* rx = rho_x.data();
        for (std::size_t k = 0; k < count; ++k) {
            out[k] += left * xr[k] + right * rx[k];
        }
    }
    if (scheme_ == Scheme::euler_maruyama) {
        matmul_into(x_rho, site.drift, rho);
        matmul_into(rho_x, rho, site.drift);
        const complex* kr = x_rho.data();
        const complex* rk = rho_x.data();
        for (std::size_t k = 0; k < count; ++k) {
            out[k] += kr[k] - rk[k];
        }
    } else {
        matmul_into(tmp, site.unitary, next);
        matmul_into(next, tmp, site.unitary_adj);
    }
}

void Propagator::step(TrajectoryState& state, const IncrementBlock& increments, Workspace& ws) const {
    const complex* dw = increments.values.data();
    for (std::size_t i = 0; i < sites_.size(); ++i) {
        const SiteData& site = sites_[i];
        ComplexMatrix& next = ws.next[i];
        if (site.dimension == 2) {
            advance_qubit(site, dw, state.site_states[i].data(), next.data());
        } else {
            advance_general(site, dw, state.site_states[i], next, ws.x_rho[i], ws.rho_x[i], ws.tmp[i]);
        }
        if (!finite(next.data(), next.size())) {
            throw TrajectoryBlowUp(state.time + dt_, i);
        }
    }
    for (std::size_t i = 0; i < sites_.size(); ++i) {
        std::swap(state.site_states[i], ws.next[i]);
    }
    state.time += dt_;
}

TrajectoryState step(const TrajectoryState& state, const ModelSpec& spec, const IncrementBlock& increments,
                     Scheme scheme) {
    const Propagator propagator(spec, increments.dt, scheme);
    if (increments.values.size() != propagator.layout().size()) {
        throw std::invalid_argument("step: increment block does not match the model's noise layout");
    }
    if (state.site_states.size() != spec.site_count()) {
        throw std::invalid_argument("step: one state per site required");
    }
    auto ws = propagator.make_workspace();
    TrajectoryState next = state;
    propagator.step(next, increments, ws);
    return next;
}

Snapshot make_snapshot(const TrajectoryState& state) {
    Snapshot snap{state.time, state.site_states, {}};
    snap.traces.reserve(state.site_states.size());
    for (const auto& m : state.site_states) {
        snap.traces.push_back(m.trace());
    }
    return snap;
}

void run_trajectory(const Propagator& propagator, const std::vector<ComplexMatrix>& initial_factors,
                    const IntegrationGrid& grid, RandomStream& rng, const SnapshotSink& sink) {
    grid.check();
    if (initial_factors.size() != propagator.site_count()) {
        throw std::invalid_argument("run_trajectory: one initial factor per site required");
    }
    if (std::abs(grid.dt - propagator.dt()) > 1e-15 * grid.dt) {
        throw std::invalid_argument("run_trajectory: grid dt differs from propagator dt");
    }
    TrajectoryState state{0.0, initial_factors};
    auto ws = propagator.make_workspace();
    IncrementBlock increments;
    increments.dt = grid.dt;
    increments.values.assign(propagator.layout().size(), complex{});

    Snapshot snap{0.0, initial_factors, std::vector<complex>(initial_factors.size())};
    auto emit = [&](std::size_t record) {
        snap.time = state.time;
        for (std::size_t i = 0; i < state.site_states.size(); ++i) {
            snap.site_states[i] = state.site_states[i];
            snap.traces[i] = state.site_states[i].trace();
        }
        sink(record, snap);
    };

    emit(0);
    const std::size_t steps = grid.step_count();
    for (std::size_t s = 1; s <= steps; ++s) {
        sample_increments(rng, propagator.layout(), grid.dt, increments);
        propagator.step(state, increments, ws);
        state.time = static_cast<double>(s) * grid.dt;
        if (s % grid.record_stride == 0) {
            emit(s / grid.record_stride);
        }
    }
}

std::vector<Snapshot> run_trajectory(const ModelSpec& spec, const std::vector<ComplexMatrix>& initial_factors,
                                     const IntegrationGrid& grid, RandomStream& rng, Scheme scheme) {
    grid.check();
    const Propagator propagator(spec, grid.dt, scheme);
    std::vector<Snapshot> out;
    out.reserve(grid.record_count());
    run_trajectory(propagator, initial_factors, grid, rng,
                   [&](std::size_t, const Snapshot& snap) { out.push_back(snap); });
    return out;
}

std::vector<Snapshot> run_trajectory(const ModelSpec& spec, const std::vector<ComplexMatrix>& initial_factors,
                                     const IntegrationGrid& grid, std::uint64_t master_seed,
                                     std::uint64_t trajectory_index, Scheme scheme) {
    auto rng = derive_trajectory_rng(master_seed, trajectory_index);
    return run_trajectory(spec, initial_factors, grid, rng, scheme);
}

}  // namespace sdmc
