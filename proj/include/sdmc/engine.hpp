#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "sdmc/linalg.hpp"
#include "sdmc/model.hpp"
#include "sdmc/noise.hpp"

namespace sdmc {

// Itô integration of the per-site stochastic master equation
//
//   hbar dρ_i = -i[h_i, ρ_i] dt
//             + Σ_c Σ_j (sqrt(hbar λ_ij) / 2) ([x_i, ρ_i] dω_ij - i {x_i, ρ_i} dω*_ji)
//
// Both schemes evaluate the noise term at the left end of the step:
//   euler_maruyama     ρ ← ρ + drift(ρ) dt + noise(ρ)
//   exponential_euler  ρ ← U (ρ + noise(ρ)) U†,  U = exp(-i h_i dt / hbar)
// The second is exact when all couplings vanish.
enum class Scheme { euler_maruyama, exponential_euler };

enum class BlowUpPolicy { abort, discard };

struct IntegrationGrid {
    double t_end = 0.0;
    double dt = 0.0;
    std::size_t record_stride = 1;

    // Throws std::invalid_argument unless dt > 0, t_end >= 0, record_stride >= 1.
    void check() const;
    std::size_t step_count() const;
    std::size_t record_count() const;
    std::vector<double> record_times() const;
};

struct TrajectoryState {
    double time = 0.0;
    std::vector<ComplexMatrix> site_states;
};

struct Snapshot {
    double time = 0.0;
    std::vector<ComplexMatrix> site_states;
    std::vector<complex> traces;
};

class TrajectoryBlowUp : public std::runtime_error {
public:
    TrajectoryBlowUp(double time, std::size_t site);
    double time() const noexcept { return time_; }
    std::size_t site() const noexcept { return site_; }

private:
    double time_;
    std::size_t site_;
};

// Everything about the model that one step needs, precomputed for a fixed dt.
// Immutable after construction and shared between worker threads.
class Propagator {
public:
    Propagator(const ModelSpec& spec, double dt, Scheme scheme = Scheme::euler_maruyama);

    const NoiseLayout& layout() const noexcept { return layout_; }
    double dt() const noexcept { return dt_; }
    Scheme scheme() const noexcept { return scheme_; }
    std::size_t site_count() const noexcept { return sites_.size(); }

    // Per-thread scratch space.
    class Workspace {
        friend class Propagator;
        std::vector<ComplexMatrix> next;
        std::vector<ComplexMatrix> x_rho;
        std::vector<ComplexMatrix> rho_x;
        std::vector<ComplexMatrix> tmp;
    };
    Workspace make_workspace() const;

    // Advances every site by one step. On a non-finite entry throws
    // TrajectoryBlowUp and leaves `state` untouched.
    void step(TrajectoryState& state, const IncrementBlock& increments, Workspace& ws) const;

private:
    struct NoiseTerm {
        std::size_t forward;   // ω_ij, multiplies the commutator
        std::size_t backward;  // ω_ji, conjugated, multiplies the anticommutator
        complex coefficient;   // sqrt(hbar λ_ij) / (2 hbar), principal branch
    };
    struct ChannelTerms {
        ComplexMatrix op;
        std::vector<NoiseTerm> terms;
    };
    struct SiteData {
        std::size_t dimension;
        ComplexMatrix drift;       // -i h dt / hbar
        ComplexMatrix unitary;     // exp(-i h dt / hbar)
        ComplexMatrix unitary_adj;
        std::vector<ChannelTerms> channels;
    };

    void advance_qubit(const SiteData& site, const complex* dw, const complex* in, complex* out) const;
    void advance_general(const SiteData& site, const complex* dw, const ComplexMatrix& rho, ComplexMatrix& next,
                         ComplexMatrix& x_rho, ComplexMatrix& rho_x, ComplexMatrix& tmp) const;

    double dt_;
    Scheme scheme_;
    NoiseLayout layout_;
    std::vector<SiteData> sites_;
};

// Convenience single step; builds a Propagator each call.
TrajectoryState step(const TrajectoryState& state, const ModelSpec& spec, const IncrementBlock& increments,
                     Scheme scheme = Scheme::euler_maruyama);

Snapshot make_snapshot(const TrajectoryState& state);

using SnapshotSink = std::function<void(std::size_t record_index, const Snapshot&)>;

// Integrates one trajectory from the given site factors, handing every
// recorded snapshot (t = 0, stride*dt, ...) to `sink`.
void run_trajectory(const Propagator& propagator, const std::vector<ComplexMatrix>& initial_factors,
                    const IntegrationGrid& grid, RandomStream& rng, const SnapshotSink& sink);

std::vector<Snapshot> run_trajectory(const ModelSpec& spec, const std::vector<ComplexMatrix>& initial_factors,
                                     const IntegrationGrid& grid, RandomStream& rng,
                                     Scheme scheme = Scheme::euler_maruyama);

// Pure form used by the parallel runner: the noise is drawn from
// derive_trajectory_rng(master_seed, trajectory_index).
std::vector<Snapshot> run_trajectory(const ModelSpec& spec, const std::vector<ComplexMatrix>& initial_factors,
                                     const IntegrationGrid& grid, std::uint64_t master_seed,
                                     std::uint64_t trajectory_index, Scheme scheme = Scheme::euler_maruyama);

}  // namespace sdmc
