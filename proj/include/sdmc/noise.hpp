#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "sdmc/linalg.hpp"
#include "sdmc/model.hpp"

namespace sdmc {

struct NoiseEntry {
    std::size_t channel;
    std::size_t i;
    std::size_t j;

    friend bool operator==(const NoiseEntry&, const NoiseEntry&) = default;
};

// Index of every independent complex Wiener process omega_ij, one per channel
// and ordered pair with nonzero coupling. Entries are sorted by (channel, i, j).
class NoiseLayout {
public:
    NoiseLayout() = default;
    explicit NoiseLayout(const ModelSpec& spec);

    std::size_t size() const noexcept { return entries_.size(); }
    const std::vector<NoiseEntry>& entries() const noexcept { return entries_; }
    std::optional<std::size_t> index_of(std::size_t channel, std::size_t i, std::size_t j) const;

private:
    std::size_t n_sites_ = 0;
    std::vector<NoiseEntry> entries_;
    std::vector<std::int64_t> lookup_;  // [channel][i][j] -> entry or -1
};

// xoshiro256++; satisfies UniformRandomBitGenerator.
class RandomStream {
public:
    using result_type = std::uint64_t;

    RandomStream() : RandomStream(0) {}
    explicit RandomStream(std::uint64_t seed);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() noexcept;

    double normal() { return gaussian_(*this); }

    friend bool operator==(const RandomStream& a, const RandomStream& b) { return a.state_ == b.state_; }

private:
    std::array<std::uint64_t, 4> state_{};
    boost::random::normal_distribution<double> gaussian_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

// Stream for one trajectory, a pure function of (master_seed, trajectory_index):
// both are hashed through splitmix64 and the results fill the xoshiro state.
RandomStream derive_trajectory_rng(std::uint64_t master_seed, std::uint64_t trajectory_index);

struct IncrementBlock {
    double dt = 0.0;
    std::vector<complex> values;
};

// dω = g1 + i g2 with g1, g2 ~ N(0, dt) independent, one per layout entry, so
// E[dω* dω] = 2 dt and E[dω dω] = 0.
void sample_increments(RandomStream& rng, const NoiseLayout& layout, double dt, IncrementBlock& out);
IncrementBlock sample_increments(RandomStream& rng, const NoiseLayout& layout, double dt);

}  // namespace sdmc
