#include "sdmc/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace sdmc {

NoiseLayout::NoiseLayout(const ModelSpec& spec) : n_sites_(spec.site_count()) {
    const std::size_t n = n_sites_;
    lookup_.assign(spec.channels.size() * n * n, -1);
    for (std::size_t c = 0; c < spec.channels.size(); ++c) {
        const auto& ch = spec.channels[c];
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j || ch.lambda(i, j) == 0.0) {
                    continue;
                }
                lookup_[(c * n + i) * n + j] = static_cast<std::int64_t>(entries_.size());
                entries_.push_back({c, i, j});
            }
        }
    }
}

std::optional<std::size_t> NoiseLayout::index_of(std::size_t channel, std::size_t i, std::size_t j) const {
    const std::size_t n = n_sites_;
    if (i >= n || j >= n || (channel + 1) * n * n > lookup_.size()) {
        return std::nullopt;
    }
    const auto v = lookup_[(channel * n + i) * n + j];
    if (v < 0) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(v);
}

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

RandomStream::RandomStream(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) {
        word = splitmix64(sm);
    }
}

RandomStream::result_type RandomStream::operator()() noexcept {
    auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

RandomStream derive_trajectory_rng(std::uint64_t master_seed, std::uint64_t trajectory_index) {
    std::uint64_t a = master_seed;
    std::uint64_t b = trajectory_index ^ 0xD1B54A32D192ED03ULL;
    const std::uint64_t ha = splitmix64(a);
    const std::uint64_t hb = splitmix64(b);
    return RandomStream(ha ^ (hb * 0xA24BAED4963EE407ULL + 0x9FB21C651E98DF25ULL));
}

void sample_increments(RandomStream& rng, const NoiseLayout& layout, double dt, IncrementBlock& out) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("sample_increments: dt must be positive");
    }
    const double scale = std::sqrt(dt);
    out.dt = dt;
    out.values.resize(layout.size());
    for (auto& v : out.values) {
        const double re = rng.normal();
        const double im = rng.normal();
        v = complex{scale * re, scale * im};
    }
}

IncrementBlock sample_increments(RandomStream& rng, const NoiseLayout& layout, double dt) {
    IncrementBlock block;
    sample_increments(rng, layout, dt, block);
    return block;
}

}  // namespace sdmc
