#include <doctest.h>

#include <cmath>

#include "sdmc/noise.hpp"

using namespace sdmc;

namespace {

ModelSpec pair_model(std::size_t n, double lambda) {
    ModelSpec spec;
    spec.sites.assign(n, SiteSpec{2, ComplexMatrix(2, 2)});
    spec.channels.push_back(CouplingChannel::uniform(n, pauli::sigma_z()));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) spec.channels.front().set_pair(i, j, lambda);
    return spec;
}

struct Moments {
    double n = 0;
    complex sum{};
    double abs2_sum = 0;
    double abs2_sq = 0;
    complex sq_sum{};
    double sq_re2 = 0;
    double sq_im2 = 0;

    void add(complex w) {
        n += 1;
        sum += w;
        const double a = std::norm(w);
        abs2_sum += a;
        abs2_sq += a * a;
        const complex s = w * w;
        sq_sum += s;
        sq_re2 += s.real() * s.real();
        sq_im2 += s.imag() * s.imag();
    }
};

}  // namespace

TEST_SUITE("noise") {
    TEST_CASE("layout orders ordered pairs by channel, i, j") {
        auto spec = pair_model(3, 0.0);
        spec.channels.front().set_pair(0, 2, 0.5);
        spec.channels.push_back(CouplingChannel::uniform(3, pauli::sigma_x()));
        spec.channels.back().set_pair(1, 2, 0.1);
        const NoiseLayout layout(spec);
        REQUIRE(layout.size() == 4);
        CHECK(layout.entries()[0] == NoiseEntry{0, 0, 2});
        CHECK(layout.entries()[1] == NoiseEntry{0, 2, 0});
        CHECK(layout.entries()[2] == NoiseEntry{1, 1, 2});
        CHECK(layout.entries()[3] == NoiseEntry{1, 2, 1});
        CHECK(layout.index_of(1, 2, 1) == std::optional<std::size_t>(3));
        CHECK_FALSE(layout.index_of(0, 0, 1).has_value());
        CHECK_FALSE(layout.index_of(5, 0, 1).has_value());
    }

    TEST_CASE("increment moments over 1e6 draws") {
        const double dt = 0.01;
        const std::size_t draws = 1'000'000;
        const NoiseLayout layout(pair_model(2, 1.0));
        auto rng = derive_trajectory_rng(42, 0);
        IncrementBlock block;
        Moments m;
        for (std::size_t k = 0; k < draws / 2; ++k) {
            sample_increments(rng, layout, dt, block);
            for (const complex& w : block.values) m.add(w);
        }
        const double n = m.n;
        CHECK(n == draws);
        // E[dω] = 0 within 5 sqrt(2 dt / n)
        const complex mean = m.sum / n;
        CHECK(std::abs(mean) < 5.0 * std::sqrt(2.0 * dt / n));
        // E[dω* dω] = 2 dt within 1 %
        const double cov = m.abs2_sum / n;
        CHECK(std::abs(cov - 2.0 * dt) < 0.01 * 2.0 * dt);
        // E[dω dω] = 0 within 5 standard errors per component
        const complex pseudo = m.sq_sum / n;
        const double se_re = std::sqrt((m.sq_re2 / n - pseudo.real() * pseudo.real()) / (n - 1));
        const double se_im = std::sqrt((m.sq_im2 / n - pseudo.imag() * pseudo.imag()) / (n - 1));
        CHECK(std::abs(pseudo.real()) < 5.0 * se_re);
        CHECK(std::abs(pseudo.imag()) < 5.0 * se_im);
    }

    TEST_CASE("distinct entries are uncorrelated") {
        const double dt = 0.02;
        const NoiseLayout layout(pair_model(3, 1.0));
        REQUIRE(layout.size() == 6);
        auto rng = derive_trajectory_rng(7, 3);
        const std::size_t draws = 200'000;
        std::vector<std::vector<complex>> acc(6, std::vector<complex>(6));
        std::vector<std::vector<double>> acc2(6, std::vector<double>(6));
        IncrementBlock block;
        for (std::size_t k = 0; k < draws; ++k) {
            sample_increments(rng, layout, dt, block);
            for (std::size_t a = 0; a < 6; ++a)
                for (std::size_t b = 0; b < 6; ++b) {
                    const complex p = std::conj(block.values[a]) * block.values[b];
                    acc[a][b] += p;
                    acc2[a][b] += std::norm(p);
                }
        }
        for (std::size_t a = 0; a < 6; ++a)
            for (std::size_t b = 0; b < 6; ++b) {
                const complex mean = acc[a][b] / double(draws);
                const double se = std::sqrt((acc2[a][b] / draws - std::norm(mean)) / (draws - 1));
                const complex target = a == b ? complex(2.0 * dt) : complex(0.0);
                CHECK(std::abs(mean - target) < 5.0 * se);
            }
    }

    TEST_CASE("streams are deterministic and distinct") {
        const NoiseLayout layout(pair_model(2, 1.0));
        auto a = derive_trajectory_rng(123, 9);
        auto b = derive_trajectory_rng(123, 9);
        CHECK(a == b);
        for (int k = 0; k < 100; ++k) {
            CHECK(sample_increments(a, layout, 0.1).values == sample_increments(b, layout, 0.1).values);
        }
        CHECK_FALSE(derive_trajectory_rng(123, 9) == derive_trajectory_rng(123, 10));
        CHECK_FALSE(derive_trajectory_rng(123, 9) == derive_trajectory_rng(124, 9));
        // The derivation is part of the reproducibility contract.
        std::uint64_t a0 = 123;
        std::uint64_t b0 = 9 ^ 0xD1B54A32D192ED03ULL;
        const std::uint64_t ha = splitmix64(a0);
        const std::uint64_t hb = splitmix64(b0);
        CHECK(derive_trajectory_rng(123, 9) == RandomStream(ha ^ (hb * 0xA24BAED4963EE407ULL + 0x9FB21C651E98DF25ULL)));
    }

    TEST_CASE("neighbouring trajectory streams are uncorrelated") {
        auto a = derive_trajectory_rng(5, 0);
        auto b = derive_trajectory_rng(5, 1);
        const int n = 10'000;
        double sab = 0, sa = 0, sb = 0, saa = 0, sbb = 0;
        for (int k = 0; k < n; ++k) {
            const double x = a.normal();
            const double y = b.normal();
            sab += x * y;
            sa += x;
            sb += y;
            saa += x * x;
            sbb += y * y;
        }
        const double cov = sab / n - (sa / n) * (sb / n);
        const double corr = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
        CHECK(std::abs(corr) < 5.0 / std::sqrt(double(n)));
    }

    TEST_CASE("generator matches an independent reference implementation") {
        auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
        std::uint64_t s[4] = {1, 2, 3, 4};
        auto next = [&] {
            const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
            const std::uint64_t t = s[1] << 17;
            s[2] ^= s[0];
            s[3] ^= s[1];
            s[1] ^= s[2];
            s[0] ^= s[3];
            s[2] ^= t;
            s[3] = rotl(s[3], 45);
            return result;
        };
        CHECK(next() == 41943041ULL);
        CHECK(next() == 58720359ULL);

        std::uint64_t sm = 0;
        CHECK(splitmix64(sm) == 0xE220A8397B1DCDAFULL);

        // Seeding fills the state with consecutive splitmix64 outputs.
        std::uint64_t z = 0x1234;
        for (auto& w : s) {
            z += 0x9E3779B97F4A7C15ULL;
            std::uint64_t v = z;
            v = (v ^ (v >> 30)) * 0xBF58476D1CE4E5B9ULL;
            v = (v ^ (v >> 27)) * 0x94D049BB133111EBULL;
            w = v ^ (v >> 31);
        }
        RandomStream rng(0x1234);
        for (int k = 0; k < 16; ++k) {
            CHECK(rng() == next());
        }
    }

    TEST_CASE("bad dt is rejected") {
        const NoiseLayout layout(pair_model(2, 1.0));
        RandomStream rng(1);
        CHECK_THROWS(sample_increments(rng, layout, 0.0));
        CHECK_THROWS(sample_increments(rng, layout, -1.0));
    }
}
