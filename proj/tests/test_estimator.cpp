#include <doctest.h>

#include <cmath>
#include <random>

#include "sdmc/estimator.hpp"
#include "sdmc/oracle.hpp"
#include "support.hpp"

using namespace sdmc;
using namespace sdmc::pauli;

namespace {

const complex I{0.0, 1.0};

ModelSpec chain(std::size_t n, const ComplexMatrix& h, const ComplexMatrix& x, double lambda) {
    ModelSpec spec;
    spec.sites.assign(n, SiteSpec{2, h});
    spec.channels.push_back(CouplingChannel::uniform(n, x));
    for (std::size_t i = 0; i + 1 < n; ++i) spec.channels.front().set_pair(i, i + 1, lambda);
    return spec;
}

ReducedSeries simulate(const ModelSpec& spec, const std::vector<ComplexMatrix>& init, const IntegrationGrid& grid,
                       std::uint64_t trajectories, const EstimateRequests& requests, std::uint64_t seed = 1,
                       Scheme scheme = Scheme::exponential_euler) {
    const Propagator prop(spec, grid.dt, scheme);
    EnsembleAccumulator acc(requests, spec.dimensions(), grid.record_count());
    for (std::uint64_t k = 0; k < trajectories; ++k) {
        auto rng = derive_trajectory_rng(seed, k);
        run_trajectory(prop, init, grid, rng, [&](std::size_t r, const Snapshot& s) { acc.add(r, s); });
    }
    return acc.finish(grid.record_times());
}

Snapshot snapshot_of(std::vector<ComplexMatrix> factors) {
    return make_snapshot(TrajectoryState{0.0, std::move(factors)});
}

}  // namespace

TEST_SUITE("estimator") {
    TEST_CASE("moment accumulator matches direct formulas") {
        std::mt19937_64 gen(1);
        MomentAccumulator acc(2, 2);
        std::vector<ComplexMatrix> samples;
        for (int k = 0; k < 100; ++k) {
            samples.push_back(test::random_matrix(gen, 2, 2));
            acc.add(samples.back());
        }
        CHECK(acc.count() == 100);
        for (std::size_t e = 0; e < 4; ++e) {
            complex mean{};
            for (const auto& s : samples) mean += s.data()[e];
            mean /= 100.0;
            double vr = 0.0, vi = 0.0;
            for (const auto& s : samples) {
                vr += std::pow(s.data()[e].real() - mean.real(), 2);
                vi += std::pow(s.data()[e].imag() - mean.imag(), 2);
            }
            vr /= 99.0;
            vi /= 99.0;
            CHECK(std::abs(acc.mean().data()[e] - mean) < 1e-15);
            CHECK(acc.variance_re()[e] == doctest::Approx(vr).epsilon(1e-12));
            CHECK(acc.variance_im()[e] == doctest::Approx(vi).epsilon(1e-12));
            CHECK(acc.stderr_re()[e] == doctest::Approx(std::sqrt(vr / 100.0)).epsilon(1e-12));
        }
        MomentAccumulator one(2, 2);
        one.add(samples.front());
        CHECK(one.stderr_re() == std::vector<double>(4, 0.0));
        CHECK_THROWS_AS(acc.add(ComplexMatrix(3, 3)), ShapeError);
    }

    TEST_CASE("merge laws") {
        std::mt19937_64 gen(2);
        MomentAccumulator a(2, 2), b(2, 2), seq(2, 2);
        std::vector<MomentAccumulator> shards(8, MomentAccumulator(2, 2));
        for (int k = 0; k < 1000; ++k) {
            const auto s = test::random_matrix(gen, 2, 2, 3.0);
            (k < 300 ? a : b).add(s);
            seq.add(s);
            shards[k % 8].add(s);
        }
        const auto empty = MomentAccumulator(2, 2);
        const auto ax = merge(a, empty);
        CHECK(ax.count() == a.count());
        CHECK(max_abs_diff(ax.mean(), a.mean()) == 0.0);
        CHECK(ax.variance_re() == a.variance_re());
        CHECK(merge(empty, a).variance_im() == a.variance_im());

        const auto ab = merge(a, b);
        const auto ba = merge(b, a);
        CHECK(max_abs_diff(ab.mean(), ba.mean()) < 1e-12);
        for (std::size_t e = 0; e < 4; ++e) {
            CHECK(std::abs(ab.variance_re()[e] - ba.variance_re()[e]) < 1e-12);
        }

        while (shards.size() > 1) {
            std::vector<MomentAccumulator> next;
            for (std::size_t k = 0; k < shards.size(); k += 2) next.push_back(merge(shards[k], shards[k + 1]));
            shards = std::move(next);
        }
        CHECK(shards[0].count() == 1000);
        CHECK(max_abs_diff(shards[0].mean(), seq.mean()) < 1e-12);
        for (std::size_t e = 0; e < 4; ++e) {
            CHECK(std::abs(shards[0].variance_re()[e] - seq.variance_re()[e]) < 1e-12);
            CHECK(std::abs(shards[0].variance_im()[e] - seq.variance_im()[e]) < 1e-12);
        }
    }

    TEST_CASE("sample functions") {
        std::mt19937_64 gen(3);
        std::vector<ComplexMatrix> f{test::random_matrix(gen, 2, 2), test::random_matrix(gen, 3, 3),
                                     test::random_matrix(gen, 2, 2)};
        const auto snap = snapshot_of(f);
        const complex t0 = f[0].trace(), t1 = f[1].trace(), t2 = f[2].trace();
        CHECK(max_abs_diff(reduced_one_body(snap, 1), (t0 * t2) * f[1]) < 1e-14);
        CHECK(max_abs_diff(reduced_two_body(snap, 2, 0), t1 * kron(f[2], f[0])) < 1e-14);
        CHECK(max_abs_diff(full_state(snap), kron_all(f)) < 1e-15);
        CHECK_THROWS(reduced_one_body(snap, 3));
        CHECK_THROWS(reduced_two_body(snap, 1, 1));
        CHECK_THROWS_AS(full_state(snap, 4), DimensionCapExceeded);

        const auto pair_snap = snapshot_of({f[0], f[2]});
        CHECK(reduced_two_body(pair_snap, 0, 1) == kron(f[0], f[2]));
    }

    TEST_CASE("t = 0 full state is the exact product with zero variance") {
        const auto spec = chain(3, sigma_x(), sigma_z(), 0.2);
        const std::vector<ComplexMatrix> init{states::up(), states::plus(), test::qubit_state(0.3, complex(0.1, 0.2))};
        EstimateRequests req;
        req.full_state = true;
        const auto series = simulate(spec, init, IntegrationGrid{0.1, 0.01, 5}, 50, req);
        CHECK(max_abs_diff(series.full[0].mean, kron_all(init)) < 1e-15);
        CHECK(series.full[0].max_se() == 0.0);
        CHECK(series.full[2].max_se() > 0.0);
        CHECK(series.trajectories == 50);
    }

    TEST_CASE("decoupled limit: weights are one and the mean is the exact single-site state") {
        std::mt19937_64 gen(4);
        ModelSpec spec;
        for (int i = 0; i < 3; ++i) spec.sites.push_back({2, test::random_hermitian(gen, 2)});
        std::vector<ComplexMatrix> init;
        for (int i = 0; i < 3; ++i) init.push_back(test::random_density(gen, 2));
        EstimateRequests req;
        req.sites = {0, 1, 2};
        req.pairs = {{0, 2}};
        const IntegrationGrid grid{1.0, 0.01, 50};
        const auto series = simulate(spec, init, grid, 20, req);
        for (std::size_t i = 0; i < 3; ++i) {
            const auto& est = series.one_body.at(i);
            const auto u = matrix_exp(complex(0.0, -1.0) * spec.sites[i].local_hamiltonian);
            CHECK(max_abs_diff(est.back().mean, matmul(matmul(u, init[i]), u.adjoint())) < 1e-12);
            CHECK(est.back().max_se() < 1e-14);
        }
        const auto c = correlation(series, 0, 2, sigma_z(), sigma_x());
        for (const auto& v : c) CHECK(std::abs(v.mean) < 1e-14);
    }

    TEST_CASE("two-spin Ising-z coherence follows cos 2t with a mixed partner") {
        const auto spec = chain(2, ComplexMatrix(2, 2), sigma_z(), 1.0);
        const complex r12{0.05, 0.03};
        const std::vector<ComplexMatrix> init{test::qubit_state(0.6, r12), states::plus()};
        EstimateRequests req;
        req.sites = {0};
        const IntegrationGrid grid{1.0, 1e-3, 250};
        const auto series = simulate(spec, init, grid, 20'000, req, 7);
        const auto& est = series.one_body.at(0);
        for (std::size_t r = 0; r < est.size(); ++r) {
            const double t = series.times[r];
            const complex dev = est[r].mean(0, 1) - r12 * std::cos(2.0 * t);
            CHECK(std::abs(dev.real()) <= 5.0 * est[r].se_re[1] + 1e-15);
            CHECK(std::abs(dev.imag()) <= 5.0 * est[r].se_im[1] + 1e-15);
        }
    }

    TEST_CASE("mean Hermiticity, unit trace, reduction consistency, and oracle equivalence") {
        const auto spec = chain(3, sigma_x(), sigma_z(), 0.1);
        const std::vector<ComplexMatrix> init{states::up(), states::plus(), test::qubit_state(0.7, complex(0.2, -0.1))};
        EstimateRequests req;
        req.sites = {0, 1, 2};
        req.pairs = {{1, 0}, {0, 2}};
        const IntegrationGrid grid{1.0, 1e-3, 200};
        const auto series = simulate(spec, init, grid, 5'000, req, 11);
        const auto exact = evolve_exact(spec, InitialState::product(init), series.times);
        const auto dims = spec.dimensions();
        for (std::size_t r = 0; r < series.times.size(); ++r) {
            for (std::size_t i = 0; i < 3; ++i) {
                const auto& e = series.one_body.at(i)[r];
                const double se = std::max(e.max_se(), 1e-15);
                CHECK(hermiticity_defect(e.mean) <= 5.0 * 2.0 * se);
                CHECK(std::abs(e.mean.trace() - 1.0) <= 5.0 * 2.0 * se);
                const std::size_t keep[] = {i};
                const auto ref = exact_reduced(exact[r], dims, keep);
                for (std::size_t k = 0; k < 4; ++k) {
                    const complex dev = e.mean.data()[k] - ref.data()[k];
                    CHECK(std::abs(dev.real()) <= 5.0 * e.se_re[k] + 1e-12);
                    CHECK(std::abs(dev.imag()) <= 5.0 * e.se_im[k] + 1e-12);
                }
            }
            // ρ_{1,0} traced over 0 equals ρ_1 from the same samples.
            const auto pair10 = series.two_body.at({1, 0})[r].mean;
            const std::size_t pdims[] = {2, 2};
            const std::size_t keep_first[] = {0};
            CHECK(max_abs_diff(partial_trace(pair10, pdims, keep_first), series.one_body.at(1)[r].mean) < 1e-12);
            const auto pair02 = pair_estimates(series, 2, 0)[r];
            const std::size_t keep_second[] = {1};
            CHECK(max_abs_diff(partial_trace(pair02.mean, pdims, keep_second), series.one_body.at(0)[r].mean) < 1e-12);
            const std::size_t keep02[] = {0, 2};
            const auto ref02 = exact_reduced(exact[r], dims, keep02);
            const auto& e02 = series.two_body.at({0, 2})[r];
            for (std::size_t k = 0; k < 16; ++k) {
                const complex dev = e02.mean.data()[k] - ref02.data()[k];
                CHECK(std::abs(dev.real()) <= 5.0 * e02.se_re[k] + 1e-12);
                CHECK(std::abs(dev.imag()) <= 5.0 * e02.se_im[k] + 1e-12);
            }
        }
    }

    TEST_CASE("pair permutation and site fallback") {
        std::mt19937_64 gen(5);
        const auto a = test::random_density(gen, 2);
        const auto b = test::random_density(gen, 3);
        ReducedSeries s;
        s.site_dims = {2, 3};
        s.times = {0.0};
        s.two_body[{0, 1}] = {MatrixEstimate{kron(a, b), std::vector<double>(36, 0.1), std::vector<double>(36, 0.2), 1}};
        CHECK(max_abs_diff(pair_estimates(s, 1, 0)[0].mean, kron(b, a)) < 1e-15);
        CHECK(max_abs_diff(site_estimates(s, 1)[0].mean, b) < 1e-15);
        CHECK(max_abs_diff(site_estimates(s, 0)[0].mean, a) < 1e-15);
        CHECK(site_estimates(s, 0)[0].se_re[0] == doctest::Approx(std::sqrt(3.0) * 0.1));
        CHECK_THROWS(site_estimates(ReducedSeries{}, 0));
        const auto obs = observable(s, 1, ComplexMatrix::identity(3));
        CHECK(std::abs(obs[0].mean - 1.0) < 1e-15);
        CHECK(obs[0].se_re == doctest::Approx(std::sqrt(3.0 * 2.0) * 0.1));  // 3 diagonal entries, each a sum of 2
        CHECK_THROWS_AS(observable(s, 1, sigma_z()), ShapeError);
    }

    TEST_CASE("observables and correlations") {
        const auto spec = chain(2, ComplexMatrix(2, 2), sigma_z(), 1.0);
        const std::vector<ComplexMatrix> init{test::qubit_state(0.8, complex(0.3, 0.1)), states::plus()};
        EstimateRequests req;
        req.sites = {0};
        req.pairs = {{0, 1}};
        const auto series = simulate(spec, init, IntegrationGrid{1.0, 1e-3, 100}, 4'000, req, 3);
        const auto id = observable(series, 0, identity());
        const auto sz = observable(series, 0, sigma_z());
        for (std::size_t r = 0; r < series.times.size(); ++r) {
            CHECK(std::abs(id[r].mean.real() - 1.0) <= 5.0 * id[r].se_re + 1e-15);
            // σz commutes with H: ⟨σz⟩ = 0.8 - 0.2 = 0.6 at all times.
            CHECK(std::abs(sz[r].mean.real() - 0.6) <= 5.0 * sz[r].se_re + 1e-15);
        }
        const auto c = correlation(series, 0, 1, sigma_x(), sigma_x());
        CHECK(c[0].mean == complex(0.0));
        CHECK(c[0].se() == 0.0);
        const auto c_rev = correlation(series, 1, 0, sigma_x(), sigma_x());
        for (std::size_t r = 0; r < c.size(); ++r) CHECK(std::abs(c[r].mean - c_rev[r].mean) < 1e-14);
        CHECK_THROWS(correlation(series, 0, 0, sigma_x(), sigma_x()));
    }

    TEST_CASE("mixture linearity") {
        const auto spec = chain(2, sigma_x(), sigma_z(), 0.3);
        const std::vector<ComplexMatrix> a{states::up(), states::plus()};
        const std::vector<ComplexMatrix> b{states::down(), test::qubit_state(0.2, complex(0.1, 0.0))};
        const double w = 0.3;
        const IntegrationGrid grid{0.5, 1e-3, 250};
        EstimateRequests req;
        req.sites = {0, 1};
        const Propagator prop(spec, grid.dt, Scheme::exponential_euler);
        EnsembleAccumulator mix(req, spec.dimensions(), grid.record_count());
        const std::uint64_t m = 500;
        for (std::uint64_t k = 0; k < m; ++k) {
            auto ra = derive_trajectory_rng(9, k);
            auto rb = derive_trajectory_rng(9, k);
            std::vector<Snapshot> sa, sb;
            run_trajectory(prop, a, grid, ra, [&](std::size_t, const Snapshot& s) { sa.push_back(s); });
            run_trajectory(prop, b, grid, rb, [&](std::size_t, const Snapshot& s) { sb.push_back(s); });
            for (std::size_t r = 0; r < sa.size(); ++r) {
                const Snapshot terms[] = {sa[r], sb[r]};
                const double weights[] = {w, 1.0 - w};
                mix.add(r, terms, weights);
            }
        }
        const auto mixed = mix.finish(grid.record_times());
        const auto sa = simulate(spec, a, grid, m, req, 9);
        const auto sb = simulate(spec, b, grid, m, req, 9);
        for (std::size_t i = 0; i < 2; ++i) {
            for (std::size_t r = 0; r < mixed.times.size(); ++r) {
                const auto expected = complex(w) * sa.one_body.at(i)[r].mean + complex(1.0 - w) * sb.one_body.at(i)[r].mean;
                CHECK(max_abs_diff(mixed.one_body.at(i)[r].mean, expected) < 1e-12);
            }
        }
    }

    TEST_CASE("accumulator merge is exact bookkeeping") {
        EstimateRequests req;
        req.sites = {0};
        EnsembleAccumulator a(req, {2, 2}, 2), b(req, {2, 2}, 2);
        const auto snap = snapshot_of({states::up(), states::plus()});
        a.add(0, snap);
        b.add(0, snap);
        b.add(1, snap);
        a.merge(b);
        CHECK(a.count(0) == 2);
        CHECK(a.count(1) == 1);
        CHECK_THROWS(a.add(2, snap));
        EnsembleAccumulator other(req, {2, 2}, 3);
        CHECK_THROWS_AS(a.merge(other), ShapeError);
        CHECK_THROWS(EnsembleAccumulator(EstimateRequests{{5}, {}, false}, {2, 2}, 1));
    }

    TEST_CASE("min eigenvalues of mean matrices") {
        std::vector<MatrixEstimate> s{{test::diag2(0.9, 0.1), {}, {}, 1}, {test::diag2(1.1, -0.1), {}, {}, 1}};
        const auto ev = min_eigenvalues(s);
        CHECK(ev[0] == doctest::Approx(0.1));
        CHECK(ev[1] == doctest::Approx(-0.1));
    }
}
