#include "sdmc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "sdmc/analytic.hpp"
#include "sdmc/oracle.hpp"

namespace sdmc {

using nlohmann::json;

EstimateRequests estimate_requests(const OutputRequests& requests) {
    EstimateRequests out;
    std::set<std::size_t> sites;
    auto add_site = [&](std::size_t s) {
        if (sites.insert(s).second) {
            out.sites.push_back(s);
        }
    };
    for (std::size_t s : requests.sites) add_site(s);
    for (const auto& o : requests.observables) add_site(o.site);
    for (const auto& c : requests.correlations) {
        add_site(c.i);
        add_site(c.j);
    }
    std::set<std::pair<std::size_t, std::size_t>> pairs;
    auto add_pair = [&](std::size_t i, std::size_t j) {
        const auto key = std::minmax(i, j);
        if (pairs.insert({key.first, key.second}).second) {
            out.pairs.emplace_back(i, j);
        }
    };
    for (const auto& [i, j] : requests.pairs) add_pair(i, j);
    for (const auto& c : requests.correlations) add_pair(c.i, c.j);
    out.full_state = requests.full_state;
    return out;
}

namespace {

struct BlockResult {
    EnsembleAccumulator acc;
    std::uint64_t used = 0;
    std::uint64_t discarded = 0;
};

class BlockRunner {
public:
    BlockRunner(const ExperimentConfig& cfg, const EstimateRequests& requests, const Propagator& propagator)
        : cfg_(cfg), requests_(requests), propagator_(propagator), ws_(propagator.make_workspace()) {
        for (const auto& term : cfg.initial_state.terms) {
            weights_.push_back(term.weight);
        }
        const std::size_t records = cfg.grid.record_count();
        buffer_.assign(records, std::vector<Snapshot>(weights_.size()));
        states_.resize(weights_.size());
        increments_.dt = cfg.grid.dt;
        increments_.values.assign(propagator.layout().size(), complex{});
    }

    BlockResult run(std::size_t block) {
        BlockResult out{EnsembleAccumulator(requests_, cfg_.model.dimensions(), cfg_.grid.record_count(),
                                            cfg_.dimension_cap),
                        0, 0};
        const std::uint64_t first = static_cast<std::uint64_t>(block) * kTrajectoryBlock;
        const std::uint64_t last = std::min<std::uint64_t>(cfg_.trajectories, first + kTrajectoryBlock);
        for (std::uint64_t traj = first; traj < last; ++traj) {
            try {
                integrate(traj);
            } catch (const TrajectoryBlowUp&) {
                if (cfg_.blow_up == BlowUpPolicy::abort) {
                    throw;
                }
                ++out.discarded;
                continue;
            }
            for (std::size_t r = 0; r < buffer_.size(); ++r) {
                out.acc.add(r, buffer_[r], weights_);
            }
            ++out.used;
        }
        return out;
    }

private:
    void record(std::size_t r) {
        for (std::size_t k = 0; k < states_.size(); ++k) {
            Snapshot& snap = buffer_[r][k];
            snap.time = states_[k].time;
            snap.site_states = states_[k].site_states;
            snap.traces.resize(snap.site_states.size());
            for (std::size_t i = 0; i < snap.site_states.size(); ++i) {
                snap.traces[i] = snap.site_states[i].trace();
            }
        }
    }

    void integrate(std::uint64_t trajectory) {
        auto rng = derive_trajectory_rng(cfg_.seed, trajectory);
        for (std::size_t k = 0; k < states_.size(); ++k) {
            states_[k].time = 0.0;
            states_[k].site_states = cfg_.initial_state.terms[k].factors;
        }
        record(0);
        const std::size_t steps = cfg_.grid.step_count();
        for (std::size_t s = 1; s <= steps; ++s) {
            sample_increments(rng, propagator_.layout(), cfg_.grid.dt, increments_);
            for (auto& state : states_) {
                propagator_.step(state, increments_, ws_);
                state.time = static_cast<double>(s) * cfg_.grid.dt;
            }
            if (s % cfg_.grid.record_stride == 0) {
                record(s / cfg_.grid.record_stride);
            }
        }
    }

    const ExperimentConfig& cfg_;
    const EstimateRequests& requests_;
    const Propagator& propagator_;
    Propagator::Workspace ws_;
    std::vector<double> weights_;
    std::vector<std::vector<Snapshot>> buffer_;  // [record][term]
    std::vector<TrajectoryState> states_;
    IncrementBlock increments_;
};

}  // namespace

EnsembleResult run_ensemble(const ExperimentConfig& cfg, const EstimateRequests& requests) {
    cfg.grid.check();
    const Propagator propagator(cfg.model, cfg.grid.dt, cfg.scheme);
    const std::size_t records = cfg.grid.record_count();
    const std::size_t blocks =
        static_cast<std::size_t>((cfg.trajectories + kTrajectoryBlock - 1) / kTrajectoryBlock);

    EnsembleAccumulator total(requests, cfg.model.dimensions(), records, cfg.dimension_cap);
    std::uint64_t used = 0;
    std::uint64_t discarded = 0;

    std::mutex mu;
    std::map<std::size_t, BlockResult> pending;
    std::size_t next_merge = 0;
    std::atomic<std::size_t> next_block{0};
    std::atomic<bool> stop{false};
    std::exception_ptr failure;

    // Blocks are merged strictly in index order, whatever thread finished them.
    auto worker = [&] {
        try {
            BlockRunner runner(cfg, requests, propagator);
            while (!stop.load()) {
                const std::size_t b = next_block.fetch_add(1);
                if (b >= blocks) {
                    break;
                }
                BlockResult r = runner.run(b);
                std::lock_guard lock(mu);
                pending.emplace(b, std::move(r));
                for (auto it = pending.find(next_merge); it != pending.end(); it = pending.find(next_merge)) {
                    total.merge(it->second.acc);
                    used += it->second.used;
                    discarded += it->second.discarded;
                    pending.erase(it);
                    ++next_merge;
                }
            }
        } catch (...) {
            std::lock_guard lock(mu);
            if (!failure) {
                failure = std::current_exception();
            }
            stop.store(true);
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.workers, blocks));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            threads.emplace_back(worker);
        }
        for (auto& t : threads) {
            t.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    EnsembleResult out{total.finish(cfg.grid.record_times()), used, discarded};
    out.series.trajectories = used;
    return out;
}

namespace {

MatrixEstimate exact_estimate(ComplexMatrix m) {
    const std::size_t n = m.size();
    return {std::move(m), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), 0};
}

}  // namespace

ReducedSeries run_oracle(const ExperimentConfig& cfg, const EstimateRequests& requests) {
    const auto times = cfg.grid.record_times();
    const auto states = evolve_exact(cfg.model, cfg.initial_state, times, cfg.dimension_cap);
    const auto dims = cfg.model.dimensions();
    ReducedSeries series;
    series.times = times;
    series.site_dims = dims;
    for (std::size_t s : requests.sites) {
        auto& out = series.one_body[s];
        const std::size_t keep[] = {s};
        for (const auto& st : states) {
            out.push_back(exact_estimate(exact_reduced(st, dims, keep)));
        }
    }
    for (const auto& [i, j] : requests.pairs) {
        const std::size_t keep[] = {std::min(i, j), std::max(i, j)};
        auto& out = series.two_body[{keep[0], keep[1]}];
        for (const auto& st : states) {
            out.push_back(exact_estimate(exact_reduced(st, dims, keep)));
        }
    }
    if (requests.full_state) {
        for (const auto& st : states) {
            series.full.push_back(exact_estimate(st.rho));
        }
    }
    return series;
}

ReducedSeries run_analytic(const ExperimentConfig& cfg, const EstimateRequests& requests) {
    const IsingZClosedForm form(cfg.model, cfg.initial_state);
    if (!requests.pairs.empty() || requests.full_state) {
        throw ConfigError("analytic mode supports one-body requests only");
    }
    ReducedSeries series;
    series.times = cfg.grid.record_times();
    series.site_dims = cfg.model.dimensions();
    for (std::size_t s : requests.sites) {
        auto& out = series.one_body[s];
        for (double t : series.times) {
            out.push_back(exact_estimate(form.reduced(s, t)));
        }
    }
    return series;
}

QuantitySeries tabulate(const ReducedSeries& series, const OutputRequests& requests) {
    QuantitySeries q;
    q.times = series.times;
    q.values.resize(series.times.size());
    auto add_matrix = [&](const std::string& prefix, const std::vector<MatrixEstimate>& estimates) {
        if (estimates.empty()) {
            return;
        }
        const std::size_t d = estimates.front().mean.rows();
        for (std::size_t a = 0; a < d; ++a) {
            for (std::size_t b = 0; b < d; ++b) {
                q.names.push_back(prefix + "[" + std::to_string(a) + "," + std::to_string(b) + "]");
                for (std::size_t t = 0; t < estimates.size(); ++t) {
                    const auto& e = estimates[t];
                    q.values[t].push_back({e.mean(a, b), e.se_re[a * d + b], e.se_im[a * d + b]});
                }
            }
        }
    };
    auto add_values = [&](const std::string& name, const std::vector<ValueEstimate>& values) {
        q.names.push_back(name);
        for (std::size_t t = 0; t < values.size(); ++t) {
            q.values[t].push_back(values[t]);
        }
    };
    for (std::size_t s : requests.sites) {
        add_matrix("rho_" + std::to_string(s), site_estimates(series, s));
    }
    for (const auto& [i, j] : requests.pairs) {
        add_matrix("rho_" + std::to_string(i) + "_" + std::to_string(j), pair_estimates(series, i, j));
    }
    if (requests.full_state) {
        add_matrix("rho", series.full);
    }
    for (const auto& o : requests.observables) {
        add_values(o.name, observable(series, o.site, o.op));
    }
    for (const auto& c : requests.correlations) {
        add_values(c.name, correlation(series, c.i, c.j, c.op_a, c.op_b));
    }
    return q;
}

Table to_table(const QuantitySeries& values) {
    Table table;
    for (const auto& name : values.names) {
        table.columns.push_back(name + ".re");
        table.columns.push_back(name + ".im");
        table.columns.push_back(name + ".se");
    }
    table.times = values.times;
    for (const auto& row : values.values) {
        std::vector<double> out;
        out.reserve(row.size() * 3);
        for (const auto& v : row) {
            out.push_back(v.mean.real());
            out.push_back(v.mean.imag());
            out.push_back(v.se());
        }
        table.rows.push_back(std::move(out));
    }
    return table;
}

CompareSummary compare_series(const QuantitySeries& stochastic, const QuantitySeries& oracle,
                              const QuantitySeries* analytic, double sigma, double floor) {
    if (stochastic.names != oracle.names || stochastic.times.size() != oracle.times.size()) {
        throw std::invalid_argument("compare_series: stochastic and oracle series do not line up");
    }
    CompareSummary s;
    s.times = stochastic.times;
    for (std::size_t t = 0; t < s.times.size(); ++t) {
        double worst_dev = 0.0;
        double worst_ratio = 0.0;
        for (std::size_t q = 0; q < stochastic.names.size(); ++q) {
            const auto& est = stochastic.values[t][q];
            const complex dev = est.mean - oracle.values[t][q].mean;
            const double ratio = std::max(std::abs(dev.real()) / std::max(est.se_re, floor),
                                          std::abs(dev.imag()) / std::max(est.se_im, floor));
            worst_dev = std::max(worst_dev, std::abs(dev));
            if (ratio > worst_ratio) {
                worst_ratio = ratio;
            }
            if (ratio > s.worst_ratio) {
                s.worst_ratio = ratio;
                s.worst_quantity = stochastic.names[q];
                s.worst_time = s.times[t];
            }
        }
        s.max_abs_dev.push_back(worst_dev);
        s.max_dev_ratio.push_back(worst_ratio);
        s.worst_abs_dev = std::max(s.worst_abs_dev, worst_dev);
    }
    if (analytic != nullptr) {
        std::map<std::string, std::size_t> oracle_index;
        for (std::size_t q = 0; q < oracle.names.size(); ++q) {
            oracle_index[oracle.names[q]] = q;
        }
        for (std::size_t t = 0; t < s.times.size(); ++t) {
            double worst = 0.0;
            for (std::size_t q = 0; q < analytic->names.size(); ++q) {
                const auto it = oracle_index.find(analytic->names[q]);
                if (it != oracle_index.end()) {
                    worst = std::max(worst, std::abs(analytic->values[t][q].mean - oracle.values[t][it->second].mean));
                }
            }
            s.analytic_max_abs_dev.push_back(worst);
        }
    }
    s.passed = s.worst_ratio <= sigma;
    return s;
}

Table compare_table(const CompareSummary& summary) {
    Table table;
    table.columns = {"max_abs_dev", "max_dev_over_se"};
    const bool with_analytic = !summary.analytic_max_abs_dev.empty();
    if (with_analytic) {
        table.columns.push_back("analytic_max_abs_dev");
    }
    table.times = summary.times;
    for (std::size_t t = 0; t < summary.times.size(); ++t) {
        std::vector<double> row{summary.max_abs_dev[t], summary.max_dev_ratio[t]};
        if (with_analytic) {
            row.push_back(summary.analytic_max_abs_dev[t]);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

namespace {

OutputRequests one_body_only(const OutputRequests& requests) {
    OutputRequests out;
    out.sites = requests.sites;
    out.observables = requests.observables;
    return out;
}

bool analytic_applicable(const ExperimentConfig& cfg) {
    try {
        IsingZClosedForm form(cfg.model, cfg.initial_state);
        return true;
    } catch (const ClosedFormUnavailable&) {
        return false;
    }
}

}  // namespace

RunResult run(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const auto started = std::chrono::steady_clock::now();
    RunResult result;
    result.config = cfg;
    const EstimateRequests requests = estimate_requests(cfg.requests);

    if (cfg.mode == Mode::stochastic || cfg.mode == Mode::compare) {
        auto ensemble = run_ensemble(cfg, requests);
        result.trajectories_used = ensemble.used;
        result.discarded = ensemble.discarded;
        result.stochastic_values = tabulate(ensemble.series, cfg.requests);
        result.stochastic = std::move(ensemble.series);
    }
    if (cfg.mode == Mode::oracle || cfg.mode == Mode::compare) {
        result.oracle = run_oracle(cfg, requests);
        result.oracle_values = tabulate(*result.oracle, cfg.requests);
    }
    if (cfg.mode == Mode::analytic || (cfg.mode == Mode::compare && analytic_applicable(cfg))) {
        const OutputRequests one_body = one_body_only(cfg.requests);
        if (!one_body.empty()) {
            result.analytic = run_analytic(cfg, estimate_requests(one_body));
            result.analytic_values = tabulate(*result.analytic, one_body);
        }
    }
    if (cfg.mode == Mode::compare) {
        result.compare = compare_series(*result.stochastic_values, *result.oracle_values,
                                        result.analytic_values ? &*result.analytic_values : nullptr,
                                        cfg.compare_sigma, cfg.compare_floor);
    }
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

json RunResult::manifest() const {
    json m;
    m["name"] = config.name;
    m["mode"] = to_string(config.mode);
    m["seed"] = config.seed;
    m["trajectories_requested"] = config.trajectories;
    m["trajectories_used"] = trajectories_used;
    m["trajectories_discarded"] = discarded;
    m["workers"] = config.workers;
    m["scheme"] = to_string(config.scheme);
    m["wall_time_seconds"] = wall_seconds;
    m["trajectory_block"] = kTrajectoryBlock;
    m["config"] = config_to_json(config);
    if (compare) {
        m["compare"] = {{"gate_sigma", config.compare_sigma},
                        {"floor", config.compare_floor},
                        {"worst_ratio", compare->worst_ratio},
                        {"worst_abs_dev", compare->worst_abs_dev},
                        {"worst_quantity", compare->worst_quantity},
                        {"worst_time", compare->worst_time},
                        {"passed", compare->passed}};
    }
    if (stochastic) {
        json positivity = json::object();
        for (const auto& [site, values] : stochastic->one_body) {
            const auto eig = min_eigenvalues(values);
            positivity[std::to_string(site)] = *std::min_element(eig.begin(), eig.end());
        }
        m["min_eigenvalue_by_site"] = std::move(positivity);
    }
    return m;
}

namespace {

void append_number(std::string& out, double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

}  // namespace

std::string format_table(const Table& table) {
    std::string out = "time";
    for (const auto& c : table.columns) {
        out += '\t';
        out += c;
    }
    out += '\n';
    for (std::size_t t = 0; t < table.times.size(); ++t) {
        append_number(out, table.times[t]);
        for (double v : table.rows[t]) {
            out += '\t';
            append_number(out, v);
        }
        out += '\n';
    }
    return out;
}

void write_table(const Table& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << format_table(table);
    if (!out) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

std::vector<std::filesystem::path> emit_tables(const RunResult& result, const std::filesystem::path& directory) {
    std::filesystem::create_directories(directory);
    std::vector<std::filesystem::path> written;
    auto emit = [&](const std::string& stem, const Table& table) {
        if (table.times.empty()) {
            throw std::invalid_argument("emit_tables: empty result table '" + stem + "'");
        }
        const auto path = directory / (stem + ".tsv");
        write_table(table, path);
        written.push_back(path);
    };
    if (result.stochastic_values) emit("stochastic", to_table(*result.stochastic_values));
    if (result.oracle_values) emit("oracle", to_table(*result.oracle_values));
    if (result.analytic_values) emit("analytic", to_table(*result.analytic_values));
    if (result.compare) emit("compare", compare_table(*result.compare));
    if (written.empty()) {
        throw std::invalid_argument("emit_tables: result has no tables");
    }

    json manifest = result.manifest();
    json files = json::array();
    for (const auto& p : written) {
        files.push_back(p.filename().string());
    }
    manifest["tables"] = std::move(files);
    const auto manifest_path = directory / "manifest.json";
    std::ofstream out(manifest_path);
    if (!out) {
        throw std::runtime_error("cannot open " + manifest_path.string() + " for writing");
    }
    out << manifest.dump(2) << '\n';
    written.push_back(manifest_path);
    return written;
}

}  // namespace sdmc
