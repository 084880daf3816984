#include "sdmc/experiments.hpp"

#include <functional>
#include <map>

namespace sdmc {

namespace {

ModelSpec uniform_model(std::size_t n, const ComplexMatrix& h, const ComplexMatrix& coupling_op) {
    ModelSpec spec;
    spec.sites.assign(n, SiteSpec{2, h});
    spec.channels.push_back(CouplingChannel::uniform(n, coupling_op));
    return spec;
}

void nearest_neighbour(ModelSpec& spec, double lambda) {
    for (std::size_t i = 0; i + 1 < spec.sites.size(); ++i) {
        spec.channels.front().set_pair(i, i + 1, lambda);
    }
}

CorrelationRequest zz_correlation(std::size_t i, std::size_t j) {
    return {"C(sigma_z@" + std::to_string(i) + ";sigma_z@" + std::to_string(j) + ")", i, j, pauli::sigma_z(),
            pauli::sigma_z()};
}

// Two spins, h = sigma_x on each, sigma_z sigma_z coupling, both in the
// all-entries-1/2 state.
ExperimentConfig fig1() {
    ExperimentConfig cfg;
    cfg.name = "fig1";
    cfg.model = uniform_model(2, pauli::sigma_x(), pauli::sigma_z());
    cfg.model.channels.front().set_pair(0, 1, 0.02);
    cfg.initial_state = InitialState::product({states::plus(), states::plus()});
    cfg.grid = {150.0, 0.01, 50};
    cfg.trajectories = 1'000'000;
    cfg.scheme = Scheme::exponential_euler;
    cfg.requests.sites = {0};
    return cfg;
}

ExperimentConfig fig1_mini() {
    ExperimentConfig cfg = fig1();
    cfg.name = "fig1-mini";
    cfg.grid = {10.0, 0.01, 10};
    cfg.trajectories = 10'000;
    cfg.mode = Mode::compare;
    return cfg;
}

// Chain with h = sigma_z on every site and nearest-neighbour sigma_x sigma_x
// coupling; each unordered pair contributes lambda once. The centre spin starts
// up, the others in the all-entries-1/2 state.
ExperimentConfig chain(const std::string& name, std::size_t n, double t_end, std::size_t stride,
                       std::uint64_t trajectories) {
    ExperimentConfig cfg;
    cfg.name = name;
    cfg.model = uniform_model(n, pauli::sigma_z(), pauli::sigma_x());
    nearest_neighbour(cfg.model, 0.01);
    const std::size_t centre = n / 2;
    std::vector<ComplexMatrix> factors(n, states::plus());
    factors[centre] = states::up();
    cfg.initial_state = InitialState::product(std::move(factors));
    cfg.grid = {t_end, 0.002, stride};
    cfg.trajectories = trajectories;
    cfg.scheme = Scheme::exponential_euler;
    cfg.requests.sites = {centre};
    for (std::size_t j = 0; j < n; ++j) {
        if (j != centre) {
            cfg.requests.correlations.push_back(zz_correlation(centre, j));
        }
    }
    return cfg;
}

ExperimentConfig fig3() { return chain("fig3", 11, 100.0, 500, 10'000); }

ExperimentConfig fig3_mini() {
    ExperimentConfig cfg = chain("fig3-mini", 5, 50.0, 250, 2'000);
    cfg.mode = Mode::compare;
    return cfg;
}

ExperimentConfig sanity() {
    ExperimentConfig cfg;
    cfg.name = "sanity";
    cfg.model = uniform_model(3, pauli::sigma_x(), pauli::sigma_z());
    nearest_neighbour(cfg.model, 0.05);
    cfg.initial_state = InitialState::product({states::up(), states::plus(), states::up()});
    cfg.grid = {2.0, 0.001, 100};
    cfg.trajectories = 10'000;
    cfg.mode = Mode::compare;
    cfg.scheme = Scheme::exponential_euler;
    cfg.requests.sites = {0, 1, 2};
    cfg.requests.full_state = true;
    cfg.requests.correlations.push_back(zz_correlation(0, 1));
    return cfg;
}

// Two spins with sigma_z sigma_z coupling and no local field; the closed form
// applies, so compare also reports analytic vs oracle.
ExperimentConfig ising_z() {
    ExperimentConfig cfg;
    cfg.name = "ising-z";
    cfg.model = uniform_model(2, ComplexMatrix::zeros(2, 2), pauli::sigma_z());
    cfg.model.channels.front().set_pair(0, 1, 1.0);
    ComplexMatrix rho1(2, 2);
    rho1(0, 0) = 0.9;
    rho1(1, 1) = 0.1;
    rho1(0, 1) = complex(0.05, 0.02);
    rho1(1, 0) = std::conj(rho1(0, 1));
    cfg.initial_state = InitialState::product({rho1, states::plus()});
    cfg.grid = {2.0, 0.001, 250};
    cfg.trajectories = 100'000;
    cfg.mode = Mode::compare;
    cfg.scheme = Scheme::exponential_euler;
    cfg.requests.sites = {0};
    return cfg;
}

const std::map<std::string, std::function<ExperimentConfig()>>& registry() {
    static const std::map<std::string, std::function<ExperimentConfig()>> presets = {
        {"fig1", fig1},     {"fig1-mini", fig1_mini}, {"fig3", fig3},
        {"fig3-mini", fig3_mini}, {"sanity", sanity}, {"ising-z", ising_z},
    };
    return presets;
}

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& [name, make] : registry()) {
        names.push_back(name);
    }
    return names;
}

ExperimentConfig preset(const std::string& name) {
    const auto it = registry().find(name);
    if (it == registry().end()) {
        throw ConfigError("unknown preset '" + name + "'");
    }
    return it->second();
}

}  // namespace sdmc
