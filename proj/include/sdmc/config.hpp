#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdmc/engine.hpp"
#include "sdmc/linalg.hpp"
#include "sdmc/model.hpp"

namespace sdmc {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Mode { stochastic, oracle, analytic, compare };

struct ObservableRequest {
    std::string name;
    std::size_t site = 0;
    ComplexMatrix op;
};

struct CorrelationRequest {
    std::string name;
    std::size_t i = 0;
    std::size_t j = 0;
    ComplexMatrix op_a;
    ComplexMatrix op_b;
};

struct OutputRequests {
    std::vector<std::size_t> sites;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    bool full_state = false;
    std::vector<ObservableRequest> observables;
    std::vector<CorrelationRequest> correlations;

    bool empty() const {
        return sites.empty() && pairs.empty() && !full_state && observables.empty() && correlations.empty();
    }
};

struct ExperimentConfig {
    std::string name = "experiment";
    ModelSpec model;
    InitialState initial_state;
    IntegrationGrid grid;
    std::uint64_t trajectories = 1000;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    Mode mode = Mode::stochastic;
    Scheme scheme = Scheme::euler_maruyama;
    BlowUpPolicy blow_up = BlowUpPolicy::abort;
    OutputRequests requests;
    // compare gate: every |deviation| / max(stderr, compare_floor) <= compare_sigma
    double compare_sigma = 5.0;
    double compare_floor = 1e-9;
    std::size_t dimension_cap = kDefaultDimensionCap;
};

std::string to_string(Mode mode);
std::string to_string(Scheme scheme);
std::string to_string(BlowUpPolicy policy);
Mode parse_mode(const std::string& text);
Scheme parse_scheme(const std::string& text);
BlowUpPolicy parse_blow_up(const std::string& text);

// Operator documents: a name ("identity", "sigma_x", "sigma_y", "sigma_z",
// and for states "up", "down", "plus", "mixed"), an array of rows whose
// entries are numbers or [re, im] pairs, {"scale": s, "op": ...}, or
// {"sum": [...]}.
ComplexMatrix parse_operator(const nlohmann::json& doc, std::size_t dimension = 2);
nlohmann::json operator_to_json(const ComplexMatrix& m);

ModelSpec parse_model(const nlohmann::json& doc);
nlohmann::json model_to_json(const ModelSpec& spec);
InitialState parse_initial_state(const nlohmann::json& doc, const ModelSpec& spec);
nlohmann::json initial_state_to_json(const InitialState& init);

// `base_dir` resolves a "model" field given as a file path.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config_file(const std::filesystem::path& path);
// Complete, self-contained document; parse_config(config_to_json(c)) reproduces c.
nlohmann::json config_to_json(const ExperimentConfig& config);

// Throws ConfigError (or ValidationError for model/state problems) unless the
// config is runnable in its mode.
void validate_config(const ExperimentConfig& config);

}  // namespace sdmc
