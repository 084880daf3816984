#include "sdmc/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "sdmc/analytic.hpp"

namespace sdmc {

using nlohmann::json;

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::stochastic: return "stochastic";
        case Mode::oracle: return "oracle";
        case Mode::analytic: return "analytic";
        case Mode::compare: return "compare";
    }
    return "?";
}

std::string to_string(Scheme scheme) {
    return scheme == Scheme::euler_maruyama ? "euler_maruyama" : "exponential_euler";
}

std::string to_string(BlowUpPolicy policy) { return policy == BlowUpPolicy::abort ? "abort" : "discard"; }

Mode parse_mode(const std::string& text) {
    if (text == "stochastic") return Mode::stochastic;
    if (text == "oracle") return Mode::oracle;
    if (text == "analytic") return Mode::analytic;
    if (text == "compare") return Mode::compare;
    throw ConfigError("unknown mode '" + text + "'");
}

Scheme parse_scheme(const std::string& text) {
    if (text == "euler_maruyama") return Scheme::euler_maruyama;
    if (text == "exponential_euler") return Scheme::exponential_euler;
    throw ConfigError("unknown scheme '" + text + "'");
}

BlowUpPolicy parse_blow_up(const std::string& text) {
    if (text == "abort") return BlowUpPolicy::abort;
    if (text == "discard") return BlowUpPolicy::discard;
    throw ConfigError("unknown blow-up policy '" + text + "'");
}

namespace {

complex parse_entry(const json& e) {
    if (e.is_number()) {
        return {e.get<double>(), 0.0};
    }
    if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        return {e[0].get<double>(), e[1].get<double>()};
    }
    throw ConfigError("matrix entry must be a number or a [re, im] pair: " + e.dump());
}

json entry_to_json(complex z) {
    if (z.imag() == 0.0) {
        return z.real();
    }
    return json::array({z.real(), z.imag()});
}

template <typename T>
T get_or(const json& doc, const char* key, T fallback) {
    if (!doc.contains(key)) {
        return fallback;
    }
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
}

template <typename T>
T get_required(const json& doc, const char* key) {
    if (!doc.contains(key)) {
        throw ConfigError(std::string("missing field '") + key + "'");
    }
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
}

std::size_t get_index(const json& e) {
    if (!e.is_number_integer() || e.get<long long>() < 0) {
        throw ConfigError("site index must be a nonnegative integer: " + e.dump());
    }
    return e.get<std::size_t>();
}

std::string label_of(const json& op_doc) { return op_doc.is_string() ? op_doc.get<std::string>() : "op"; }

}  // namespace

ComplexMatrix parse_operator(const json& doc, std::size_t dimension) {
    if (doc.is_string()) {
        const auto name = doc.get<std::string>();
        if (name == "up") return states::up();
        if (name == "down") return states::down();
        if (name == "plus") return states::plus();
        if (name == "mixed" || name == "maximally_mixed") return states::maximally_mixed(dimension);
        if (name == "zero") return ComplexMatrix(dimension, dimension);
        if (name == "identity") return ComplexMatrix::identity(dimension);
        try {
            return named_operator(name);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    if (doc.is_array()) {
        const std::size_t rows = doc.size();
        if (rows == 0 || !doc[0].is_array()) {
            throw ConfigError("explicit matrix must be a nonempty array of rows");
        }
        const std::size_t cols = doc[0].size();
        std::vector<complex> entries;
        entries.reserve(rows * cols);
        for (const auto& row : doc) {
            if (!row.is_array() || row.size() != cols) {
                throw ConfigError("explicit matrix rows must all have the same length");
            }
            for (const auto& e : row) {
                entries.push_back(parse_entry(e));
            }
        }
        return ComplexMatrix(rows, cols, std::move(entries));
    }
    if (doc.is_object()) {
        if (doc.contains("sum")) {
            ComplexMatrix total(dimension, dimension);
            for (const auto& part : doc.at("sum")) {
                ComplexMatrix m = parse_operator(part, dimension);
                if (m.rows() != dimension || m.cols() != dimension) {
                    throw ConfigError("operator sum: term has wrong dimension");
                }
                total += m;
            }
            return total;
        }
        if (doc.contains("op")) {
            ComplexMatrix m = parse_operator(doc.at("op"), dimension);
            if (doc.contains("scale")) {
                m *= parse_entry(doc.at("scale"));
            }
            return m;
        }
    }
    throw ConfigError("cannot interpret operator: " + doc.dump());
}

json operator_to_json(const ComplexMatrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) {
            row.push_back(entry_to_json(m(r, c)));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

ModelSpec parse_model(const json& doc) {
    if (!doc.is_object()) {
        throw ConfigError("model must be an object");
    }
    ModelSpec spec;
    spec.hbar = get_or<double>(doc, "hbar", 1.0);
    const json& sites = doc.contains("sites") ? doc.at("sites") : throw ConfigError("model: missing 'sites'");
    if (sites.is_object()) {
        // uniform shorthand
        const auto count = get_required<std::size_t>(sites, "count");
        const auto dim = get_or<std::size_t>(sites, "dimension", 2);
        const ComplexMatrix h = sites.contains("hamiltonian") ? parse_operator(sites.at("hamiltonian"), dim)
                                                              : ComplexMatrix(dim, dim);
        spec.sites.assign(count, SiteSpec{dim, h});
    } else if (sites.is_array()) {
        for (const auto& s : sites) {
            const auto dim = get_or<std::size_t>(s, "dimension", 2);
            const ComplexMatrix h =
                s.contains("hamiltonian") ? parse_operator(s.at("hamiltonian"), dim) : ComplexMatrix(dim, dim);
            spec.sites.push_back({dim, h});
        }
    } else {
        throw ConfigError("model: 'sites' must be an array or a {count, dimension, hamiltonian} object");
    }

    const std::size_t n = spec.sites.size();
    if (doc.contains("channels")) {
        for (const auto& c : doc.at("channels")) {
            CouplingChannel ch;
            if (c.contains("operators")) {
                const auto& ops = c.at("operators");
                if (!ops.is_array() || ops.size() != n) {
                    throw ConfigError("channel: 'operators' must list one operator per site");
                }
                for (std::size_t i = 0; i < n; ++i) {
                    ch.site_operators.push_back(parse_operator(ops[i], spec.sites[i].dimension));
                }
            } else if (c.contains("operator")) {
                for (std::size_t i = 0; i < n; ++i) {
                    ch.site_operators.push_back(parse_operator(c.at("operator"), spec.sites[i].dimension));
                }
            } else {
                throw ConfigError("channel: 'operator' or 'operators' required");
            }
            if (c.contains("constants")) {
                ch.constants = c.at("constants").get<std::vector<std::vector<double>>>();
            } else if (c.contains("pairs")) {
                ch.constants.assign(n, std::vector<double>(n, 0.0));
                for (const auto& p : c.at("pairs")) {
                    if (!p.is_array() || p.size() != 3) {
                        throw ConfigError("channel pairs must be [i, j, lambda] triples");
                    }
                    const std::size_t i = get_index(p[0]);
                    const std::size_t j = get_index(p[1]);
                    if (i >= n || j >= n || i == j) {
                        throw ConfigError("channel pair (" + p[0].dump() + "," + p[1].dump() + ") is invalid");
                    }
                    ch.set_pair(i, j, p[2].get<double>());
                }
            } else {
                throw ConfigError("channel: 'constants' or 'pairs' required");
            }
            spec.channels.push_back(std::move(ch));
        }
    }
    return spec;
}

json model_to_json(const ModelSpec& spec) {
    json doc;
    doc["hbar"] = spec.hbar;
    json sites = json::array();
    for (const auto& s : spec.sites) {
        sites.push_back({{"dimension", s.dimension}, {"hamiltonian", operator_to_json(s.local_hamiltonian)}});
    }
    doc["sites"] = std::move(sites);
    json channels = json::array();
    for (const auto& ch : spec.channels) {
        json ops = json::array();
        for (const auto& op : ch.site_operators) {
            ops.push_back(operator_to_json(op));
        }
        channels.push_back({{"operators", std::move(ops)}, {"constants", ch.constants}});
    }
    doc["channels"] = std::move(channels);
    return doc;
}

InitialState parse_initial_state(const json& doc, const ModelSpec& spec) {
    auto parse_factors = [&](const json& factors) {
        if (!factors.is_array() || factors.size() != spec.site_count()) {
            throw ConfigError("initial state: one factor per site required");
        }
        std::vector<ComplexMatrix> out;
        for (std::size_t i = 0; i < factors.size(); ++i) {
            out.push_back(parse_operator(factors[i], spec.sites[i].dimension));
        }
        return out;
    };
    InitialState init;
    if (doc.is_array()) {
        init.terms.push_back({1.0, parse_factors(doc)});
    } else if (doc.contains("terms")) {
        for (const auto& t : doc.at("terms")) {
            init.terms.push_back({get_required<double>(t, "weight"), parse_factors(t.at("factors"))});
        }
    } else if (doc.contains("factors")) {
        init.terms.push_back({1.0, parse_factors(doc.at("factors"))});
    } else {
        throw ConfigError("initial state: expected 'factors' or 'terms'");
    }
    return init;
}

json initial_state_to_json(const InitialState& init) {
    json terms = json::array();
    for (const auto& t : init.terms) {
        json factors = json::array();
        for (const auto& f : t.factors) {
            factors.push_back(operator_to_json(f));
        }
        terms.push_back({{"weight", t.weight}, {"factors", std::move(factors)}});
    }
    return {{"terms", std::move(terms)}};
}

namespace {

ExperimentConfig parse_config_fields(const json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) {
        throw ConfigError("config must be an object");
    }
    ExperimentConfig cfg;
    cfg.name = get_or<std::string>(doc, "name", "experiment");
    if (!doc.contains("model")) {
        throw ConfigError("missing field 'model'");
    }
    const json& model_doc = doc.at("model");
    if (model_doc.is_string()) {
        std::filesystem::path p = model_doc.get<std::string>();
        if (p.is_relative()) {
            p = base_dir / p;
        }
        std::ifstream in(p);
        if (!in) {
            throw ConfigError("cannot open model file " + p.string());
        }
        try {
            cfg.model = parse_model(json::parse(in));
        } catch (const json::parse_error& e) {
            throw ConfigError("model file " + p.string() + ": " + e.what());
        }
    } else {
        cfg.model = parse_model(model_doc);
    }
    if (!doc.contains("initial_state")) {
        throw ConfigError("missing field 'initial_state'");
    }
    cfg.initial_state = parse_initial_state(doc.at("initial_state"), cfg.model);

    const json& grid = doc.contains("grid") ? doc.at("grid") : throw ConfigError("missing field 'grid'");
    cfg.grid.t_end = get_required<double>(grid, "t_end");
    cfg.grid.dt = get_required<double>(grid, "dt");
    cfg.grid.record_stride = get_or<std::size_t>(grid, "record_stride", 1);

    cfg.trajectories = get_or<std::uint64_t>(doc, "trajectories", cfg.trajectories);
    cfg.seed = get_or<std::uint64_t>(doc, "seed", cfg.seed);
    cfg.workers = get_or<std::size_t>(doc, "workers", cfg.workers);
    cfg.mode = parse_mode(get_or<std::string>(doc, "mode", to_string(cfg.mode)));
    cfg.scheme = parse_scheme(get_or<std::string>(doc, "scheme", to_string(cfg.scheme)));
    cfg.blow_up = parse_blow_up(get_or<std::string>(doc, "blow_up", to_string(cfg.blow_up)));
    cfg.compare_sigma = get_or<double>(doc, "compare_sigma", cfg.compare_sigma);
    cfg.compare_floor = get_or<double>(doc, "compare_floor", cfg.compare_floor);
    cfg.dimension_cap = get_or<std::size_t>(doc, "dimension_cap", cfg.dimension_cap);

    const json& req = doc.contains("requests") ? doc.at("requests") : throw ConfigError("missing field 'requests'");
    const std::size_t n = cfg.model.site_count();
    auto site_dim = [&](std::size_t s) {
        if (s >= n) {
            throw ConfigError("request refers to site " + std::to_string(s) + " but the model has " +
                              std::to_string(n) + " sites");
        }
        return cfg.model.sites[s].dimension;
    };
    if (req.contains("sites")) {
        for (const auto& s : req.at("sites")) {
            cfg.requests.sites.push_back(get_index(s));
        }
    }
    if (req.contains("pairs")) {
        for (const auto& p : req.at("pairs")) {
            if (!p.is_array() || p.size() != 2) {
                throw ConfigError("pairs must be [i, j]");
            }
            cfg.requests.pairs.emplace_back(get_index(p[0]), get_index(p[1]));
        }
    }
    cfg.requests.full_state = get_or<bool>(req, "full_state", false);
    if (req.contains("observables")) {
        for (const auto& o : req.at("observables")) {
            ObservableRequest r;
            r.site = get_index(o.at("site"));
            r.op = parse_operator(o.at("op"), site_dim(r.site));
            r.name = get_or<std::string>(o, "name", label_of(o.at("op")) + "@" + std::to_string(r.site));
            cfg.requests.observables.push_back(std::move(r));
        }
    }
    if (req.contains("correlations")) {
        for (const auto& c : req.at("correlations")) {
            CorrelationRequest r;
            const auto& sites = c.at("sites");
            const auto& ops = c.at("ops");
            if (!sites.is_array() || sites.size() != 2 || !ops.is_array() || ops.size() != 2) {
                throw ConfigError("correlation needs 'sites': [i, j] and 'ops': [A, B]");
            }
            r.i = get_index(sites[0]);
            r.j = get_index(sites[1]);
            r.op_a = parse_operator(ops[0], site_dim(r.i));
            r.op_b = parse_operator(ops[1], site_dim(r.j));
            r.name = get_or<std::string>(c, "name",
                                         "C(" + label_of(ops[0]) + "@" + std::to_string(r.i) + ";" + label_of(ops[1]) +
                                             "@" + std::to_string(r.j) + ")");
            cfg.requests.correlations.push_back(std::move(r));
        }
    }
    return cfg;
}

}  // namespace

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
    try {
        return parse_config_fields(doc, base_dir);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path.string() + ": " + e.what());
    }
    return parse_config(doc, path.parent_path());
}

json config_to_json(const ExperimentConfig& cfg) {
    json doc;
    doc["name"] = cfg.name;
    doc["model"] = model_to_json(cfg.model);
    doc["initial_state"] = initial_state_to_json(cfg.initial_state);
    doc["grid"] = {{"t_end", cfg.grid.t_end}, {"dt", cfg.grid.dt}, {"record_stride", cfg.grid.record_stride}};
    doc["trajectories"] = cfg.trajectories;
    doc["seed"] = cfg.seed;
    doc["workers"] = cfg.workers;
    doc["mode"] = to_string(cfg.mode);
    doc["scheme"] = to_string(cfg.scheme);
    doc["blow_up"] = to_string(cfg.blow_up);
    doc["compare_sigma"] = cfg.compare_sigma;
    doc["compare_floor"] = cfg.compare_floor;
    doc["dimension_cap"] = cfg.dimension_cap;

    json req;
    req["sites"] = cfg.requests.sites;
    json pairs = json::array();
    for (const auto& [i, j] : cfg.requests.pairs) {
        pairs.push_back({i, j});
    }
    req["pairs"] = std::move(pairs);
    req["full_state"] = cfg.requests.full_state;
    json obs = json::array();
    for (const auto& o : cfg.requests.observables) {
        obs.push_back({{"name", o.name}, {"site", o.site}, {"op", operator_to_json(o.op)}});
    }
    req["observables"] = std::move(obs);
    json corr = json::array();
    for (const auto& c : cfg.requests.correlations) {
        corr.push_back({{"name", c.name},
                        {"sites", {c.i, c.j}},
                        {"ops", {operator_to_json(c.op_a), operator_to_json(c.op_b)}}});
    }
    req["correlations"] = std::move(corr);
    doc["requests"] = std::move(req);
    return doc;
}

void validate_config(const ExperimentConfig& cfg) {
    require_valid(cfg.model, cfg.initial_state);
    try {
        cfg.grid.check();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (cfg.requests.empty()) {
        throw ConfigError("requests must not be empty");
    }
    if ((cfg.mode == Mode::stochastic || cfg.mode == Mode::compare) && cfg.trajectories < 1) {
        throw ConfigError("at least one trajectory is required");
    }
    if (cfg.workers < 1) {
        throw ConfigError("workers must be at least 1");
    }
    if (!(cfg.compare_sigma > 0.0) || !(cfg.compare_floor >= 0.0)) {
        throw ConfigError("compare_sigma must be positive and compare_floor nonnegative");
    }
    const std::size_t n = cfg.model.site_count();
    auto check_site = [&](std::size_t s) {
        if (s >= n) {
            throw ConfigError("request refers to site " + std::to_string(s) + " but the model has " +
                              std::to_string(n) + " sites");
        }
    };
    std::set<std::size_t> seen_sites;
    for (std::size_t s : cfg.requests.sites) {
        check_site(s);
        if (!seen_sites.insert(s).second) {
            throw ConfigError("site " + std::to_string(s) + " requested twice");
        }
    }
    for (const auto& [i, j] : cfg.requests.pairs) {
        check_site(i);
        check_site(j);
        if (i == j) {
            throw ConfigError("pair request needs two distinct sites");
        }
    }
    for (const auto& o : cfg.requests.observables) {
        check_site(o.site);
        if (o.op.rows() != cfg.model.sites[o.site].dimension || !o.op.is_square()) {
            throw ConfigError("observable '" + o.name + "' does not match its site dimension");
        }
    }
    for (const auto& c : cfg.requests.correlations) {
        check_site(c.i);
        check_site(c.j);
        if (c.i == c.j) {
            throw ConfigError("correlation '" + c.name + "' needs two distinct sites");
        }
        if (c.op_a.rows() != cfg.model.sites[c.i].dimension || c.op_b.rows() != cfg.model.sites[c.j].dimension ||
            !c.op_a.is_square() || !c.op_b.is_square()) {
            throw ConfigError("correlation '" + c.name + "' operators do not match their site dimensions");
        }
    }
    const bool needs_full = cfg.mode == Mode::oracle || cfg.mode == Mode::compare || cfg.requests.full_state;
    if (needs_full && cfg.model.total_dimension() > cfg.dimension_cap) {
        throw DimensionCapExceeded("Hilbert-space dimension " + std::to_string(cfg.model.total_dimension()) +
                                   " exceeds cap " + std::to_string(cfg.dimension_cap));
    }
    if (cfg.mode == Mode::analytic) {
        if (!cfg.requests.pairs.empty() || cfg.requests.full_state || !cfg.requests.correlations.empty()) {
            throw ConfigError("analytic mode supports one-body requests only (sites and observables)");
        }
        try {
            IsingZClosedForm form(cfg.model, cfg.initial_state);
        } catch (const ClosedFormUnavailable& e) {
            throw ConfigError(std::string("analytic mode unavailable: ") + e.what());
        }
    }
}

}  // namespace sdmc
