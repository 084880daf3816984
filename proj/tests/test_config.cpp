#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "sdmc/analytic.hpp"
#include "sdmc/config.hpp"
#include "support.hpp"

using namespace sdmc;
using namespace sdmc::pauli;
using nlohmann::json;

namespace {

const complex I{0.0, 1.0};

json sanity_doc() {
    return json::parse(R"({
        "name": "tiny",
        "model": {
            "hbar": 1.0,
            "sites": {"count": 3, "hamiltonian": "sigma_x"},
            "channels": [{"operator": "sigma_z", "pairs": [[0, 1, 0.05], [1, 2, 0.05]]}]
        },
        "initial_state": ["up", "plus", [[0.5, 0.5], [0.5, 0.5]]],
        "grid": {"t_end": 1.0, "dt": 0.01, "record_stride": 10},
        "trajectories": 64,
        "seed": 5,
        "mode": "compare",
        "scheme": "exponential_euler",
        "requests": {
            "sites": [0, 2],
            "pairs": [[0, 1]],
            "full_state": true,
            "observables": [{"site": 1, "op": "sigma_x"}],
            "correlations": [{"sites": [0, 1], "ops": ["sigma_z", "sigma_z"], "name": "czz"}]
        }
    })");
}

}  // namespace

TEST_SUITE("config") {
    TEST_CASE("operator documents") {
        CHECK(parse_operator("sigma_y") == sigma_y());
        CHECK(parse_operator("identity", 3) == ComplexMatrix::identity(3));
        CHECK(parse_operator("mixed") == states::maximally_mixed(2));
        CHECK(parse_operator("plus") == states::plus());
        CHECK(parse_operator(json::parse("[[1, [0, -1]], [[0, 1], -1]]")) == ComplexMatrix{{1.0, -I}, {I, -1.0}});
        CHECK(parse_operator(json::parse(R"({"scale": 0.5, "op": "sigma_z"})")) == complex(0.5) * sigma_z());
        CHECK(parse_operator(json::parse(R"({"sum": ["sigma_x", {"scale": 2, "op": "sigma_z"}]})")) ==
              sigma_x() + complex(2.0) * sigma_z());
        CHECK(parse_operator(json::parse(R"({"scale": [0, 1], "op": "identity"})")) == I * identity());
        CHECK_THROWS_AS(parse_operator("sigma_q"), ConfigError);
        CHECK_THROWS_AS(parse_operator(json::parse("[[1, 0], [0]]")), ConfigError);
        const auto m = ComplexMatrix{{0.25, complex(0.1, -0.3)}, {complex(0.1, 0.3), 0.75}};
        CHECK(parse_operator(operator_to_json(m)) == m);
    }

    TEST_CASE("full config parses") {
        const auto cfg = parse_config(sanity_doc());
        CHECK(cfg.name == "tiny");
        CHECK(cfg.model.site_count() == 3);
        CHECK(cfg.model.sites[1].local_hamiltonian == sigma_x());
        CHECK(cfg.model.channels.front().lambda(1, 2) == 0.05);
        CHECK(cfg.model.channels.front().lambda(0, 2) == 0.0);
        CHECK(cfg.initial_state.terms.size() == 1);
        CHECK(cfg.initial_state.terms[0].factors[2] == states::plus());
        CHECK(cfg.grid.record_stride == 10);
        CHECK(cfg.trajectories == 64);
        CHECK(cfg.seed == 5);
        CHECK(cfg.mode == Mode::compare);
        CHECK(cfg.scheme == Scheme::exponential_euler);
        CHECK(cfg.requests.sites == std::vector<std::size_t>{0, 2});
        CHECK(cfg.requests.full_state);
        REQUIRE(cfg.requests.observables.size() == 1);
        CHECK(cfg.requests.observables[0].name == "sigma_x@1");
        REQUIRE(cfg.requests.correlations.size() == 1);
        CHECK(cfg.requests.correlations[0].name == "czz");
        CHECK_NOTHROW(validate_config(cfg));
    }

    TEST_CASE("config round trip") {
        const auto cfg = parse_config(sanity_doc());
        const auto doc = config_to_json(cfg);
        const auto again = parse_config(doc);
        CHECK(config_to_json(again) == doc);
        CHECK(again.model.channels.front().constants == cfg.model.channels.front().constants);
        CHECK(again.requests.correlations[0].op_a == sigma_z());
        CHECK(again.initial_state.terms[0].factors == cfg.initial_state.terms[0].factors);
    }

    TEST_CASE("mixture initial states and explicit constants") {
        auto doc = sanity_doc();
        doc["initial_state"] = json::parse(R"({"terms": [
            {"weight": 0.25, "factors": ["up", "up", "down"]},
            {"weight": 0.75, "factors": ["plus", "mixed", "up"]}]})");
        doc["model"]["channels"][0].erase("pairs");
        doc["model"]["channels"][0]["constants"] = json::parse("[[0, 0.1, 0], [0.1, 0, 0.2], [0, 0.2, 0]]");
        const auto cfg = parse_config(doc);
        CHECK(cfg.initial_state.terms.size() == 2);
        CHECK(cfg.initial_state.terms[1].weight == 0.75);
        CHECK(cfg.model.channels.front().lambda(2, 1) == 0.2);
        CHECK_NOTHROW(validate_config(cfg));
    }

    TEST_CASE("model file reference") {
        const auto dir = std::filesystem::temp_directory_path() / "sdmc_config_test";
        std::filesystem::create_directories(dir);
        auto doc = sanity_doc();
        {
            std::ofstream(dir / "model.json") << doc["model"].dump();
        }
        doc["model"] = "model.json";
        {
            std::ofstream(dir / "run.json") << doc.dump();
        }
        const auto cfg = load_config_file(dir / "run.json");
        CHECK(cfg.model.site_count() == 3);
        CHECK_THROWS_AS(load_config_file(dir / "missing.json"), ConfigError);
        {
            std::ofstream(dir / "broken.json") << "{ not json";
        }
        CHECK_THROWS_AS(load_config_file(dir / "broken.json"), ConfigError);
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("invalid configs are rejected") {
        auto doc = sanity_doc();
        doc.erase("grid");
        CHECK_THROWS_AS(parse_config(doc), ConfigError);

        doc = sanity_doc();
        doc["requests"]["observables"][0].erase("site");
        CHECK_THROWS_AS(parse_config(doc), ConfigError);

        doc = sanity_doc();
        doc["requests"]["sites"] = json::array({7});
        CHECK_THROWS_AS(validate_config(parse_config(doc)), ConfigError);

        doc = sanity_doc();
        doc["requests"] = json::object();
        CHECK_THROWS_AS(validate_config(parse_config(doc)), ConfigError);

        doc = sanity_doc();
        doc["trajectories"] = 0;
        CHECK_THROWS_AS(validate_config(parse_config(doc)), ConfigError);

        doc = sanity_doc();
        doc["grid"]["dt"] = 0.3;
        CHECK_THROWS_AS(validate_config(parse_config(doc)), ConfigError);

        doc = sanity_doc();
        doc["mode"] = "psychic";
        CHECK_THROWS_AS(parse_config(doc), ConfigError);

        doc = sanity_doc();
        doc["initial_state"][0] = json::parse("[[0.9, 0], [0, 0]]");
        CHECK_THROWS_AS(validate_config(parse_config(doc)), ValidationError);

        doc = sanity_doc();
        doc["dimension_cap"] = 4;
        CHECK_THROWS_AS(validate_config(parse_config(doc)), DimensionCapExceeded);

        doc = sanity_doc();
        doc["model"]["sites"]["dimension"] = 3;
        CHECK_THROWS(validate_config(parse_config(doc)));

        doc = sanity_doc();
        doc["model"]["channels"][0]["pairs"] = json::parse("[[0, 0, 1.0]]");
        CHECK_THROWS_AS(parse_config(doc), ConfigError);
    }

    TEST_CASE("analytic mode preconditions") {
        auto doc = sanity_doc();
        doc["mode"] = "analytic";
        doc["requests"] = json::parse(R"({"sites": [0]})");
        CHECK_THROWS_AS(validate_config(parse_config(doc)), ConfigError);  // σx field does not commute with σz
        doc["model"]["sites"]["hamiltonian"] = "sigma_z";
        CHECK_NOTHROW(validate_config(parse_config(doc)));
        doc["requests"]["pairs"] = json::parse("[[0, 1]]");
        CHECK_THROWS_AS(validate_config(parse_config(doc)), ConfigError);
    }

    TEST_CASE("enum names") {
        for (Mode m : {Mode::stochastic, Mode::oracle, Mode::analytic, Mode::compare}) CHECK(parse_mode(to_string(m)) == m);
        for (Scheme s : {Scheme::euler_maruyama, Scheme::exponential_euler}) CHECK(parse_scheme(to_string(s)) == s);
        for (BlowUpPolicy p : {BlowUpPolicy::abort, BlowUpPolicy::discard}) CHECK(parse_blow_up(to_string(p)) == p);
        CHECK_THROWS_AS(parse_scheme("rk4"), ConfigError);
    }
}
