#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "ranplan/scenario.hpp"

using namespace ranplan;

TEST_CASE("scenario defaults reproduce the reference deployment") {
    const Scenario s = Scenario::defaults();
    CHECK(s.resolve_ru_points().size() == 24);
    CHECK(s.resolve_ue_points().size() == 52);
    for (const auto& p : s.resolve_ru_points()) CHECK(p.z == Catch::Approx(2.2));
    for (const auto& p : s.resolve_ue_points()) CHECK(p.z == Catch::Approx(0.8));

    CHECK(s.ru_config.tx_power_dbm == 24.0);
    CHECK(s.ru_config.antenna_gain_dbi == 5.0);
    CHECK(s.ue_config.antenna_gain_dbi == 1.1);
    CHECK(s.ue_config.noise_figure_db == 5.0);
    CHECK(s.trace.carrier_frequency_hz == 3.75e9);
    CHECK(s.trace.max_reflections == 3);
    CHECK(s.trace.max_diffraction_order == 1);
    CHECK(s.attenuation_sweep_db == std::vector<double>{0, 10, 20, 30, 40, 50});
    CHECK(s.carrier.n_prb == 273);
    CHECK(s.carrier.numerology == 1);
    CHECK(s.tdd.slots.size() == 5);
    CHECK(s.link.layers_dl == 2);
    CHECK(s.harq.ack_bits_per_ue == 2);
}

TEST_CASE("scenario json parsing") {
    SECTION("overrides land in the right places") {
        const auto j = nlohmann::json::parse(R"({
            "ru": {"points": [[0, 0, 2.2], [4, 0, 2.2]]},
            "ue": {"grid": {"origin": [0, 0, 0], "rows": 2, "cols": 2,
                              "row_step_m": 1.0, "col_step_m": 1.0, "height_m": 1.5}},
            "ru_config": {"tx_attenuation_db": 20},
            "trace": {"combine_mode": "power", "max_reflections": 2},
            "attenuation_sweep_db": [0, 20, 40],
            "sim": {"ue_count": 4, "n_slots": 500, "traffic": "random", "seed": 7}
        })");
        const Scenario s = scenario_from_json(j);
        CHECK(s.resolve_ru_points().size() == 2);
        CHECK(s.resolve_ue_points().size() == 4);
        CHECK(s.resolve_ue_points()[0].z == Catch::Approx(1.5));
        CHECK(s.ru_config.tx_attenuation_db == 20.0);
        CHECK(s.trace.combine_mode == CombineMode::PowerSum);
        CHECK(s.trace.max_reflections == 2);
        CHECK(s.attenuation_sweep_db == std::vector<double>{0, 20, 40});
        CHECK(s.sim.ue_count == 4);
        CHECK(s.sim.n_slots == 500);
        CHECK(s.sim.traffic.kind == TrafficKind::Random);
        CHECK(s.sim.seed == 7);
    }

    SECTION("score options") {
        const auto j = nlohmann::json::parse(
            R"({"score": {"floor_db": -40, "linear_mean": true}})");
        const Scenario s = scenario_from_json(j);
        CHECK(s.score.floor_db == -40.0);
        CHECK(s.score.linear_mean);
    }

    SECTION("per-slot capacities come from the capacity model") {
        const Scenario s = scenario_from_json(nlohmann::json::object());
        CHECK(s.sim.dl_bits_per_slot == Catch::Approx(oracle::kRefDlBitsPerSlot).epsilon(1e-9));
        CHECK(s.sim.ul_bits_per_slot == Catch::Approx(oracle::kRefUlBitsPerSlot).epsilon(1e-9));
    }

    SECTION("bad enum values are parse errors") {
        CHECK_THROWS_AS(
            scenario_from_json(nlohmann::json::parse(R"({"trace": {"combine_mode": "x"}})")),
            ParseError);
        CHECK_THROWS_AS(
            scenario_from_json(nlohmann::json::parse(R"({"sim": {"traffic": "bursty"}})")),
            ParseError);
    }

    SECTION("invariant violations are config errors") {
        CHECK_THROWS_AS(
            scenario_from_json(
                nlohmann::json::parse(R"({"ru_config": {"tx_attenuation_db": 99}})")),
            ConfigError);
        CHECK_THROWS_AS(
            scenario_from_json(nlohmann::json::parse(R"({"carrier": {"n_prb": 270}})")),
            ConfigError);
    }
}

TEST_CASE("scenario files resolve scene paths relative to themselves") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "ranplan_scenario_test";
    fs::create_directories(dir);

    {
        std::ofstream scene(dir / "room.scene");
        scene << "scene v1\nmaterial wood 1.99 0.012\n"
              << "facet wood 0 0 0  4 0 0  4 4 0  0 4 0\n";
    }
    {
        std::ofstream scenario(dir / "test.json");
        scenario << R"({"scene": "room.scene"})";
    }

    const Scenario s = load_scenario((dir / "test.json").string());
    const Scene scene = s.load_scene_or_free_space();
    CHECK(scene.facets.size() == 1);

    CHECK_THROWS_AS(load_scenario((dir / "missing.json").string()), ParseError);

    {
        std::ofstream bad(dir / "bad.json");
        bad << "{not json";
    }
    CHECK_THROWS_AS(load_scenario((dir / "bad.json").string()), ParseError);

    fs::remove_all(dir);
}
