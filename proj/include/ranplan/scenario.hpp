#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ranplan/capacity.hpp"
#include "ranplan/errors.hpp"
#include "ranplan/linkbudget.hpp"
#include "ranplan/placement.hpp"
#include "ranplan/raytrace.hpp"
#include "ranplan/scene.hpp"
#include "ranplan/slotsim.hpp"

namespace ranplan {

// One scenario document binds every knob of the planning, capacity and
// simulation pipelines. Defaults reproduce the reference indoor deployment:
// 24 RU candidates on a 2x12 grid at 2.2 m, 52 UE test points on a 4x13 grid
// at 0.8 m, 3.75 GHz / 100 MHz TDD carrier with a DDDSU pattern.
struct Scenario {
    std::string scene_path;  // empty -> free space
    std::optional<GridSpec> ru_grid;
    std::vector<Vec3> ru_points;  // used when no grid given
    std::optional<GridSpec> ue_grid;
    std::vector<Vec3> ue_points;

    RuConfig ru_config;
    UeConfig ue_config;
    NoiseModel noise;
    TraceConfig trace;
    std::vector<double> attenuation_sweep_db = {0, 10, 20, 30, 40, 50};
    ScoreOptions score;

    CarrierConfig carrier;
    TddPattern tdd;
    LinkConfig link;
    HarqConstraint harq;
    SimConfig sim;

    static Scenario defaults() {
        Scenario s;
        s.ru_grid = GridSpec{{1.0, 2.0, 0.0}, 2, 12, 4.0, 0.8, 2.2};
        s.ue_grid = GridSpec{{0.5, 1.0, 0.0}, 4, 13, 1.6, 0.75, 0.8};
        s.sim.pattern = s.tdd;
        return s;
    }

    std::vector<Vec3> resolve_ru_points() const {
        if (ru_grid) return generate_grid(*ru_grid);
        if (ru_points.empty()) throw ConfigError("scenario has neither RU grid nor RU points");
        return ru_points;
    }

    std::vector<Vec3> resolve_ue_points() const {
        if (ue_grid) return generate_grid(*ue_grid);
        if (ue_points.empty()) throw ConfigError("scenario has neither UE grid nor UE points");
        return ue_points;
    }

    Scene load_scene_or_free_space() const {
        if (scene_path.empty()) return Scene{};
        return load_scene(scene_path);
    }
};

namespace detail {

using nlohmann::json;

inline Vec3 vec3_from(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 3)
        throw ParseError(what + " must be an array of 3 numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline GridSpec grid_from(const json& j) {
    GridSpec g;
    if (j.contains("origin")) g.origin = vec3_from(j.at("origin"), "grid origin");
    g.rows = j.value("rows", g.rows);
    g.cols = j.value("cols", g.cols);
    g.row_step_m = j.value("row_step_m", g.row_step_m);
    g.col_step_m = j.value("col_step_m", g.col_step_m);
    g.height_m = j.value("height_m", g.height_m);
    g.validate();
    return g;
}

inline std::vector<Vec3> points_from(const json& j, const std::string& what) {
    std::vector<Vec3> pts;
    for (const auto& p : j) pts.push_back(vec3_from(p, what));
    return pts;
}

}  // namespace detail

inline Scenario scenario_from_json(const nlohmann::json& j,
                                   const std::string& base_dir = "") {
    using detail::grid_from;
    using detail::points_from;
    Scenario s = Scenario::defaults();

    if (j.contains("scene") && !j.at("scene").is_null()) {
        s.scene_path = j.at("scene").get<std::string>();
        if (!base_dir.empty() && !s.scene_path.empty() && s.scene_path.front() != '/')
            s.scene_path = base_dir + "/" + s.scene_path;
    }

    if (j.contains("ru")) {
        const auto& ru = j.at("ru");
        if (ru.contains("grid")) {
            s.ru_grid = grid_from(ru.at("grid"));
        } else if (ru.contains("points")) {
            s.ru_grid.reset();
            s.ru_points = points_from(ru.at("points"), "ru point");
        }
    }
    if (j.contains("ue")) {
        const auto& ue = j.at("ue");
        if (ue.contains("grid")) {
            s.ue_grid = grid_from(ue.at("grid"));
        } else if (ue.contains("points")) {
            s.ue_grid.reset();
            s.ue_points = points_from(ue.at("points"), "ue point");
        }
    }

    if (j.contains("ru_config")) {
        const auto& c = j.at("ru_config");
        s.ru_config.tx_power_dbm = c.value("tx_power_dbm", s.ru_config.tx_power_dbm);
        s.ru_config.antenna_gain_dbi = c.value("antenna_gain_dbi", s.ru_config.antenna_gain_dbi);
        s.ru_config.tx_attenuation_db =
            c.value("tx_attenuation_db", s.ru_config.tx_attenuation_db);
        s.ru_config.antenna_spacing_m =
            c.value("antenna_spacing_m", s.ru_config.antenna_spacing_m);
        s.ru_config.height_m = c.value("height_m", s.ru_config.height_m);
        s.ru_config.validate();
    }
    if (j.contains("ue_config")) {
        const auto& c = j.at("ue_config");
        s.ue_config.antenna_gain_dbi = c.value("antenna_gain_dbi", s.ue_config.antenna_gain_dbi);
        s.ue_config.noise_figure_db = c.value("noise_figure_db", s.ue_config.noise_figure_db);
        s.ue_config.antenna_spacing_m =
            c.value("antenna_spacing_m", s.ue_config.antenna_spacing_m);
        s.ue_config.height_m = c.value("height_m", s.ue_config.height_m);
        s.ue_config.validate();
    }
    if (j.contains("noise")) {
        const auto& c = j.at("noise");
        s.noise.bandwidth_hz = c.value("bandwidth_hz", s.noise.bandwidth_hz);
        s.noise.temperature_k = c.value("temperature_k", s.noise.temperature_k);
        s.noise.validate();
    }
    if (j.contains("trace")) {
        const auto& c = j.at("trace");
        s.trace.max_reflections = c.value("max_reflections", s.trace.max_reflections);
        s.trace.max_diffraction_order =
            c.value("max_diffraction_order", s.trace.max_diffraction_order);
        s.trace.carrier_frequency_hz =
            c.value("carrier_frequency_hz", s.trace.carrier_frequency_hz);
        if (c.contains("combine_mode")) {
            const std::string mode = c.at("combine_mode").get<std::string>();
            if (mode == "coherent")
                s.trace.combine_mode = CombineMode::Coherent;
            else if (mode == "power")
                s.trace.combine_mode = CombineMode::PowerSum;
            else
                throw ParseError("combine_mode must be 'coherent' or 'power'");
        }
        if (c.contains("polarization")) {
            const std::string pol = c.at("polarization").get<std::string>();
            if (pol == "te")
                s.trace.polarization = Polarization::TE;
            else if (pol == "tm")
                s.trace.polarization = Polarization::TM;
            else
                throw ParseError("polarization must be 'te' or 'tm'");
        }
        s.trace.validate();
    }
    if (j.contains("attenuation_sweep_db")) {
        s.attenuation_sweep_db.clear();
        for (const auto& v : j.at("attenuation_sweep_db"))
            s.attenuation_sweep_db.push_back(v.get<double>());
    }
    if (j.contains("score")) {
        const auto& c = j.at("score");
        s.score.floor_db = c.value("floor_db", s.score.floor_db);
        s.score.linear_mean = c.value("linear_mean", s.score.linear_mean);
    }

    if (j.contains("carrier")) {
        const auto& c = j.at("carrier");
        s.carrier.bandwidth_hz = c.value("bandwidth_hz", s.carrier.bandwidth_hz);
        s.carrier.numerology = c.value("numerology", s.carrier.numerology);
        s.carrier.n_prb = c.value("n_prb", s.carrier.n_prb);
        s.carrier.band = c.value("band", s.carrier.band);
        s.carrier.validate();
    }
    if (j.contains("tdd")) {
        const auto& c = j.at("tdd");
        s.tdd = parse_tdd_pattern(c.value("pattern", std::string("DDDSU")),
                                  c.value("period_ms", 2.5),
                                  c.value("special_usable", false));
        s.tdd.validate(s.carrier.numerology);
    }
    if (j.contains("link")) {
        const auto& c = j.at("link");
        s.link.layers_dl = c.value("layers_dl", s.link.layers_dl);
        s.link.layers_ul = c.value("layers_ul", s.link.layers_ul);
        s.link.modulation_order = c.value("modulation_order", s.link.modulation_order);
        s.link.code_rate = c.value("code_rate", s.link.code_rate);
        s.link.overhead_dl = c.value("overhead_dl", s.link.overhead_dl);
        s.link.overhead_ul = c.value("overhead_ul", s.link.overhead_ul);
        s.link.validate();
    }
    if (j.contains("harq"))
        s.harq.ack_bits_per_ue = j.at("harq").value("ack_bits_per_ue", s.harq.ack_bits_per_ue);

    s.sim.numerology = s.carrier.numerology;
    s.sim.pattern = s.tdd;
    s.sim.harq = s.harq;
    if (j.contains("sim")) {
        const auto& c = j.at("sim");
        s.sim.ue_count = c.value("ue_count", s.sim.ue_count);
        s.sim.n_slots = c.value<long>("n_slots", s.sim.n_slots);
        s.sim.l2_latency_s = c.value("l2_latency_us", 100.0) * 1e-6;
        s.sim.seed = c.value<std::uint64_t>("seed", s.sim.seed);
        s.sim.deadline_budget_s = c.value("deadline_budget_us", 0.0) * 1e-6;
        s.sim.uci_feedback_delay_slots =
            c.value("uci_feedback_delay_slots", s.sim.uci_feedback_delay_slots);
        if (c.contains("traffic")) {
            const std::string t = c.at("traffic").get<std::string>();
            if (t == "full_buffer")
                s.sim.traffic.kind = TrafficKind::FullBuffer;
            else if (t == "random")
                s.sim.traffic.kind = TrafficKind::Random;
            else
                throw ParseError("traffic must be 'full_buffer' or 'random'");
        }
        s.sim.traffic.dl_arrival_probability =
            c.value("dl_arrival_probability", s.sim.traffic.dl_arrival_probability);
        s.sim.traffic.ul_arrival_probability =
            c.value("ul_arrival_probability", s.sim.traffic.ul_arrival_probability);
        s.sim.traffic.dl_burst_bits =
            c.value<std::uint64_t>("dl_burst_bits", s.sim.traffic.dl_burst_bits);
        s.sim.traffic.ul_burst_bits =
            c.value<std::uint64_t>("ul_burst_bits", s.sim.traffic.ul_burst_bits);
        if (c.contains("injections")) {
            for (const auto& inj : c.at("injections")) {
                InjectedIndication ind;
                ind.slot_index = inj.at("slot").get<long>();
                const std::string kind = inj.at("kind").get<std::string>();
                if (kind == "rach")
                    ind.kind = FapiMsgKind::RachIndication;
                else if (kind == "srs")
                    ind.kind = FapiMsgKind::SrsIndication;
                else
                    throw ParseError("injection kind must be 'rach' or 'srs'");
                ind.ue_id = inj.value<std::uint16_t>("ue", 0);
                s.sim.injections.push_back(ind);
            }
        }
    }

    // Per-slot capacities follow from the carrier/link configuration.
    const CellRates rates = peak_rate(s.carrier, s.tdd, s.link);
    s.sim.dl_bits_per_slot = rates.dl_bits_per_slot;
    s.sim.ul_bits_per_slot = rates.ul_bits_per_slot;
    return s;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    std::string base_dir;
    const auto slash = path.find_last_of('/');
    if (slash != std::string::npos) base_dir = path.substr(0, slash);
    try {
        return scenario_from_json(j, base_dir);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

}  // namespace ranplan
