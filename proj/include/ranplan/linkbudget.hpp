#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <vector>

#include "ranplan/errors.hpp"
#include "ranplan/raytrace.hpp"

namespace ranplan {

constexpr double kBoltzmann = 1.380649e-23;

// Radio-unit transmit chain. Antenna spacing is informational only; the link
// budget is scalar single-antenna.
struct RuConfig {
    double tx_power_dbm = 24.0;
    double antenna_gain_dbi = 5.0;
    double tx_attenuation_db = 0.0;  // in [0, 50]
    double antenna_spacing_m = 0.25;
    double height_m = 2.2;

    void validate() const {
        if (tx_attenuation_db < 0.0 || tx_attenuation_db > 50.0)
            throw ConfigError("RU tx attenuation must be in [0, 50] dB");
        if (!std::isfinite(tx_power_dbm)) throw ConfigError("RU tx power must be finite");
    }
};

struct UeConfig {
    double antenna_gain_dbi = 1.1;
    double noise_figure_db = 5.0;
    double antenna_spacing_m = 0.07;
    double height_m = 0.8;

    void validate() const {
        if (noise_figure_db < 0.0) throw ConfigError("UE noise figure must be >= 0 dB");
    }
};

struct NoiseModel {
    double bandwidth_hz = 100e6;
    double temperature_k = 290.0;

    double thermal_noise_dbm() const {
        return 10.0 * std::log10(kBoltzmann * temperature_k * bandwidth_hz * 1e3);
    }

    void validate() const {
        if (!(bandwidth_hz > 0.0)) throw ConfigError("noise bandwidth must be > 0");
        if (!(temperature_k > 0.0)) throw ConfigError("noise temperature must be > 0");
    }
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double lin) {
    if (lin <= 0.0) return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(lin);
}

inline double dbm_to_mw(double dbm) {
    if (std::isinf(dbm) && dbm < 0.0) return 0.0;
    return std::pow(10.0, dbm / 10.0);
}

// Received signal strength: R = P_RU + G_RU - A_RU - PL + G_UE.
// A fully blocked link (PL = +inf) maps to -inf.
inline double rssi_dbm(const RuConfig& ru, const UeConfig& ue, double path_loss_db) {
    if (std::isinf(path_loss_db) && path_loss_db > 0.0)
        return -std::numeric_limits<double>::infinity();
    return ru.tx_power_dbm + ru.antenna_gain_dbi - ru.tx_attenuation_db - path_loss_db +
           ue.antenna_gain_dbi;
}

inline double noise_power_dbm(const NoiseModel& model) {
    model.validate();
    return model.thermal_noise_dbm();
}

// Dense RSSI grid in dBm with a linear (mW) mirror kept in lockstep.
struct RssiMatrix {
    int ru_count = 0;
    int ue_count = 0;
    std::vector<double> dbm;        // row-major, ru-major
    std::vector<double> linear_mw;  // 10^(dbm/10)

    double at_dbm(int i, int j) const {
        return dbm[static_cast<std::size_t>(i) * static_cast<std::size_t>(ue_count) +
                   static_cast<std::size_t>(j)];
    }
    double at_mw(int i, int j) const {
        return linear_mw[static_cast<std::size_t>(i) * static_cast<std::size_t>(ue_count) +
                         static_cast<std::size_t>(j)];
    }
    void set(int i, int j, double value_dbm) {
        const std::size_t idx = static_cast<std::size_t>(i) * static_cast<std::size_t>(ue_count) +
                                static_cast<std::size_t>(j);
        dbm[idx] = value_dbm;
        linear_mw[idx] = dbm_to_mw(value_dbm);
    }
};

inline RssiMatrix build_rssi_matrix(const ChannelMatrix& channel,
                                    const std::vector<RuConfig>& rus, const UeConfig& ue) {
    if (static_cast<int>(rus.size()) != channel.tx_count)
        throw ConfigError("RU config count (" + std::to_string(rus.size()) +
                          ") does not match channel tx dimension (" +
                          std::to_string(channel.tx_count) + ")");
    for (const auto& ru : rus) ru.validate();
    ue.validate();

    RssiMatrix m;
    m.ru_count = channel.tx_count;
    m.ue_count = channel.rx_count;
    m.dbm.resize(static_cast<std::size_t>(m.ru_count) * static_cast<std::size_t>(m.ue_count));
    m.linear_mw.resize(m.dbm.size());
    for (int i = 0; i < m.ru_count; ++i)
        for (int j = 0; j < m.ue_count; ++j)
            m.set(i, j, rssi_dbm(rus[static_cast<std::size_t>(i)], ue,
                                 channel.at(i, j).path_loss_db));
    return m;
}

// SINR of UE j served by RU i with every other deployed RU treated as
// interference (linear-domain ratio, returned in dB).
inline double sinr_db(int ue_index, int serving_ru, const std::vector<int>& deployed,
                      const RssiMatrix& rssi, const NoiseModel& noise, const UeConfig& ue) {
    bool found = false;
    for (int u : deployed)
        if (u == serving_ru) found = true;
    if (!found) throw ConfigError("serving RU not in deployed set");

    const double noise_mw =
        dbm_to_mw(noise.thermal_noise_dbm()) * db_to_linear(ue.noise_figure_db);
    double denom = noise_mw;
    for (int u : deployed)
        if (u != serving_ru) denom += rssi.at_mw(u, ue_index);
    const double signal = rssi.at_mw(serving_ru, ue_index);
    return linear_to_db(signal / denom);
}

inline void export_rssi_csv(const RssiMatrix& m, std::ostream& out) {
    out << "tx_index,rx_index,rssi_dbm\n";
    char buf[64];
    for (int i = 0; i < m.ru_count; ++i)
        for (int j = 0; j < m.ue_count; ++j) {
            const double v = m.at_dbm(i, j);
            if (std::isinf(v))
                std::snprintf(buf, sizeof(buf), v < 0 ? "-inf" : "inf");
            else
                std::snprintf(buf, sizeof(buf), "%.9g", v);
            out << i << "," << j << "," << buf << "\n";
        }
}

}  // namespace ranplan
