#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "ranplan/errors.hpp"

namespace ranplan {

enum class SlotKind : char { Downlink = 'D', Special = 'S', Uplink = 'U' };

inline double slot_duration_s(int numerology) {
    if (numerology < 0 || numerology > 3) throw ConfigError("numerology must be in [0, 3]");
    return 1e-3 / static_cast<double>(1 << numerology);
}

struct CarrierConfig {
    double bandwidth_hz = 100e6;
    int numerology = 1;  // 30 kHz SCS
    int n_prb = 273;
    std::string band = "n78";

    // Max transmission bandwidth (38.101-1 Table 5.3.2-1), keyed by
    // (numerology, bandwidth MHz).
    static const std::map<std::pair<int, int>, int>& prb_table() {
        static const std::map<std::pair<int, int>, int> table = {
            {{0, 5}, 25},   {{0, 10}, 52},  {{0, 15}, 79},  {{0, 20}, 106}, {{0, 25}, 133},
            {{0, 30}, 160}, {{0, 40}, 216}, {{0, 50}, 270}, {{1, 10}, 24},  {{1, 15}, 38},
            {{1, 20}, 51},  {{1, 25}, 65},  {{1, 30}, 78},  {{1, 40}, 106}, {{1, 50}, 133},
            {{1, 60}, 162}, {{1, 70}, 189}, {{1, 80}, 217}, {{1, 90}, 245}, {{1, 100}, 273},
            {{2, 50}, 66},  {{2, 100}, 135}};
        return table;
    }

    void validate() const {
        slot_duration_s(numerology);  // range check
        if (n_prb < 1) throw ConfigError("n_prb must be >= 1");
        const int bw_mhz = static_cast<int>(std::lround(bandwidth_hz / 1e6));
        const auto it = prb_table().find({numerology, bw_mhz});
        if (it != prb_table().end() && it->second != n_prb)
            throw ConfigError("n_prb " + std::to_string(n_prb) + " inconsistent with " +
                              std::to_string(bw_mhz) + " MHz at numerology " +
                              std::to_string(numerology) + " (expected " +
                              std::to_string(it->second) + ")");
    }
};

struct TddPattern {
    std::vector<SlotKind> slots = {SlotKind::Downlink, SlotKind::Downlink, SlotKind::Downlink,
                                   SlotKind::Special, SlotKind::Uplink};
    double period_ms = 2.5;
    bool special_usable = false;

    SlotKind kind_at(long absolute_slot) const {
        return slots[static_cast<std::size_t>(absolute_slot) % slots.size()];
    }

    void validate(int numerology) const {
        if (slots.empty()) throw ConfigError("TDD pattern must not be empty");
        const double expect_ms =
            static_cast<double>(slots.size()) * slot_duration_s(numerology) * 1e3;
        if (std::abs(expect_ms - period_ms) > 1e-9)
            throw ConfigError("TDD period " + std::to_string(period_ms) +
                              " ms inconsistent with " + std::to_string(slots.size()) +
                              " slots at numerology " + std::to_string(numerology));
    }
};

inline TddPattern parse_tdd_pattern(const std::string& text, double period_ms,
                                    bool special_usable = false) {
    TddPattern p;
    p.slots.clear();
    for (char c : text) {
        switch (c) {
            case 'D': p.slots.push_back(SlotKind::Downlink); break;
            case 'S': p.slots.push_back(SlotKind::Special); break;
            case 'U': p.slots.push_back(SlotKind::Uplink); break;
            default: throw ConfigError(std::string("bad TDD pattern symbol '") + c + "'");
        }
    }
    p.period_ms = period_ms;
    p.special_usable = special_usable;
    return p;
}

inline int slots_in_period(const TddPattern& pattern, SlotKind kind) {
    int count = 0;
    for (SlotKind k : pattern.slots)
        if (k == kind) ++count;
    return count;
}

struct LinkConfig {
    int layers_dl = 2;
    int layers_ul = 1;
    int modulation_order = 6;          // bits/symbol (64-QAM)
    double code_rate = 948.0 / 1024.0;
    double overhead_dl = 0.14;
    double overhead_ul = 0.08;

    void validate() const {
        if (layers_dl < 1 || layers_dl > 4 || layers_ul < 1 || layers_ul > 4)
            throw ConfigError("layer counts must be in [1, 4]");
        if (!(code_rate > 0.0 && code_rate < 1.0)) throw ConfigError("code rate must be in (0, 1)");
        if (overhead_dl < 0.0 || overhead_dl >= 1.0 || overhead_ul < 0.0 || overhead_ul >= 1.0)
            throw ConfigError("overheads must be in [0, 1)");
        if (modulation_order < 1) throw ConfigError("modulation order must be >= 1");
    }
};

// Per-UE HARQ feedback budget: with 2 ACK/NACK bits a UE can be scheduled in
// at most 2 DL slots per TDD period.
struct HarqConstraint {
    int ack_bits_per_ue = 2;

    int max_dl_slots_per_ue(int dl_slots_in_period) const {
        return std::min(ack_bits_per_ue, dl_slots_in_period);
    }
};

struct CellRates {
    double dl_bps = 0.0;
    double ul_bps = 0.0;
    double dl_bits_per_slot = 0.0;
    double ul_bits_per_slot = 0.0;
};

namespace detail {

inline double bits_per_slot(const CarrierConfig& carrier, int layers, int modulation_order,
                            double code_rate, double overhead) {
    const double res = static_cast<double>(carrier.n_prb) * 12.0 * 14.0 * (1.0 - overhead);
    return static_cast<double>(layers) * static_cast<double>(modulation_order) * code_rate * res;
}

}  // namespace detail

// Theoretical cell throughput for the carrier/pattern/link configuration.
// The special slot counts as DL-eligible only when the pattern marks it
// usable; by default it contributes nothing.
inline CellRates peak_rate(const CarrierConfig& carrier, const TddPattern& pattern,
                           const LinkConfig& link) {
    carrier.validate();
    link.validate();
    pattern.validate(carrier.numerology);

    CellRates rates;
    rates.dl_bits_per_slot = detail::bits_per_slot(carrier, link.layers_dl,
                                                   link.modulation_order, link.code_rate,
                                                   link.overhead_dl);
    rates.ul_bits_per_slot = detail::bits_per_slot(carrier, link.layers_ul,
                                                   link.modulation_order, link.code_rate,
                                                   link.overhead_ul);
    int dl_slots = slots_in_period(pattern, SlotKind::Downlink);
    const int ul_slots = slots_in_period(pattern, SlotKind::Uplink);
    if (pattern.special_usable) dl_slots += slots_in_period(pattern, SlotKind::Special);

    const double period_s = pattern.period_ms * 1e-3;
    rates.dl_bps = rates.dl_bits_per_slot * dl_slots / period_s;
    rates.ul_bps = rates.ul_bits_per_slot * ul_slots / period_s;
    return rates;
}

// Single-user DL ceiling: the HARQ feedback bits cap how many of the period's
// DL slots one UE can use.
inline double per_ue_cap_bps(double cell_dl_bps, const TddPattern& pattern,
                             const HarqConstraint& harq) {
    int dl_slots = slots_in_period(pattern, SlotKind::Downlink);
    if (pattern.special_usable) dl_slots += slots_in_period(pattern, SlotKind::Special);
    if (dl_slots < 1) throw ConfigError("pattern has no DL slot");
    return cell_dl_bps * static_cast<double>(harq.max_dl_slots_per_ue(dl_slots)) /
           static_cast<double>(dl_slots);
}

inline double aggregate_vs_single(int ue_count, double cell_dl_bps, double per_ue_bps) {
    if (ue_count < 1) throw ConfigError("ue_count must be >= 1");
    return std::min(static_cast<double>(ue_count) * per_ue_bps, cell_dl_bps);
}

inline void print_capacity_summary(const CarrierConfig& carrier, const TddPattern& pattern,
                                   const LinkConfig& link, const HarqConstraint& harq,
                                   std::ostream& out, bool machine = false) {
    const CellRates rates = peak_rate(carrier, pattern, link);
    const double per_ue = per_ue_cap_bps(rates.dl_bps, pattern, harq);
    std::string pattern_str;
    for (SlotKind k : pattern.slots) pattern_str += static_cast<char>(k);

    char buf[128];
    if (machine) {
        std::snprintf(buf, sizeof(buf), "dl_cell_bps=%.6f\n", rates.dl_bps);
        out << buf;
        std::snprintf(buf, sizeof(buf), "ul_cell_bps=%.6f\n", rates.ul_bps);
        out << buf;
        std::snprintf(buf, sizeof(buf), "dl_per_ue_bps=%.6f\n", per_ue);
        out << buf;
        std::snprintf(buf, sizeof(buf), "dl_bits_per_slot=%.6f\n", rates.dl_bits_per_slot);
        out << buf;
        std::snprintf(buf, sizeof(buf), "ul_bits_per_slot=%.6f\n", rates.ul_bits_per_slot);
        out << buf;
        return;
    }
    out << "Carrier                      " << carrier.bandwidth_hz / 1e6 << " MHz, "
        << (15 << carrier.numerology) << " kHz SCS, " << carrier.n_prb << " PRB, band "
        << carrier.band << "\n";
    out << "TDD pattern                  " << pattern_str << " over " << pattern.period_ms
        << " ms" << (pattern.special_usable ? "" : " (special slot unused)") << "\n";
    out << "MIMO layers                  " << link.layers_dl << " DL, " << link.layers_ul
        << " UL\n";
    std::snprintf(buf, sizeof(buf), "Max cell throughput          %.1f Mbps DL, %.2f Mbps UL\n",
                  rates.dl_bps / 1e6, rates.ul_bps / 1e6);
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "Single-user DL cap           %.2f Mbps (%d ACK/NACK bits per UE)\n",
                  per_ue / 1e6, harq.ack_bits_per_ue);
    out << buf;
}

}  // namespace ranplan
