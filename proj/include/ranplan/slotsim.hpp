#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ranplan/capacity.hpp"
#include "ranplan/errors.hpp"
#include "ranplan/fapi.hpp"

namespace ranplan {

// Deterministic slot clock: slot wraps into sfn, sfn wraps at 1024.
struct SlotClock {
    int numerology = 1;
    std::uint16_t sfn = 0;
    std::uint16_t slot = 0;

    int slots_per_frame() const { return 10 * (1 << numerology); }
    double tick_s() const { return slot_duration_s(numerology); }

    void advance() {
        if (++slot == slots_per_frame()) {
            slot = 0;
            sfn = static_cast<std::uint16_t>((sfn + 1) % 1024);
        }
    }
};

inline FapiMessage l1_tick(const SlotClock& clock) {
    FapiMessage msg;
    msg.kind = FapiMsgKind::SlotIndication;
    msg.sfn = clock.sfn;
    msg.slot = clock.slot;
    return msg;
}

// L1 control-plane state machine. Configuration procedures must run in the
// fixed PARAM -> CONFIG -> START order; anything else halts with an
// ERROR.indication.
class L1ControlFsm {
  public:
    enum class State { Idle, ParamsExchanged, Configured, Running, Halted };

    std::optional<FapiMessage> on_control(const FapiMessage& msg) {
        switch (msg.kind) {
            case FapiMsgKind::ParamRequest:
                if (state_ == State::Idle) {
                    state_ = State::ParamsExchanged;
                    return reply(FapiMsgKind::ParamResponse);
                }
                break;
            case FapiMsgKind::ConfigRequest:
                if (state_ == State::ParamsExchanged) {
                    state_ = State::Configured;
                    return reply(FapiMsgKind::ConfigResponse);
                }
                break;
            case FapiMsgKind::StartRequest:
                if (state_ == State::Configured) {
                    state_ = State::Running;
                    return std::nullopt;  // slot indications begin
                }
                break;
            case FapiMsgKind::StopRequest:
                if (state_ == State::Running) {
                    state_ = State::Halted;
                    return std::nullopt;
                }
                break;
            default:
                break;
        }
        state_ = State::Halted;
        FapiMessage err;
        err.kind = FapiMsgKind::ErrorIndication;
        err.error_msg_id = static_cast<std::uint16_t>(msg.kind);
        err.error_code = 1;  // out-of-sequence
        return err;
    }

    State state() const { return state_; }

  private:
    static FapiMessage reply(FapiMsgKind kind) {
        FapiMessage msg;
        msg.kind = kind;
        return msg;
    }

    State state_ = State::Idle;
};

struct UeContext {
    int ue_id = 0;
    std::uint64_t dl_backlog_bits = 0;
    std::uint64_t ul_backlog_bits = 0;
    int dl_slots_used_this_period = 0;
    int pending_ack_count = 0;
    std::uint64_t delivered_dl_bits = 0;
    std::uint64_t delivered_ul_bits = 0;
};

enum class TrafficKind { FullBuffer, Random };

struct TrafficModel {
    TrafficKind kind = TrafficKind::FullBuffer;
    // Random model: independent Bernoulli burst arrivals per UE per slot.
    double dl_arrival_probability = 0.3;
    double ul_arrival_probability = 0.3;
    std::uint64_t dl_burst_bits = 500000;
    std::uint64_t ul_burst_bits = 100000;
};

// Scenario-scripted L1 events (e.g. a UE performing random access).
struct InjectedIndication {
    long slot_index = 0;
    FapiMsgKind kind = FapiMsgKind::RachIndication;  // Rach or Srs
    std::uint16_t ue_id = 0;
};

struct SimConfig {
    int numerology = 1;
    TddPattern pattern;
    int ue_count = 1;
    TrafficModel traffic;
    long n_slots = 10000;
    double l2_latency_s = 100e-6;
    double dl_bits_per_slot = 0.0;  // per-slot capacity, from the capacity module
    double ul_bits_per_slot = 0.0;
    HarqConstraint harq;
    std::uint64_t seed = 1;
    double deadline_budget_s = 0.0;   // 0 -> one slot duration
    int uci_feedback_delay_slots = 0; // 0 -> acks aggregate on the period's U slot
    std::vector<InjectedIndication> injections;

    void validate() const {
        slot_duration_s(numerology);
        pattern.validate(numerology);
        if (n_slots < 1) throw ConfigError("n_slots must be >= 1");
        if (ue_count < 1) throw ConfigError("ue_count must be >= 1");
        if (std::floor(dl_bits_per_slot) < 1.0 || std::floor(ul_bits_per_slot) < 1.0)
            throw ConfigError("per-slot capacities must be at least 1 bit");
        if (l2_latency_s < 0.0) throw ConfigError("l2_latency must be >= 0");
        if (harq.ack_bits_per_ue < 1) throw ConfigError("ack_bits_per_ue must be >= 1");
        if (uci_feedback_delay_slots < 0)
            throw ConfigError("uci_feedback_delay_slots must be >= 0");
        for (const auto& inj : injections)
            if (inj.kind != FapiMsgKind::RachIndication && inj.kind != FapiMsgKind::SrsIndication)
                throw ConfigError("only RACH/SRS indications can be injected");
    }
};

struct SimStats {
    long slots_simulated = 0;
    double sim_time_s = 0.0;
    std::vector<std::uint64_t> dl_bits_per_ue;
    std::vector<std::uint64_t> ul_bits_per_ue;
    std::uint64_t dl_bits_total = 0;
    std::uint64_t ul_bits_total = 0;
    long deadline_misses = 0;
    std::map<FapiMsgKind, long> message_counts;

    double dl_throughput_bps() const {
        return sim_time_s > 0.0 ? static_cast<double>(dl_bits_total) / sim_time_s : 0.0;
    }
    double ul_throughput_bps() const {
        return sim_time_s > 0.0 ? static_cast<double>(ul_bits_total) / sim_time_s : 0.0;
    }
    double ue_dl_throughput_bps(int ue) const {
        return sim_time_s > 0.0
                   ? static_cast<double>(dl_bits_per_ue[static_cast<std::size_t>(ue)]) / sim_time_s
                   : 0.0;
    }
};

// Round-robin MAC scheduler with the per-period HARQ slot cap. One UE is
// scheduled per slot; cursors persist across slots for fairness.
class L2Scheduler {
  public:
    L2Scheduler(TddPattern pattern, HarqConstraint harq, std::uint64_t dl_tb_bits,
                std::uint64_t ul_tb_bits)
        : pattern_(std::move(pattern)), harq_(harq), dl_tb_bits_(dl_tb_bits),
          ul_tb_bits_(ul_tb_bits) {}

    // The slot kind comes from the absolute slot index mod the pattern
    // length; period counters reset at the first slot of each period.
    std::optional<FapiMessage> schedule(const FapiMessage& indication, long absolute_slot,
                                        std::vector<UeContext>& ues) {
        const std::size_t pos =
            static_cast<std::size_t>(absolute_slot) % pattern_.slots.size();
        if (pos == 0)
            for (auto& ue : ues) ue.dl_slots_used_this_period = 0;

        SlotKind kind = pattern_.slots[pos];
        if (kind == SlotKind::Special && pattern_.special_usable) kind = SlotKind::Downlink;

        if (kind == SlotKind::Downlink) return schedule_dl(indication, ues);
        if (kind == SlotKind::Uplink) return schedule_ul(indication, ues);
        return std::nullopt;  // unused special slot
    }

  private:
    std::optional<FapiMessage> schedule_dl(const FapiMessage& ind, std::vector<UeContext>& ues) {
        const int dl_slots = dl_eligible_slots();
        const int cap = harq_.max_dl_slots_per_ue(dl_slots);
        const int n = static_cast<int>(ues.size());
        for (int k = 0; k < n; ++k) {
            UeContext& ue = ues[static_cast<std::size_t>((dl_cursor_ + k) % n)];
            if (ue.dl_backlog_bits == 0 || ue.dl_slots_used_this_period >= cap) continue;
            dl_cursor_ = (dl_cursor_ + k + 1) % n;
            const std::uint64_t tb = std::min<std::uint64_t>(dl_tb_bits_, ue.dl_backlog_bits);
            ue.dl_backlog_bits -= tb;
            ue.dl_slots_used_this_period += 1;
            ue.pending_ack_count += 1;
            FapiMessage msg;
            msg.kind = FapiMsgKind::DlTtiRequest;
            msg.sfn = ind.sfn;
            msg.slot = ind.slot;
            msg.pdus.push_back({static_cast<std::uint16_t>(ue.ue_id),
                                static_cast<std::uint32_t>(tb)});
            return msg;
        }
        return std::nullopt;
    }

    std::optional<FapiMessage> schedule_ul(const FapiMessage& ind, std::vector<UeContext>& ues) {
        const int n = static_cast<int>(ues.size());
        for (int k = 0; k < n; ++k) {
            UeContext& ue = ues[static_cast<std::size_t>((ul_cursor_ + k) % n)];
            if (ue.ul_backlog_bits == 0) continue;
            ul_cursor_ = (ul_cursor_ + k + 1) % n;
            const std::uint64_t tb = std::min<std::uint64_t>(ul_tb_bits_, ue.ul_backlog_bits);
            ue.ul_backlog_bits -= tb;
            FapiMessage msg;
            msg.kind = FapiMsgKind::UlTtiRequest;
            msg.sfn = ind.sfn;
            msg.slot = ind.slot;
            msg.pdus.push_back({static_cast<std::uint16_t>(ue.ue_id),
                                static_cast<std::uint32_t>(tb)});
            return msg;
        }
        return std::nullopt;
    }

    int dl_eligible_slots() const {
        int dl = slots_in_period(pattern_, SlotKind::Downlink);
        if (pattern_.special_usable) dl += slots_in_period(pattern_, SlotKind::Special);
        return dl;
    }

    TddPattern pattern_;
    HarqConstraint harq_;
    std::uint64_t dl_tb_bits_;
    std::uint64_t ul_tb_bits_;
    int dl_cursor_ = 0;
    int ul_cursor_ = 0;
};

// Data-plane indications for an accepted UL grant: the grant's transport
// blocks arrive as RX data plus a passing CRC in the reception slot.
inline std::vector<FapiMessage> l1_data_indications(const FapiMessage& ul_grant,
                                                    const SlotClock& reception_slot) {
    std::vector<FapiMessage> out;
    for (const auto& pdu : ul_grant.pdus) {
        FapiMessage rx;
        rx.kind = FapiMsgKind::RxDataIndication;
        rx.sfn = reception_slot.sfn;
        rx.slot = reception_slot.slot;
        rx.pdus.push_back(pdu);
        out.push_back(rx);

        FapiMessage crc = rx;
        crc.kind = FapiMsgKind::CrcIndication;
        crc.crc_pass = true;
        out.push_back(crc);
    }
    return out;
}

// Counts L2 scheduling responses that arrive more than `budget_s` after the
// slot indication they answer.
inline long deadline_audit(const SlotTrace& trace, double budget_s) {
    if (!(budget_s > 0.0)) throw ConfigError("deadline budget must be > 0");
    const std::uint64_t budget_us =
        static_cast<std::uint64_t>(std::llround(budget_s * 1e6));
    long misses = 0;
    bool have_indication = false;
    std::uint64_t indication_t = 0;
    for (const auto& rec : trace) {
        if (rec.msg.kind == FapiMsgKind::SlotIndication) {
            have_indication = true;
            indication_t = rec.t_us;
        } else if (have_indication && rec.direction == MsgDirection::L2ToL1 &&
                   (rec.msg.kind == FapiMsgKind::DlTtiRequest ||
                    rec.msg.kind == FapiMsgKind::UlTtiRequest)) {
            if (rec.t_us - indication_t > budget_us) ++misses;
        }
    }
    return misses;
}

struct SimResult {
    SimStats stats;
    SlotTrace trace;
};

// Single-threaded deterministic event loop: L1 is the clock master, L2
// answers each slot indication after the configured latency. The PHY is
// ideal (every CRC passes).
class Simulator {
  public:
    explicit Simulator(SimConfig config) : cfg_(std::move(config)) { cfg_.validate(); }

    // Ordered configuration exchange that precedes the first slot indication.
    static std::vector<FapiMessage> handshake() {
        L1ControlFsm fsm;
        std::vector<FapiMessage> msgs;
        for (FapiMsgKind kind : {FapiMsgKind::ParamRequest, FapiMsgKind::ConfigRequest,
                                 FapiMsgKind::StartRequest}) {
            FapiMessage req;
            req.kind = kind;
            msgs.push_back(req);
            if (auto resp = fsm.on_control(req)) msgs.push_back(*resp);
        }
        return msgs;
    }

    SimResult run() const {
        SimResult result;
        SlotTrace& trace = result.trace;
        std::mt19937_64 rng(cfg_.seed);
        std::uniform_real_distribution<double> uniform(0.0, 1.0);

        const std::uint64_t slot_us = static_cast<std::uint64_t>(
            std::llround(slot_duration_s(cfg_.numerology) * 1e6));
        const std::uint64_t l2_lat_us =
            static_cast<std::uint64_t>(std::llround(cfg_.l2_latency_s * 1e6));
        const std::uint64_t dl_tb = static_cast<std::uint64_t>(cfg_.dl_bits_per_slot);
        const std::uint64_t ul_tb = static_cast<std::uint64_t>(cfg_.ul_bits_per_slot);

        std::vector<UeContext> ues(static_cast<std::size_t>(cfg_.ue_count));
        for (int u = 0; u < cfg_.ue_count; ++u) ues[static_cast<std::size_t>(u)].ue_id = u;

        for (const auto& msg : handshake())
            push(trace, 0, control_direction(msg.kind), msg);

        L2Scheduler scheduler(cfg_.pattern, cfg_.harq, dl_tb, ul_tb);
        SlotClock clock{cfg_.numerology, 0, 0};

        // UL grants whose data arrives in the next slot.
        std::vector<FapiPdu> pending_ul;
        // Fixed-delay UCI mode: acks scheduled per DL assignment.
        std::map<long, std::vector<std::uint16_t>> delayed_acks;

        std::map<long, std::vector<InjectedIndication>> injections;
        for (const auto& inj : cfg_.injections) injections[inj.slot_index].push_back(inj);

        for (long k = 0; k < cfg_.n_slots; ++k) {
            const std::uint64_t t_slot = static_cast<std::uint64_t>(k) * slot_us;
            const FapiMessage indication = l1_tick(clock);
            push(trace, t_slot, MsgDirection::L1ToL2, indication);

            // Data from the previous slot's UL grants.
            if (!pending_ul.empty()) {
                FapiMessage grant;
                grant.pdus = pending_ul;
                for (const auto& msg : l1_data_indications(grant, clock))
                    push(trace, t_slot, MsgDirection::L1ToL2, msg);
                for (const auto& pdu : pending_ul)
                    ues[pdu.ue_id].delivered_ul_bits += pdu.tb_bits;
                pending_ul.clear();
            }

            // HARQ feedback: aggregated on the period's uplink slot by
            // default, or a fixed number of slots after each assignment.
            if (cfg_.uci_feedback_delay_slots == 0) {
                if (cfg_.pattern.kind_at(k) == SlotKind::Uplink) {
                    for (auto& ue : ues) {
                        if (ue.pending_ack_count == 0) continue;
                        FapiMessage uci;
                        uci.kind = FapiMsgKind::UciIndication;
                        uci.sfn = clock.sfn;
                        uci.slot = clock.slot;
                        uci.ack_bits = static_cast<std::uint8_t>(ue.pending_ack_count);
                        uci.pdus.push_back({static_cast<std::uint16_t>(ue.ue_id), 0});
                        push(trace, t_slot, MsgDirection::L1ToL2, uci);
                        ue.pending_ack_count = 0;
                    }
                }
            } else if (auto due = delayed_acks.find(k); due != delayed_acks.end()) {
                for (std::uint16_t ue_id : due->second) {
                    FapiMessage uci;
                    uci.kind = FapiMsgKind::UciIndication;
                    uci.sfn = clock.sfn;
                    uci.slot = clock.slot;
                    uci.ack_bits = 1;
                    uci.pdus.push_back({ue_id, 0});
                    push(trace, t_slot, MsgDirection::L1ToL2, uci);
                }
                delayed_acks.erase(due);
            }

            if (auto it = injections.find(k); it != injections.end()) {
                for (const auto& inj : it->second) {
                    FapiMessage msg;
                    msg.kind = inj.kind;
                    msg.sfn = clock.sfn;
                    msg.slot = clock.slot;
                    msg.pdus.push_back({inj.ue_id, 0});
                    push(trace, t_slot, MsgDirection::L1ToL2, msg);
                }
            }

            // Traffic arrivals for this slot.
            for (auto& ue : ues) {
                if (cfg_.traffic.kind == TrafficKind::FullBuffer) {
                    ue.dl_backlog_bits = std::max(ue.dl_backlog_bits, dl_tb);
                    ue.ul_backlog_bits = std::max(ue.ul_backlog_bits, ul_tb);
                } else {
                    if (uniform(rng) < cfg_.traffic.dl_arrival_probability)
                        ue.dl_backlog_bits += cfg_.traffic.dl_burst_bits;
                    if (uniform(rng) < cfg_.traffic.ul_arrival_probability)
                        ue.ul_backlog_bits += cfg_.traffic.ul_burst_bits;
                }
            }

            if (auto response = scheduler.schedule(indication, k, ues)) {
                const std::uint64_t t_resp = t_slot + l2_lat_us;
                push(trace, t_resp, MsgDirection::L2ToL1, *response);
                if (response->kind == FapiMsgKind::DlTtiRequest) {
                    FapiMessage tx = *response;
                    tx.kind = FapiMsgKind::TxDataRequest;
                    push(trace, t_resp, MsgDirection::L2ToL1, tx);
                    for (const auto& pdu : tx.pdus) {
                        ues[pdu.ue_id].delivered_dl_bits += pdu.tb_bits;
                        if (cfg_.uci_feedback_delay_slots > 0)
                            delayed_acks[k + cfg_.uci_feedback_delay_slots].push_back(
                                pdu.ue_id);
                    }
                } else {
                    for (const auto& pdu : response->pdus) pending_ul.push_back(pdu);
                }
            }
            clock.advance();
        }

        FapiMessage stop;
        stop.kind = FapiMsgKind::StopRequest;
        stop.sfn = clock.sfn;
        stop.slot = clock.slot;
        push(trace, static_cast<std::uint64_t>(cfg_.n_slots) * slot_us, MsgDirection::L2ToL1,
             stop);

        SimStats& stats = result.stats;
        stats.slots_simulated = cfg_.n_slots;
        stats.sim_time_s = static_cast<double>(cfg_.n_slots) * slot_duration_s(cfg_.numerology);
        stats.dl_bits_per_ue.resize(ues.size());
        stats.ul_bits_per_ue.resize(ues.size());
        for (std::size_t u = 0; u < ues.size(); ++u) {
            stats.dl_bits_per_ue[u] = ues[u].delivered_dl_bits;
            stats.ul_bits_per_ue[u] = ues[u].delivered_ul_bits;
            stats.dl_bits_total += ues[u].delivered_dl_bits;
            stats.ul_bits_total += ues[u].delivered_ul_bits;
        }
        for (const auto& rec : trace) stats.message_counts[rec.msg.kind] += 1;
        const double budget = cfg_.deadline_budget_s > 0.0 ? cfg_.deadline_budget_s
                                                           : slot_duration_s(cfg_.numerology);
        stats.deadline_misses = deadline_audit(trace, budget);
        return result;
    }

    const SimConfig& config() const { return cfg_; }

  private:
    static MsgDirection control_direction(FapiMsgKind kind) {
        switch (kind) {
            case FapiMsgKind::ParamResponse:
            case FapiMsgKind::ConfigResponse:
            case FapiMsgKind::ErrorIndication:
                return MsgDirection::L1ToL2;
            default:
                return MsgDirection::L2ToL1;
        }
    }

    static void push(SlotTrace& trace, std::uint64_t t_us, MsgDirection dir,
                     const FapiMessage& msg) {
        trace.push_back({t_us, dir, msg});
    }

    SimConfig cfg_;
};

}  // namespace ranplan
