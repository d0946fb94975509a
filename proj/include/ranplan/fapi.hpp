#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ranplan/errors.hpp"

namespace ranplan {

// Message identifiers follow the SCF 5G FAPI numbering so exported traces
// line up with standard dissectors.
enum class FapiMsgKind : std::uint16_t {
    ParamRequest = 0x00,
    ParamResponse = 0x01,
    ConfigRequest = 0x02,
    ConfigResponse = 0x03,
    StartRequest = 0x04,
    StopRequest = 0x05,
    ErrorIndication = 0x07,
    DlTtiRequest = 0x80,
    UlTtiRequest = 0x81,
    SlotIndication = 0x82,
    UlDciRequest = 0x83,
    TxDataRequest = 0x84,
    RxDataIndication = 0x85,
    CrcIndication = 0x86,
    UciIndication = 0x87,
    SrsIndication = 0x88,
    RachIndication = 0x89,
};

inline const char* fapi_msg_name(FapiMsgKind kind) {
    switch (kind) {
        case FapiMsgKind::ParamRequest: return "PARAM.request";
        case FapiMsgKind::ParamResponse: return "PARAM.response";
        case FapiMsgKind::ConfigRequest: return "CONFIG.request";
        case FapiMsgKind::ConfigResponse: return "CONFIG.response";
        case FapiMsgKind::StartRequest: return "START.request";
        case FapiMsgKind::StopRequest: return "STOP.request";
        case FapiMsgKind::ErrorIndication: return "ERROR.indication";
        case FapiMsgKind::DlTtiRequest: return "DL_TTI.request";
        case FapiMsgKind::UlTtiRequest: return "UL_TTI.request";
        case FapiMsgKind::SlotIndication: return "SLOT.indication";
        case FapiMsgKind::UlDciRequest: return "UL_DCI.request";
        case FapiMsgKind::TxDataRequest: return "TX_Data.request";
        case FapiMsgKind::RxDataIndication: return "RX_Data.indication";
        case FapiMsgKind::CrcIndication: return "CRC.indication";
        case FapiMsgKind::UciIndication: return "UCI.indication";
        case FapiMsgKind::SrsIndication: return "SRS.indication";
        case FapiMsgKind::RachIndication: return "RACH.indication";
    }
    return "UNKNOWN";
}

// One scheduled transport block.
struct FapiPdu {
    std::uint16_t ue_id = 0;
    std::uint32_t tb_bits = 0;
};

struct FapiMessage {
    FapiMsgKind kind = FapiMsgKind::SlotIndication;
    std::uint16_t sfn = 0;   // 0..1023
    std::uint16_t slot = 0;  // 0..(10*2^mu - 1)

    std::vector<FapiPdu> pdus;       // TTI/data/crc messages
    std::uint8_t ack_bits = 0;       // UCI.indication
    bool crc_pass = true;            // CRC.indication
    std::uint16_t error_msg_id = 0;  // ERROR.indication: offending message id
    std::uint8_t error_code = 0;
};

namespace detail {

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_fapi_body(const FapiMessage& msg) {
    std::vector<std::uint8_t> body;
    switch (msg.kind) {
        case FapiMsgKind::DlTtiRequest:
        case FapiMsgKind::UlTtiRequest:
        case FapiMsgKind::UlDciRequest:
        case FapiMsgKind::TxDataRequest:
        case FapiMsgKind::RxDataIndication:
            detail::put_u16(body, static_cast<std::uint16_t>(msg.pdus.size()));
            for (const auto& pdu : msg.pdus) {
                detail::put_u16(body, pdu.ue_id);
                detail::put_u32(body, pdu.tb_bits);
            }
            break;
        case FapiMsgKind::CrcIndication:
            detail::put_u16(body, static_cast<std::uint16_t>(msg.pdus.size()));
            for (const auto& pdu : msg.pdus) {
                detail::put_u16(body, pdu.ue_id);
                body.push_back(msg.crc_pass ? 1 : 0);
            }
            break;
        case FapiMsgKind::UciIndication:
            detail::put_u16(body, static_cast<std::uint16_t>(msg.pdus.size()));
            for (const auto& pdu : msg.pdus) {
                detail::put_u16(body, pdu.ue_id);
                body.push_back(msg.ack_bits);
            }
            break;
        case FapiMsgKind::SrsIndication:
        case FapiMsgKind::RachIndication:
            for (const auto& pdu : msg.pdus) detail::put_u16(body, pdu.ue_id);
            break;
        case FapiMsgKind::ErrorIndication:
            detail::put_u16(body, msg.error_msg_id);
            body.push_back(msg.error_code);
            break;
        default:
            break;  // configuration messages and SLOT.indication carry no body here
    }
    return body;
}

// 12-byte wire header: message id (u16 LE), body length (u32 LE), sfn (u16),
// slot (u16), one reserved u16.
inline std::vector<std::uint8_t> encode_fapi_frame(const FapiMessage& msg) {
    const std::vector<std::uint8_t> body = encode_fapi_body(msg);
    std::vector<std::uint8_t> frame;
    frame.reserve(12 + body.size());
    detail::put_u16(frame, static_cast<std::uint16_t>(msg.kind));
    detail::put_u32(frame, static_cast<std::uint32_t>(body.size()));
    detail::put_u16(frame, msg.sfn);
    detail::put_u16(frame, msg.slot);
    detail::put_u16(frame, 0);
    frame.insert(frame.end(), body.begin(), body.end());
    return frame;
}

enum class MsgDirection { L1ToL2, L2ToL1 };

struct TraceRecord {
    std::uint64_t t_us = 0;  // simulated clock
    MsgDirection direction = MsgDirection::L1ToL2;
    FapiMessage msg;
};

using SlotTrace = std::vector<TraceRecord>;

}  // namespace ranplan
