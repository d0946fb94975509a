#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "ranplan/errors.hpp"
#include "ranplan/fapi.hpp"

namespace ranplan {

// Classic pcap writer, little-endian on the wire regardless of host order.
// Traces use DLT_USER0 (147) with the FAPI frame as the record payload.
class PcapWriter {
  public:
    static constexpr std::uint32_t kMagic = 0xa1b2c3d4;
    static constexpr std::uint32_t kSnapLen = 65535;
    static constexpr std::uint32_t kLinkTypeUser0 = 147;

    explicit PcapWriter(const std::string& path, std::uint32_t link_type = kLinkTypeUser0)
        : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw ConfigError("cannot open pcap file for writing: " + path);
        write_u32(kMagic);
        write_u16(2);  // version 2.4
        write_u16(4);
        write_u32(0);  // thiszone
        write_u32(0);  // sigfigs
        write_u32(kSnapLen);
        write_u32(link_type);
    }

    void write_record(std::uint64_t t_us, const std::vector<std::uint8_t>& payload) {
        write_u32(static_cast<std::uint32_t>(t_us / 1000000ull));
        write_u32(static_cast<std::uint32_t>(t_us % 1000000ull));
        write_u32(static_cast<std::uint32_t>(payload.size()));
        write_u32(static_cast<std::uint32_t>(payload.size()));
        out_.write(reinterpret_cast<const char*>(payload.data()),
                   static_cast<std::streamsize>(payload.size()));
        ++count_;
    }

    std::size_t count() const { return count_; }

    void close() {
        out_.flush();
        if (!out_) throw ConfigError("pcap write failed: " + path_);
        out_.close();
    }

  private:
    void write_u16(std::uint16_t v) {
        const char bytes[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
        out_.write(bytes, 2);
    }
    void write_u32(std::uint32_t v) {
        const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                               static_cast<char>((v >> 16) & 0xff),
                               static_cast<char>((v >> 24) & 0xff)};
        out_.write(bytes, 4);
    }

    std::string path_;
    std::ofstream out_;
    std::size_t count_ = 0;
};

inline std::size_t export_pcap(const SlotTrace& trace, const std::string& path) {
    PcapWriter writer(path);
    for (const auto& rec : trace) writer.write_record(rec.t_us, encode_fapi_frame(rec.msg));
    writer.close();
    return writer.count();
}

}  // namespace ranplan
