#pragma once

#include "types.hpp"

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace tfms {

// Little binary container: 8-byte magic, length-prefixed payload, trailing
// FNV-1a64 checksum over magic+payload. A single flipped byte anywhere in
// the file fails the load with ErrorCode::Corrupt.

inline std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

class SnapshotWriter {
public:
    void put_u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void put_i64(std::int64_t v) { put_u64(static_cast<std::uint64_t>(v)); }
    void put_u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void put_double(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        put_u64(bits);
    }

    // Writes magic + size + payload + checksum to path.
    void save(const std::string& path, const char magic[8]) const;

    std::uint64_t payload_digest() const { return fnv1a64(buf_.data(), buf_.size()); }

private:
    std::vector<char> buf_;
};

class SnapshotReader {
public:
    // Reads and verifies; throws Error(Corrupt) on bad magic/size/checksum.
    SnapshotReader(const std::string& path, const char magic[8]);

    std::uint64_t get_u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }
    std::int64_t get_i64() { return static_cast<std::int64_t>(get_u64()); }
    std::uint8_t get_u8() {
        need(1);
        return static_cast<std::uint8_t>(buf_[pos_++]);
    }
    double get_double() {
        std::uint64_t bits = get_u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    bool at_end() const { return pos_ == buf_.size(); }

private:
    void need(std::size_t n) const {
        if (pos_ + n > buf_.size())
            throw Error(ErrorCode::Corrupt, "snapshot payload truncated");
    }

    std::vector<char> buf_;
    std::size_t pos_ = 0;
};

}  // namespace tfms
