#include "snapshot.hpp"

#include <fstream>

namespace tfms {

void SnapshotWriter::save(const std::string& path, const char magic[8]) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open for writing: " + path);

    std::uint64_t h = fnv1a64(magic, 8);
    h = fnv1a64(buf_.data(), buf_.size(), h);

    out.write(magic, 8);
    std::uint64_t size = buf_.size();
    char hdr[8];
    for (int i = 0; i < 8; ++i) hdr[i] = static_cast<char>((size >> (8 * i)) & 0xff);
    out.write(hdr, 8);
    out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    char sum[8];
    for (int i = 0; i < 8; ++i) sum[i] = static_cast<char>((h >> (8 * i)) & 0xff);
    out.write(sum, 8);
    if (!out) throw Error(ErrorCode::Io, "write failed: " + path);
}

SnapshotReader::SnapshotReader(const std::string& path, const char magic[8]) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open: " + path);

    char file_magic[8];
    if (!in.read(file_magic, 8) || std::memcmp(file_magic, magic, 8) != 0)
        throw Error(ErrorCode::Corrupt, "snapshot magic mismatch: " + path);

    char hdr[8];
    if (!in.read(hdr, 8)) throw Error(ErrorCode::Corrupt, "snapshot header truncated: " + path);
    std::uint64_t size = 0;
    for (int i = 0; i < 8; ++i)
        size |= static_cast<std::uint64_t>(static_cast<unsigned char>(hdr[i])) << (8 * i);

    buf_.resize(size);
    if (size > 0 && !in.read(buf_.data(), static_cast<std::streamsize>(size)))
        throw Error(ErrorCode::Corrupt, "snapshot payload truncated: " + path);

    char sum[8];
    if (!in.read(sum, 8)) throw Error(ErrorCode::Corrupt, "snapshot checksum missing: " + path);
    std::uint64_t stored = 0;
    for (int i = 0; i < 8; ++i)
        stored |= static_cast<std::uint64_t>(static_cast<unsigned char>(sum[i])) << (8 * i);

    char trailing;
    if (in.read(&trailing, 1))
        throw Error(ErrorCode::Corrupt, "snapshot has trailing bytes: " + path);

    std::uint64_t h = fnv1a64(magic, 8);
    h = fnv1a64(buf_.data(), buf_.size(), h);
    if (h != stored)
        throw Error(ErrorCode::Corrupt, "snapshot checksum mismatch: " + path);
}

}  // namespace tfms
