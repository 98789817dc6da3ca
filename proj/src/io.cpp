#include "btm/io.hpp"

#include <bit>
#include <cstring>

namespace btm::io {

BinaryWriter::BinaryWriter(const std::string& path)
    : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw Error("cannot open for writing: " + path);
}

void BinaryWriter::write_bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    if (!out_) throw Error("write failed: " + path_);
}

void BinaryWriter::write_u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    write_bytes(b, 4);
}

void BinaryWriter::write_u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    write_bytes(b, 8);
}

void BinaryWriter::write_f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64(bits);
}

void BinaryWriter::write_f64_array(const double* v, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        write_bytes(v, n * 8);
    } else {
        for (std::size_t i = 0; i < n; ++i) write_f64(v[i]);
    }
}

BinaryReader::BinaryReader(const std::string& path)
    : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw Error("cannot open for reading: " + path);
}

void BinaryReader::read_bytes(void* data, std::size_t n, const char* what) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
        throw FormatError(std::string("truncated file while reading ") + what + ": " + path_,
                          offset_);
    }
    offset_ += n;
}

std::uint32_t BinaryReader::read_u32(const char* what) {
    unsigned char b[4];
    read_bytes(b, 4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t BinaryReader::read_u64(const char* what) {
    unsigned char b[8];
    read_bytes(b, 8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

double BinaryReader::read_f64(const char* what) {
    const std::uint64_t bits = read_u64(what);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void BinaryReader::read_f64_array(double* v, std::size_t n, const char* what) {
    if constexpr (std::endian::native == std::endian::little) {
        read_bytes(v, n * 8, what);
    } else {
        for (std::size_t i = 0; i < n; ++i) v[i] = read_f64(what);
    }
}

bool BinaryReader::at_eof() {
    return in_.peek() == std::ifstream::traits_type::eof();
}

std::uint64_t fnv1a64(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open for hashing: " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

}  // namespace btm::io
