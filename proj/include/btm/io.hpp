#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "btm/errors.hpp"

namespace btm::io {

// Little-endian binary encoding, independent of host byte order. Readers
// track the byte offset so FormatError can say where decoding failed.

class BinaryWriter {
  public:
    explicit BinaryWriter(const std::string& path);
    void write_bytes(const void* data, std::size_t n);
    void write_u32(std::uint32_t v);
    void write_u64(std::uint64_t v);
    void write_f64(double v);
    void write_f64_array(const double* v, std::size_t n);

  private:
    std::ofstream out_;
    std::string path_;
};

class BinaryReader {
  public:
    explicit BinaryReader(const std::string& path);
    std::size_t offset() const { return offset_; }
    void read_bytes(void* data, std::size_t n, const char* what);
    std::uint32_t read_u32(const char* what);
    std::uint64_t read_u64(const char* what);
    double read_f64(const char* what);
    void read_f64_array(double* v, std::size_t n, const char* what);
    bool at_eof();

  private:
    std::ifstream in_;
    std::string path_;
    std::size_t offset_ = 0;
};

std::uint64_t fnv1a64(const void* data, std::size_t n);
std::uint64_t fnv1a64_file(const std::string& path);

}  // namespace btm::io
