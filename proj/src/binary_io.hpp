#pragma once

// Little-endian byte packing shared by the model and patch-set containers.

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "dehaze/error.hpp"

namespace dehaze::detail {

class ByteWriter {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  void text(const std::string& s) { bytes(s.data(), s.size()); }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f64s(std::span<const double> v) {
    for (double x : v) f64(x);
  }

  const std::vector<unsigned char>& buffer() const { return out_; }

 private:
  std::vector<unsigned char> out_;
};

class ByteReader {
 public:
  ByteReader(std::span<const unsigned char> data, std::string name)
      : data_(data), name_(std::move(name)) {}

  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t position() const { return pos_; }

  void bytes(void* out, std::size_t n) {
    need(n);
    std::memcpy(out, data_.data() + pos_, n);
    pos_ += n;
  }
  /// Reads up to and including '\n'; fails if no newline within `limit` bytes.
  std::string line(std::size_t limit) {
    std::string s;
    while (true) {
      if (pos_ >= data_.size() || s.size() > limit) return {};
      const char c = static_cast<char>(data_[pos_++]);
      if (c == '\n') return s;
      s.push_back(c);
    }
  }
  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{data_[pos_ + i]} << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{data_[pos_ + i]} << (8 * i);
    pos_ += 8;
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
  void f64s(std::span<double> out) {
    need(out.size() * 8);
    for (double& x : out) x = f64();
  }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) {
      throw CorruptFileError("'" + name_ + "': truncated at byte " + std::to_string(pos_));
    }
  }

  std::span<const unsigned char> data_;
  std::string name_;
  std::size_t pos_ = 0;
};

std::vector<unsigned char> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<unsigned char>& bytes);

}  // namespace dehaze::detail
