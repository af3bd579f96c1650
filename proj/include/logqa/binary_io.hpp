#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include "logqa/error.hpp"
#include "logqa/numeric.hpp"

namespace logqa {

// Little-endian host assumed; artifacts are not meant to cross
// architectures.
class BinaryWriter {
 public:
  template <typename T>
  void put(const T& v) {
    buf_.append(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void put_bytes(std::string_view s) { buf_.append(s); }
  template <typename M>
  void put_matrix(const M& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) put<double>(m(r, c));
  }
  const std::string& str() const { return buf_; }

 private:
  std::string buf_;
};

class BinaryReader {
 public:
  BinaryReader(std::string_view data, std::string what) : data_(data), what_(std::move(what)) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string_view get_bytes(std::size_t n) {
    need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  template <typename M>
  void get_matrix(M& m) {
    need(static_cast<std::size_t>(m.size()) * sizeof(double));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = get<double>();
  }
  void expect_magic(std::string_view magic) {
    if (get_bytes(magic.size()) != magic) throw Error(what_ + ": bad magic");
  }
  void expect_end() const {
    if (pos_ != data_.size()) throw Error(what_ + ": trailing bytes");
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw Error(what_ + ": truncated");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
  std::string what_;
};

}  // namespace logqa
