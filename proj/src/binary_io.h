#pragma once

// Little-endian primitive encoding shared by the corpus bundle and model
// artifact formats (see docs/formats.md).

#include <cstdint>
#include <string>
#include <string_view>

namespace thematic::io {

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  /// u32 byte length followed by the raw bytes.
  void str(std::string_view s);
  void raw(std::string_view s) { out_.append(s); }

  const std::string& bytes() const { return out_; }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

/// Bounds-checked reader; throws Error(kDataError) naming `what` on truncation.
class Reader {
 public:
  Reader(std::string_view bytes, std::string what)
      : in_(bytes), what_(std::move(what)) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string str();
  std::string_view raw(std::size_t n);

  std::size_t offset() const { return pos_; }
  bool at_end() const { return pos_ == in_.size(); }
  /// Throws unless all input has been consumed.
  void expect_end();
  [[noreturn]] void fail(const std::string& message) const;

 private:
  void need(std::size_t n);

  std::string_view in_;
  std::string what_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::string& path);
/// Writes via a temporary sibling file and rename, so readers never see a
/// partially written artifact.
void write_file_atomic(const std::string& path, std::string_view bytes);

}  // namespace thematic::io
