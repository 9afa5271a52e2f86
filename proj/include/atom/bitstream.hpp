#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace atom {

/// Bit sink, most-significant bit first within each byte.
class BitWriter {
 public:
  void put(bool bit) {
    if ((bits_ & 7) == 0) bytes_.push_back(0);
    if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (bits_ & 7));
    ++bits_;
  }
  void putBits(std::uint64_t value, unsigned count) {
    for (unsigned i = count; i-- > 0;) put((value >> i) & 1u);
  }
  /// Zero-pads to the next byte boundary.
  void alignByte() {
    while (bits_ & 7) put(false);
  }

  std::size_t bitCount() const noexcept { return bits_; }
  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }
  std::vector<std::uint8_t> take() noexcept {
    bits_ = 0;
    return std::move(bytes_);
  }

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t bits_ = 0;
};

/// Bit source matching BitWriter. Reads past the end yield zero bits and are
/// counted so callers can detect over-reads.
class BitReader {
 public:
  BitReader() = default;
  explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool get() noexcept {
    const std::size_t byte = cursor_ >> 3;
    bool bit = false;
    if (byte < bytes_.size()) {
      bit = (bytes_[byte] >> (7 - (cursor_ & 7))) & 1u;
    } else {
      ++padding_;
    }
    ++cursor_;
    return bit;
  }
  std::uint64_t getBits(unsigned count) noexcept {
    std::uint64_t v = 0;
    for (unsigned i = 0; i < count; ++i) v = (v << 1) | static_cast<std::uint64_t>(get());
    return v;
  }

  std::size_t cursor() const noexcept { return cursor_; }
  std::size_t paddingBits() const noexcept { return padding_; }
  std::size_t sizeBits() const noexcept { return bytes_.size() * 8; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t cursor_ = 0;
  std::size_t padding_ = 0;
};

}  // namespace atom
