#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "atom/alphabet.hpp"
#include "atom/bitstream.hpp"

namespace atom {

/// Fixed-point PMF: A+1 strictly increasing cumulative counts from 0 to
/// 2^16. Every symbol owns at least one count, so every symbol is codable
/// and costs at most 16 bits.
class SymbolPmf {
 public:
  static constexpr unsigned kTotalBits = 16;
  static constexpr std::uint32_t kTotal = 1u << kTotalBits;

  SymbolPmf() = default;

  /// Throws MalformedPmf unless `cumulative` satisfies the invariants.
  static SymbolPmf fromCumulative(std::vector<std::uint32_t> cumulative);
  static SymbolPmf fromCounts(std::span<const std::uint32_t> counts);
  static SymbolPmf uniform(std::size_t alphabetSize);

  std::size_t size() const noexcept { return cum_.empty() ? 0 : cum_.size() - 1; }
  std::uint32_t low(Symbol s) const { return cum_[s]; }
  std::uint32_t high(Symbol s) const { return cum_[s + 1]; }
  std::uint32_t count(Symbol s) const { return cum_[s + 1] - cum_[s]; }
  const std::vector<std::uint32_t>& cumulative() const noexcept { return cum_; }
  std::vector<std::uint32_t> counts() const;

  /// Symbol whose interval contains `target` in [0, kTotal).
  Symbol lookup(std::uint32_t target) const;
  /// Ideal code length of `s` under this PMF, in bits.
  double bits(Symbol s) const;
  Symbol argmax() const;

  friend bool operator==(const SymbolPmf&, const SymbolPmf&) = default;

 private:
  explicit SymbolPmf(std::vector<std::uint32_t> cum) : cum_(std::move(cum)) {}
  std::vector<std::uint32_t> cum_;
};

/// Fixed-point apportionment: one count per symbol, the remaining
/// 2^16 - A counts split proportionally with largest remainders (ties go to
/// the lowest symbol index).
SymbolPmf quantizePmf(std::span<const double> probs);

/// Binary arithmetic encoder with 32-bit low/high registers.
///
/// Stream layout: the code bits (MSB first), termination bits padded to a
/// byte, one zero guard byte, then the symbol count as a 32-bit big-endian
/// trailer. Code bytes are final as soon as they are written, so a stream
/// can be emitted incrementally.
class ArithEncoder {
 public:
  ArithEncoder() = default;

  void encode(Symbol symbol, const SymbolPmf& pmf);
  /// Flushes the final interval. A second call throws CoderFinished.
  std::vector<std::uint8_t> finish();

  std::uint32_t low() const noexcept { return low_; }
  std::uint32_t high() const noexcept { return high_; }
  std::uint64_t symbolCount() const noexcept { return count_; }
  /// Code bits emitted so far, excluding pending bits.
  std::size_t bitsWritten() const noexcept { return out_.bitCount(); }
  /// Bytes that are final and can no longer change.
  std::size_t stableBytes() const noexcept { return out_.bitCount() / 8; }
  const std::vector<std::uint8_t>& pendingBuffer() const noexcept { return out_.bytes(); }
  bool finished() const noexcept { return finished_; }

 private:
  void emit(bool bit);

  std::uint32_t low_ = 0;
  std::uint32_t high_ = 0xFFFFFFFFu;
  std::uint64_t pending_ = 0;
  std::uint64_t count_ = 0;
  BitWriter out_;
  bool finished_ = false;
};

class ArithDecoder {
 public:
  /// Throws StreamTooShort on streams shorter than the 32-bit register.
  explicit ArithDecoder(std::span<const std::uint8_t> stream);

  /// Throws EndOfStream once all encoded symbols have been returned.
  Symbol decode(const SymbolPmf& pmf);

  std::uint64_t symbolCount() const noexcept { return total_; }
  std::uint64_t remaining() const noexcept { return total_ - decoded_; }
  std::uint32_t low() const noexcept { return low_; }
  std::uint32_t high() const noexcept { return high_; }
  /// Bits requested beyond the end of the code bytes so far.
  std::size_t overreadBits() const noexcept { return in_.paddingBits(); }

 private:
  std::uint32_t low_ = 0;
  std::uint32_t high_ = 0xFFFFFFFFu;
  std::uint32_t code_ = 0;
  std::uint64_t total_ = 0;
  std::uint64_t decoded_ = 0;
  BitReader in_;
};

}  // namespace atom
