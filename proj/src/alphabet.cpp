#include "atom/alphabet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "atom/bytes.hpp"
#include "atom/error.hpp"

namespace atom {

namespace {

void checkSize(std::size_t size) {
  if (size < 2 || size > (1u << 16) || !std::has_single_bit(size)) {
    throw AtomError(ErrorCode::InvalidArgument,
                    "alphabet size must be a power of two in [2, 65536], got " + std::to_string(size));
  }
}

}  // namespace

SymbolAlphabet::SymbolAlphabet(std::size_t size, QuantizerKind kind, double min, double max,
                               std::vector<double> values)
    : size_(size), kind_(kind), min_(min), max_(max), values_(std::move(values)) {
  checkSize(size_);
}

SymbolAlphabet SymbolAlphabet::identity(std::size_t size) {
  return SymbolAlphabet(size, QuantizerKind::Identity, 0.0, static_cast<double>(size - 1), {});
}

SymbolAlphabet SymbolAlphabet::affine(std::size_t size, double min, double max) {
  if (!std::isfinite(min) || !std::isfinite(max) || max < min) {
    throw AtomError(ErrorCode::InvalidArgument, "affine quantizer needs finite min <= max");
  }
  return SymbolAlphabet(size, QuantizerKind::Affine, min, max, {});
}

SymbolAlphabet SymbolAlphabet::dictionary(std::size_t size, std::vector<double> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (values.empty() || values.size() > size) {
    throw AtomError(ErrorCode::InvalidArgument,
                    "dictionary quantizer needs 1.." + std::to_string(size) + " distinct values");
  }
  const double lo = values.front();
  const double hi = values.back();
  return SymbolAlphabet(size, QuantizerKind::Dictionary, lo, hi, std::move(values));
}

SymbolAlphabet SymbolAlphabet::calibrate(std::span<const double> raw, std::size_t size) {
  checkSize(size);
  if (raw.empty()) throw AtomError(ErrorCode::InvalidArgument, "cannot calibrate on no data");
  std::vector<double> distinct;
  bool integral = true;
  for (double v : raw) {
    if (!std::isfinite(v) || v < 0) {
      throw AtomError(ErrorCode::InvalidArgument, "traffic values must be finite and non-negative");
    }
    if (v != std::floor(v)) integral = false;
  }
  if (integral) {
    distinct.assign(raw.begin(), raw.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() <= size) return dictionary(size, std::move(distinct));
  }
  auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  return affine(size, *lo, *hi);
}

unsigned SymbolAlphabet::bitWidth() const noexcept {
  return static_cast<unsigned>(std::bit_width(size_ - 1));
}

Symbol SymbolAlphabet::quantize(double raw, std::uint64_t* clamps) const {
  const auto top = static_cast<Symbol>(size_ - 1);
  auto clamp = [&](Symbol s) {
    if (clamps) ++*clamps;
    return s;
  };
  if (std::isnan(raw)) throw AtomError(ErrorCode::InvalidArgument, "cannot quantize NaN");
  switch (kind_) {
    case QuantizerKind::Identity: {
      if (raw < 0) return clamp(0);
      if (raw > top) return clamp(top);
      return static_cast<Symbol>(std::floor(raw));
    }
    case QuantizerKind::Affine: {
      if (raw < min_) return clamp(0);
      if (raw > max_) return clamp(top);
      if (max_ == min_) return 0;
      const double scaled = std::floor((raw - min_) / (max_ - min_) * static_cast<double>(size_));
      return std::min(top, static_cast<Symbol>(scaled));
    }
    case QuantizerKind::Dictionary: {
      if (raw < values_.front()) return clamp(0);
      if (raw > values_.back()) return clamp(static_cast<Symbol>(values_.size() - 1));
      auto it = std::lower_bound(values_.begin(), values_.end(), raw);
      auto idx = static_cast<std::size_t>(std::distance(values_.begin(), it));
      if (*it != raw && idx > 0 && raw - values_[idx - 1] <= *it - raw) --idx;
      return static_cast<Symbol>(idx);
    }
  }
  return 0;
}

double SymbolAlphabet::dequantize(Symbol s) const {
  if (s >= size_) throw AtomError(ErrorCode::InvalidArgument, "symbol out of range");
  switch (kind_) {
    case QuantizerKind::Identity:
      return static_cast<double>(s);
    case QuantizerKind::Affine:
      return min_ + (static_cast<double>(s) + 0.5) * (max_ - min_) / static_cast<double>(size_);
    case QuantizerKind::Dictionary:
      return values_[std::min<std::size_t>(s, values_.size() - 1)];
  }
  return 0.0;
}

std::vector<std::uint8_t> SymbolAlphabet::serialize() const {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(kind_));
  w.u32(static_cast<std::uint32_t>(size_));
  w.f64(min_);
  w.f64(max_);
  w.u32(static_cast<std::uint32_t>(values_.size()));
  for (double v : values_) w.f64(v);
  return w.take();
}

SymbolAlphabet SymbolAlphabet::deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "alphabet descriptor");
  const auto kind = r.u8();
  const auto size = r.u32();
  const double lo = r.f64();
  const double hi = r.f64();
  const auto n = r.u32();
  if (n > size) throw AtomError(ErrorCode::CorruptContainer, "alphabet dictionary larger than alphabet");
  std::vector<double> values(n);
  for (auto& v : values) v = r.f64();
  switch (kind) {
    case 0: return identity(size);
    case 1: return affine(size, lo, hi);
    case 2: return dictionary(size, std::move(values));
    default: throw AtomError(ErrorCode::CorruptContainer, "unknown quantizer kind");
  }
}

}  // namespace atom
