#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace atom {

using Symbol = std::uint32_t;

enum class QuantizerKind : std::uint8_t {
  Identity = 0,    // raw values are already symbols
  Affine = 1,      // floor((raw - min) / (max - min) * A), clamped
  Dictionary = 2,  // exact index into the sorted distinct raw values
};

/// Symbol domain [0, A) plus the mapping from raw traffic values.
class SymbolAlphabet {
 public:
  static constexpr std::size_t kDefaultSize = 1024;

  SymbolAlphabet() : SymbolAlphabet(identity(kDefaultSize)) {}

  static SymbolAlphabet identity(std::size_t size);
  static SymbolAlphabet affine(std::size_t size, double min, double max);
  static SymbolAlphabet dictionary(std::size_t size, std::vector<double> values);

  /// Dictionary if all values are integral with at most `size` distinct
  /// values, otherwise affine over [min, max].
  static SymbolAlphabet calibrate(std::span<const double> raw, std::size_t size = kDefaultSize);

  std::size_t size() const noexcept { return size_; }
  unsigned bitWidth() const noexcept;
  QuantizerKind kind() const noexcept { return kind_; }
  double min() const noexcept { return min_; }
  double max() const noexcept { return max_; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// Out-of-range inputs clamp to the boundary symbol; each clamp bumps
  /// `*clamps` when given.
  Symbol quantize(double raw, std::uint64_t* clamps = nullptr) const;
  double dequantize(Symbol s) const;

  std::vector<std::uint8_t> serialize() const;
  static SymbolAlphabet deserialize(std::span<const std::uint8_t> bytes);

  friend bool operator==(const SymbolAlphabet& a, const SymbolAlphabet& b) {
    return a.size_ == b.size_ && a.kind_ == b.kind_ && a.min_ == b.min_ && a.max_ == b.max_ &&
           a.values_ == b.values_;
  }

 private:
  SymbolAlphabet(std::size_t size, QuantizerKind kind, double min, double max,
                 std::vector<double> values);

  std::size_t size_;
  QuantizerKind kind_;
  double min_;
  double max_;
  std::vector<double> values_;
};

}  // namespace atom
