#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "atom/alphabet.hpp"
#include "atom/topology.hpp"

namespace atom {

/// T x l symbol matrix, row-major (one row per time bin, one column per
/// canonical link index).
class TrafficTensor {
 public:
  TrafficTensor() = default;
  TrafficTensor(std::size_t bins, std::size_t links, SymbolAlphabet alphabet,
                double binDuration = 300.0);
  TrafficTensor(std::size_t bins, std::size_t links, std::vector<Symbol> data,
                SymbolAlphabet alphabet, double binDuration = 300.0);

  std::size_t bins() const noexcept { return bins_; }
  std::size_t links() const noexcept { return links_; }
  bool empty() const noexcept { return data_.empty(); }
  const SymbolAlphabet& alphabet() const noexcept { return alphabet_; }
  double binDuration() const noexcept { return binDuration_; }
  std::uint64_t clampCount() const noexcept { return clampCount_; }
  void setClampCount(std::uint64_t n) noexcept { clampCount_ = n; }

  Symbol at(std::size_t t, std::size_t link) const { return data_[t * links_ + link]; }
  void set(std::size_t t, std::size_t link, Symbol s);
  std::span<const Symbol> row(std::size_t t) const { return {data_.data() + t * links_, links_}; }
  std::span<const Symbol> data() const noexcept { return data_; }
  std::vector<Symbol> column(std::size_t link) const;

  /// Rows [begin, end).
  TrafficTensor slice(std::size_t begin, std::size_t end) const;
  TrafficTensor selectColumns(const std::vector<std::size_t>& columns) const;

  /// Fixed-width big-endian bit packing of all symbols, row-major, at the
  /// alphabet's bit width. Its size is the raw size used for ratios.
  std::vector<std::uint8_t> packSymbols() const;
  std::size_t rawBytes() const noexcept;

  friend bool operator==(const TrafficTensor& a, const TrafficTensor& b) {
    return a.bins_ == b.bins_ && a.links_ == b.links_ && a.data_ == b.data_;
  }

 private:
  std::size_t bins_ = 0;
  std::size_t links_ = 0;
  std::vector<Symbol> data_;
  SymbolAlphabet alphabet_;
  double binDuration_ = 300.0;
  std::uint64_t clampCount_ = 0;
};

struct CsvOptions {
  std::size_t alphabetSize = SymbolAlphabet::kDefaultSize;
  /// Leading rows used to calibrate the quantizer; 0 means all rows.
  std::size_t calibrationRows = 0;
  double binDuration = 300.0;
  /// Use the values as symbols directly instead of calibrating.
  bool identityQuantizer = false;
};

/// Header row of link ids, then one numeric row per time bin. Calibrates
/// the quantizer on the parsed values and quantizes them.
TrafficTensor ingestCsv(const std::string& path, const Topology& topology, const CsvOptions& opts = {});
TrafficTensor parseCsv(std::istream& in, const Topology& topology, const CsvOptions& opts = {},
                       const std::string& sourceName = "<stream>");

/// Writes dequantized raw values with a header of `src-dst` link ids.
std::string toCsv(const TrafficTensor& tensor, const Topology& topology);
void writeCsv(const std::string& path, const TrafficTensor& tensor, const Topology& topology);

}  // namespace atom
