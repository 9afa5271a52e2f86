#include "atom/traffic_tensor.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "atom/error.hpp"

namespace atom {

TrafficTensor::TrafficTensor(std::size_t bins, std::size_t links, SymbolAlphabet alphabet,
                             double binDuration)
    : TrafficTensor(bins, links, std::vector<Symbol>(bins * links, 0), std::move(alphabet), binDuration) {}

TrafficTensor::TrafficTensor(std::size_t bins, std::size_t links, std::vector<Symbol> data,
                             SymbolAlphabet alphabet, double binDuration)
    : bins_(bins), links_(links), data_(std::move(data)), alphabet_(std::move(alphabet)),
      binDuration_(binDuration) {
  if (data_.size() != bins_ * links_) {
    throw AtomError(ErrorCode::ShapeMismatch, "tensor data has " + std::to_string(data_.size()) +
                                                  " entries, expected " + std::to_string(bins_ * links_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (data_[i] >= alphabet_.size()) {
      throw AtomError(ErrorCode::InvalidArgument,
                      "symbol " + std::to_string(data_[i]) + " at (" + std::to_string(i / links_) + "," +
                          std::to_string(i % links_) + ") outside alphabet of size " +
                          std::to_string(alphabet_.size()));
    }
  }
}

void TrafficTensor::set(std::size_t t, std::size_t link, Symbol s) {
  if (t >= bins_ || link >= links_) throw AtomError(ErrorCode::ShapeMismatch, "tensor index out of range");
  if (s >= alphabet_.size()) throw AtomError(ErrorCode::InvalidArgument, "symbol outside alphabet");
  data_[t * links_ + link] = s;
}

std::vector<Symbol> TrafficTensor::column(std::size_t link) const {
  std::vector<Symbol> out(bins_);
  for (std::size_t t = 0; t < bins_; ++t) out[t] = at(t, link);
  return out;
}

TrafficTensor TrafficTensor::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > bins_) throw AtomError(ErrorCode::ShapeMismatch, "bad row slice");
  std::vector<Symbol> d(data_.begin() + static_cast<std::ptrdiff_t>(begin * links_),
                        data_.begin() + static_cast<std::ptrdiff_t>(end * links_));
  return TrafficTensor(end - begin, links_, std::move(d), alphabet_, binDuration_);
}

TrafficTensor TrafficTensor::selectColumns(const std::vector<std::size_t>& columns) const {
  std::vector<Symbol> d;
  d.reserve(bins_ * columns.size());
  for (std::size_t t = 0; t < bins_; ++t) {
    for (auto c : columns) {
      if (c >= links_) throw AtomError(ErrorCode::ShapeMismatch, "column out of range");
      d.push_back(at(t, c));
    }
  }
  return TrafficTensor(bins_, columns.size(), std::move(d), alphabet_, binDuration_);
}

std::vector<std::uint8_t> TrafficTensor::packSymbols() const {
  const unsigned width = alphabet_.bitWidth();
  std::vector<std::uint8_t> out(rawBytes(), 0);
  std::size_t bit = 0;
  for (Symbol s : data_) {
    for (int b = static_cast<int>(width) - 1; b >= 0; --b, ++bit) {
      if ((s >> b) & 1u) out[bit >> 3] |= static_cast<std::uint8_t>(0x80u >> (bit & 7));
    }
  }
  return out;
}

std::size_t TrafficTensor::rawBytes() const noexcept {
  return (data_.size() * alphabet_.bitWidth() + 7) / 8;
}

namespace {

std::vector<std::string_view> splitCells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    auto cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) {
      cell.remove_suffix(1);
    }
    cells.push_back(cell);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

TrafficTensor parseCsv(std::istream& in, const Topology& topology, const CsvOptions& opts,
                       const std::string& sourceName) {
  const std::size_t l = topology.numLinks();
  std::string line;
  std::size_t lineNo = 0;
  bool header = false;
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = splitCells(line);
    if (cells.size() != l) {
      throw AtomError(ErrorCode::ShapeMismatch,
                      sourceName + ":" + std::to_string(lineNo) + ": " + std::to_string(cells.size()) +
                          " columns but topology '" + topology.name() + "' has " + std::to_string(l) +
                          " links");
    }
    if (!header) {
      header = true;
      continue;
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0;
      auto cell = cells[c];
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v) ||
          v < 0) {
        throw AtomError(ErrorCode::ParseError, sourceName + ":" + std::to_string(lineNo) + ": column " +
                                                   std::to_string(c + 1) + ": invalid traffic value '" +
                                                   std::string(cell) + "'");
      }
      values.push_back(v);
    }
    ++rows;
  }
  if (!header) throw AtomError(ErrorCode::ParseError, sourceName + ": empty CSV");
  if (rows == 0) throw AtomError(ErrorCode::ParseError, sourceName + ": CSV has a header but no data rows");

  const std::size_t calRows = opts.calibrationRows == 0 ? rows : std::min(rows, opts.calibrationRows);
  auto alphabet = opts.identityQuantizer ? SymbolAlphabet::identity(opts.alphabetSize)
                                         : SymbolAlphabet::calibrate(std::span(values).first(calRows * l), opts.alphabetSize);
  std::uint64_t clamps = 0;
  std::vector<Symbol> symbols(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) symbols[i] = alphabet.quantize(values[i], &clamps);
  TrafficTensor tensor(rows, l, std::move(symbols), std::move(alphabet), opts.binDuration);
  tensor.setClampCount(clamps);
  return tensor;
}

TrafficTensor ingestCsv(const std::string& path, const Topology& topology, const CsvOptions& opts) {
  std::ifstream in(path);
  if (!in) throw AtomError(ErrorCode::IoError, "cannot open CSV '" + path + "'");
  return parseCsv(in, topology, opts, path);
}

std::string toCsv(const TrafficTensor& tensor, const Topology& topology) {
  if (tensor.links() != topology.numLinks()) {
    throw AtomError(ErrorCode::ShapeMismatch, "tensor/topology link count mismatch");
  }
  std::string out;
  for (std::size_t j = 0; j < topology.numLinks(); ++j) {
    if (j) out += ',';
    out += topology.links()[j].src + "-" + topology.links()[j].dst;
  }
  out += '\n';
  char buf[64];
  for (std::size_t t = 0; t < tensor.bins(); ++t) {
    for (std::size_t j = 0; j < tensor.links(); ++j) {
      if (j) out += ',';
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, tensor.alphabet().dequantize(tensor.at(t, j)));
      out.append(buf, ptr);
    }
    out += '\n';
  }
  return out;
}

void writeCsv(const std::string& path, const TrafficTensor& tensor, const Topology& topology) {
  std::ofstream out(path);
  if (!out) throw AtomError(ErrorCode::IoError, "cannot write CSV '" + path + "'");
  out << toCsv(tensor, topology);
}

}  // namespace atom
