#include "atom/arith_coder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "atom/error.hpp"

namespace atom {

namespace {

constexpr std::uint32_t kHalf = 0x80000000u;
constexpr std::uint32_t kQuarter = 0x40000000u;
constexpr std::uint32_t kThreeQuarters = 0xC0000000u;

}  // namespace

SymbolPmf SymbolPmf::fromCumulative(std::vector<std::uint32_t> cumulative) {
  if (cumulative.size() < 2) throw AtomError(ErrorCode::MalformedPmf, "pmf needs at least one symbol");
  if (cumulative.front() != 0) throw AtomError(ErrorCode::MalformedPmf, "cumulative counts must start at 0");
  if (cumulative.back() != kTotal) {
    throw AtomError(ErrorCode::MalformedPmf,
                    "cumulative total is " + std::to_string(cumulative.back()) + ", expected 65536");
  }
  if (cumulative.size() - 1 > kTotal) throw AtomError(ErrorCode::MalformedPmf, "alphabet exceeds total");
  for (std::size_t k = 0; k + 1 < cumulative.size(); ++k) {
    if (cumulative[k + 1] <= cumulative[k]) {
      throw AtomError(ErrorCode::MalformedPmf, "symbol " + std::to_string(k) + " has zero mass");
    }
  }
  return SymbolPmf(std::move(cumulative));
}

SymbolPmf SymbolPmf::fromCounts(std::span<const std::uint32_t> counts) {
  std::vector<std::uint32_t> cum(counts.size() + 1, 0);
  std::uint64_t acc = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    acc += counts[k];
    if (acc > kTotal) throw AtomError(ErrorCode::MalformedPmf, "counts exceed total");
    cum[k + 1] = static_cast<std::uint32_t>(acc);
  }
  return fromCumulative(std::move(cum));
}

SymbolPmf SymbolPmf::uniform(std::size_t alphabetSize) {
  std::vector<double> p(alphabetSize, 1.0);
  return quantizePmf(p);
}

std::vector<std::uint32_t> SymbolPmf::counts() const {
  std::vector<std::uint32_t> c(size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = cum_[k + 1] - cum_[k];
  return c;
}

Symbol SymbolPmf::lookup(std::uint32_t target) const {
  auto it = std::upper_bound(cum_.begin() + 1, cum_.end(), target);
  return static_cast<Symbol>(std::distance(cum_.begin() + 1, it));
}

double SymbolPmf::bits(Symbol s) const {
  return static_cast<double>(kTotalBits) - std::log2(static_cast<double>(count(s)));
}

Symbol SymbolPmf::argmax() const {
  Symbol best = 0;
  for (Symbol k = 1; k < size(); ++k) {
    if (count(k) > count(best)) best = k;
  }
  return best;
}

SymbolPmf quantizePmf(std::span<const double> probs) {
  const std::size_t n = probs.size();
  if (n == 0 || n > SymbolPmf::kTotal) {
    throw AtomError(ErrorCode::MalformedPmf, "pmf alphabet size out of range");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double p = probs[k];
    if (!std::isfinite(p) || p < 0.0) {
      throw AtomError(ErrorCode::MalformedPmf, "probability " + std::to_string(k) + " is negative or not finite");
    }
    sum += p;
  }
  if (!(sum > 0.0)) throw AtomError(ErrorCode::MalformedPmf, "probabilities sum to zero");

  const auto spare = static_cast<std::uint32_t>(SymbolPmf::kTotal - n);
  std::vector<std::uint32_t> counts(n, 1);
  std::vector<double> remainder(n, 0.0);
  std::uint64_t assigned = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double share = probs[k] / sum * static_cast<double>(spare);
    const double whole = std::floor(share);
    counts[k] += static_cast<std::uint32_t>(whole);
    remainder[k] = share - whole;
    assigned += static_cast<std::uint64_t>(whole);
  }
  // Rounding of `probs[k] / sum` can push the floors one over in rare cases.
  while (assigned > spare) {
    std::size_t victim = 0;
    for (std::size_t k = 1; k < n; ++k) {
      if (counts[k] > counts[victim]) victim = k;
    }
    --counts[victim];
    --assigned;
  }
  // Fewer than n counts are left since each floor drops less than one.
  const auto left = static_cast<std::size_t>(spare - assigned);
  if (left > 0) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(left), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        return remainder[a] > remainder[b] || (remainder[a] == remainder[b] && a < b);
                      });
    for (std::size_t i = 0; i < left; ++i) ++counts[order[i]];
  }
  return SymbolPmf::fromCounts(counts);
}

void ArithEncoder::emit(bool bit) {
  out_.put(bit);
  for (; pending_ > 0; --pending_) out_.put(!bit);
}

void ArithEncoder::encode(Symbol symbol, const SymbolPmf& pmf) {
  if (finished_) throw AtomError(ErrorCode::CoderFinished, "encode after finish");
  if (pmf.size() == 0) throw AtomError(ErrorCode::MalformedPmf, "empty pmf");
  if (symbol >= pmf.size()) {
    throw AtomError(ErrorCode::InvalidArgument,
                    "symbol " + std::to_string(symbol) + " outside pmf of size " + std::to_string(pmf.size()));
  }
  const std::uint64_t range = static_cast<std::uint64_t>(high_) - low_ + 1;
  high_ = low_ + static_cast<std::uint32_t>((range * pmf.high(symbol)) >> SymbolPmf::kTotalBits) - 1;
  low_ = low_ + static_cast<std::uint32_t>((range * pmf.low(symbol)) >> SymbolPmf::kTotalBits);
  for (;;) {
    if (high_ < kHalf) {
      emit(false);
    } else if (low_ >= kHalf) {
      emit(true);
      low_ -= kHalf;
      high_ -= kHalf;
    } else if (low_ >= kQuarter && high_ < kThreeQuarters) {
      ++pending_;
      low_ -= kQuarter;
      high_ -= kQuarter;
    } else {
      break;
    }
    low_ <<= 1;
    high_ = (high_ << 1) | 1u;
  }
  ++count_;
}

std::vector<std::uint8_t> ArithEncoder::finish() {
  if (finished_) throw AtomError(ErrorCode::CoderFinished, "finish called twice");
  if (count_ > 0xFFFFFFFFu) throw AtomError(ErrorCode::InvalidArgument, "too many symbols for one stream");
  finished_ = true;
  // Two bits select a quarter lying inside [low, high].
  ++pending_;
  emit(low_ >= kQuarter);
  out_.alignByte();
  out_.putBits(0, 8);
  out_.putBits(count_, 32);
  return out_.take();
}

ArithDecoder::ArithDecoder(std::span<const std::uint8_t> stream) {
  if (stream.size() < 4) {
    throw AtomError(ErrorCode::StreamTooShort,
                    "arithmetic-coded stream of " + std::to_string(stream.size()) +
                        " bytes is shorter than the 32-bit register");
  }
  const auto trailer = stream.subspan(stream.size() - 4);
  total_ = (std::uint64_t{trailer[0]} << 24) | (std::uint64_t{trailer[1]} << 16) |
           (std::uint64_t{trailer[2]} << 8) | std::uint64_t{trailer[3]};
  in_ = BitReader(stream.first(stream.size() - 4));
  code_ = static_cast<std::uint32_t>(in_.getBits(32));
}

Symbol ArithDecoder::decode(const SymbolPmf& pmf) {
  if (decoded_ >= total_) {
    throw AtomError(ErrorCode::EndOfStream,
                    "all " + std::to_string(total_) + " symbols of the stream were already decoded");
  }
  if (pmf.size() == 0) throw AtomError(ErrorCode::MalformedPmf, "empty pmf");
  const std::uint64_t range = static_cast<std::uint64_t>(high_) - low_ + 1;
  const std::uint64_t offset = static_cast<std::uint64_t>(code_) - low_;
  const std::uint64_t scaled = ((offset + 1) * SymbolPmf::kTotal - 1) / range;
  if (scaled >= SymbolPmf::kTotal) {
    throw AtomError(ErrorCode::CorruptContainer, "code register left the coding interval");
  }
  const Symbol symbol = pmf.lookup(static_cast<std::uint32_t>(scaled));
  high_ = low_ + static_cast<std::uint32_t>((range * pmf.high(symbol)) >> SymbolPmf::kTotalBits) - 1;
  low_ = low_ + static_cast<std::uint32_t>((range * pmf.low(symbol)) >> SymbolPmf::kTotalBits);
  for (;;) {
    if (high_ < kHalf) {
      // nothing to subtract
    } else if (low_ >= kHalf) {
      low_ -= kHalf;
      high_ -= kHalf;
      code_ -= kHalf;
    } else if (low_ >= kQuarter && high_ < kThreeQuarters) {
      low_ -= kQuarter;
      high_ -= kQuarter;
      code_ -= kQuarter;
    } else {
      break;
    }
    low_ <<= 1;
    high_ = (high_ << 1) | 1u;
    code_ = (code_ << 1) | static_cast<std::uint32_t>(in_.get());
  }
  ++decoded_;
  return symbol;
}

}  // namespace atom
