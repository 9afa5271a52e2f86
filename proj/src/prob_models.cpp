#include "atom/prob_models.hpp"

#include <algorithm>
#include <cmath>

#include "atom/bytes.hpp"
#include "atom/error.hpp"

namespace atom {

const char* toString(Scope scope) noexcept {
  return scope == Scope::SingleLink ? "single-link" : "network-wide";
}

Scope parseScope(const std::string& text) {
  if (text == "single-link") return Scope::SingleLink;
  if (text == "network-wide") return Scope::NetworkWide;
  throw AtomError(ErrorCode::InvalidArgument, "unknown scenario '" + text + "'");
}

void ModelContext::validate() const {
  if (windowBins == 0 || links == 0) throw AtomError(ErrorCode::ShapeMismatch, "empty context window");
  if (window.size() != windowBins * links) {
    throw AtomError(ErrorCode::ShapeMismatch, "context window has " + std::to_string(window.size()) +
                                                  " entries, expected " + std::to_string(windowBins * links));
  }
  if (targetLink >= links) {
    throw AtomError(ErrorCode::InvalidArgument, "target link " + std::to_string(targetLink) + " out of range");
  }
  if (!mask.empty() && mask.size() != links) throw AtomError(ErrorCode::ShapeMismatch, "mask length");
  if (!known.empty() && known.size() != links) throw AtomError(ErrorCode::ShapeMismatch, "known-value length");
  if (!mask.empty() && known.empty()) throw AtomError(ErrorCode::ShapeMismatch, "mask without known values");
  if (isKnown(targetLink)) throw AtomError(ErrorCode::InvalidArgument, "target link is already known");
  if (graph && graph->numLinks() != links) throw AtomError(ErrorCode::ShapeMismatch, "link graph size");
}

namespace {

class ForwardingBinPredictor final : public BinPredictor {
 public:
  explicit ForwardingBinPredictor(const ProbabilityModel& model) : model_(model) {}
  SymbolPmf predict(const ModelContext& ctx) override { return model_.predictPmf(ctx); }

 private:
  const ProbabilityModel& model_;
};

SymbolPmf histogramPmf(std::span<const std::uint64_t> counts) {
  std::vector<double> p(counts.size());
  double total = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    p[k] = static_cast<double>(counts[k]);
    total += p[k];
  }
  if (total == 0.0) std::fill(p.begin(), p.end(), 1.0);
  return quantizePmf(p);
}

}  // namespace

std::unique_ptr<BinPredictor> ProbabilityModel::beginBin(const ModelContext&) const {
  return std::make_unique<ForwardingBinPredictor>(*this);
}

UniformModel::UniformModel(std::size_t alphabetSize) : pmf_(SymbolPmf::uniform(alphabetSize)) {}

SymbolPmf UniformModel::predictPmf(const ModelContext&) const { return pmf_; }

StaticModel::StaticModel(Scope scope, std::size_t alphabetSize,
                         std::vector<std::vector<std::uint64_t>> histograms)
    : scope_(scope), alphabetSize_(alphabetSize), histograms_(std::move(histograms)) {
  if (histograms_.empty()) throw AtomError(ErrorCode::InvalidArgument, "static model without histograms");
  if (scope_ == Scope::NetworkWide && histograms_.size() != 1) {
    throw AtomError(ErrorCode::InvalidArgument, "network-wide static model has exactly one histogram");
  }
  pmfs_.reserve(histograms_.size());
  for (const auto& h : histograms_) {
    if (h.size() != alphabetSize_) throw AtomError(ErrorCode::ShapeMismatch, "histogram size != alphabet size");
    pmfs_.push_back(histogramPmf(h));
  }
}

const SymbolPmf& StaticModel::pmfFor(std::size_t link) const {
  if (scope_ == Scope::NetworkWide) return pmfs_.front();
  if (link >= pmfs_.size()) throw AtomError(ErrorCode::ShapeMismatch, "no histogram for link " + std::to_string(link));
  return pmfs_[link];
}

SymbolPmf StaticModel::predictPmf(const ModelContext& ctx) const {
  if (scope_ == Scope::SingleLink && ctx.links != pmfs_.size()) {
    throw AtomError(ErrorCode::ShapeMismatch, "context has " + std::to_string(ctx.links) +
                                                  " links, static model has " + std::to_string(pmfs_.size()));
  }
  return pmfFor(ctx.targetLink);
}

std::vector<std::uint8_t> StaticModel::serialize() const {
  // Sparse: per histogram the number of non-zero bins, then
  // (symbol gap, count) varint pairs.
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(scope_));
  w.u32(static_cast<std::uint32_t>(alphabetSize_));
  w.u32(static_cast<std::uint32_t>(histograms_.size()));
  for (const auto& h : histograms_) {
    w.varint(static_cast<std::uint64_t>(std::count_if(h.begin(), h.end(), [](std::uint64_t c) { return c != 0; })));
    std::size_t prev = 0;
    for (std::size_t k = 0; k < h.size(); ++k) {
      if (h[k] == 0) continue;
      w.varint(k - prev);
      w.varint(h[k]);
      prev = k;
    }
  }
  return w.take();
}

StaticModel StaticModel::deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "static model");
  const auto scope = r.u8();
  if (scope > 1) throw AtomError(ErrorCode::CorruptContainer, "bad static model scope");
  const auto size = r.u32();
  const auto count = r.u32();
  if (size == 0 || size > SymbolPmf::kTotal || count == 0 || count > r.remaining()) {
    throw AtomError(ErrorCode::CorruptContainer, "bad static model dimensions");
  }
  std::vector<std::vector<std::uint64_t>> hist(count, std::vector<std::uint64_t>(size, 0));
  for (auto& h : hist) {
    const auto nonzero = r.varint();
    if (nonzero > size) throw AtomError(ErrorCode::CorruptContainer, "static histogram too long");
    std::uint64_t pos = 0;
    for (std::uint64_t i = 0; i < nonzero; ++i) {
      pos += r.varint();
      if (pos >= size) throw AtomError(ErrorCode::CorruptContainer, "static histogram symbol out of range");
      h[pos] = r.varint();
    }
  }
  if (!r.done()) throw AtomError(ErrorCode::CorruptContainer, "trailing bytes in static model");
  return StaticModel(static_cast<Scope>(scope), size, std::move(hist));
}

StaticModel fitStatic(const TrafficTensor& tensor, Scope scope) {
  if (tensor.empty()) throw AtomError(ErrorCode::InvalidArgument, "cannot fit a static model on an empty tensor");
  const std::size_t a = tensor.alphabet().size();
  const std::size_t n = scope == Scope::NetworkWide ? 1 : tensor.links();
  std::vector<std::vector<std::uint64_t>> hist(n, std::vector<std::uint64_t>(a, 0));
  for (std::size_t t = 0; t < tensor.bins(); ++t) {
    for (std::size_t j = 0; j < tensor.links(); ++j) {
      ++hist[scope == Scope::NetworkWide ? 0 : j][tensor.at(t, j)];
    }
  }
  return StaticModel(scope, a, std::move(hist));
}

AdaptiveModel::AdaptiveModel(Scope scope, std::size_t alphabetSize)
    : scope_(scope), alphabetSize_(alphabetSize) {}

SymbolPmf AdaptiveModel::predictPmf(const ModelContext& ctx) const {
  return adaptivePmf(ctx, scope_, alphabetSize_);
}

SymbolPmf adaptivePmf(const ModelContext& ctx, Scope scope, std::size_t alphabetSize) {
  ctx.validate();
  std::vector<std::uint64_t> counts(alphabetSize, 0);
  for (std::size_t t = 0; t < ctx.windowBins; ++t) {
    if (scope == Scope::SingleLink) {
      ++counts.at(ctx.at(t, ctx.targetLink));
    } else {
      for (std::size_t j = 0; j < ctx.links; ++j) ++counts.at(ctx.at(t, j));
    }
  }
  return histogramPmf(counts);
}

double laplaceCdf(double x, const LaplaceParams& p) {
  const double z = (x - p.mu) / p.b;
  return z < 0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
}

namespace {

// Mass of [lo, hi] without cancellation in the far tails.
double intervalMass(double lo, double hi, const LaplaceParams& p) {
  if (lo >= p.mu) return 0.5 * (std::exp(-(lo - p.mu) / p.b) - std::exp(-(hi - p.mu) / p.b));
  if (hi <= p.mu) return 0.5 * (std::exp((hi - p.mu) / p.b) - std::exp((lo - p.mu) / p.b));
  return 1.0 - 0.5 * std::exp(-(hi - p.mu) / p.b) - 0.5 * std::exp((lo - p.mu) / p.b);
}

}  // namespace

std::vector<double> laplaceMasses(const LaplaceParams& params, std::size_t alphabetSize) {
  if (!std::isfinite(params.mu) || !std::isfinite(params.b) || params.b <= 0) {
    throw AtomError(ErrorCode::InvalidArgument, "Laplace parameters must be finite with b > 0");
  }
  if (alphabetSize < 2) throw AtomError(ErrorCode::InvalidArgument, "alphabet too small");
  std::vector<double> m(alphabetSize);
  const double lowEdge = 0.5;
  const double highEdge = static_cast<double>(alphabetSize) - 1.5;
  m.front() = laplaceCdf(lowEdge, params);
  for (std::size_t k = 1; k + 1 < alphabetSize; ++k) {
    const double c = static_cast<double>(k);
    m[k] = intervalMass(c - 0.5, c + 0.5, params);
  }
  m.back() = highEdge >= params.mu ? 0.5 * std::exp(-(highEdge - params.mu) / params.b)
                                   : 1.0 - 0.5 * std::exp((highEdge - params.mu) / params.b);
  return m;
}

SymbolPmf laplacePmf(const LaplaceParams& params, std::size_t alphabetSize) {
  return quantizePmf(laplaceMasses(params, alphabetSize));
}

}  // namespace atom
