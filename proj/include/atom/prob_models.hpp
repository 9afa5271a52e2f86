#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "atom/arith_coder.hpp"
#include "atom/topology.hpp"
#include "atom/traffic_tensor.hpp"

namespace atom {

enum class Scope : std::uint8_t { SingleLink = 0, NetworkWide = 1 };

const char* toString(Scope scope) noexcept;
Scope parseScope(const std::string& text);

/// Everything a predictor may condition on when coding one symbol:
/// the past `windowBins` bins, the links of the current bin that are already
/// coded (mask/known), and the link being coded.
struct ModelContext {
  std::span<const Symbol> window;  // windowBins x links, oldest bin first
  std::size_t windowBins = 0;
  std::size_t links = 0;
  std::span<const std::uint8_t> mask;  // links entries, 1 = value already known
  std::span<const Symbol> known;       // links entries, meaningful where mask = 1
  std::size_t targetLink = 0;
  const LinkGraph* graph = nullptr;

  Symbol at(std::size_t t, std::size_t link) const { return window[t * links + link]; }
  bool isKnown(std::size_t link) const { return !mask.empty() && mask[link] != 0; }
  /// Throws ShapeMismatch / InvalidArgument on inconsistent fields.
  void validate() const;
};

/// Predicts many links of the same bin. Implementations may cache work
/// that does not depend on the mask.
class BinPredictor {
 public:
  virtual ~BinPredictor() = default;
  virtual SymbolPmf predict(const ModelContext& ctx) = 0;
};

/// Interface every probability model offers to the codec. predictPmf is a
/// deterministic function of (model, ctx).
class ProbabilityModel {
 public:
  virtual ~ProbabilityModel() = default;

  virtual std::string kind() const = 0;
  virtual std::size_t alphabetSize() const = 0;
  virtual SymbolPmf predictPmf(const ModelContext& ctx) const = 0;

  /// Default session simply forwards to predictPmf.
  virtual std::unique_ptr<BinPredictor> beginBin(const ModelContext& ctx) const;
};

class UniformModel final : public ProbabilityModel {
 public:
  explicit UniformModel(std::size_t alphabetSize);
  std::string kind() const override { return "uniform"; }
  std::size_t alphabetSize() const override { return pmf_.size(); }
  SymbolPmf predictPmf(const ModelContext& ctx) const override;
  const SymbolPmf& pmf() const noexcept { return pmf_; }

 private:
  SymbolPmf pmf_;
};

/// Empirical histogram over a whole sequence: one per link (single-link) or
/// one pooled over all links (network-wide).
class StaticModel final : public ProbabilityModel {
 public:
  StaticModel(Scope scope, std::size_t alphabetSize, std::vector<std::vector<std::uint64_t>> histograms);

  std::string kind() const override { return "static"; }
  std::size_t alphabetSize() const override { return alphabetSize_; }
  SymbolPmf predictPmf(const ModelContext& ctx) const override;

  Scope scope() const noexcept { return scope_; }
  const std::vector<std::vector<std::uint64_t>>& histograms() const noexcept { return histograms_; }
  const SymbolPmf& pmfFor(std::size_t link) const;

  std::vector<std::uint8_t> serialize() const;
  static StaticModel deserialize(std::span<const std::uint8_t> bytes);

 private:
  Scope scope_;
  std::size_t alphabetSize_;
  std::vector<std::vector<std::uint64_t>> histograms_;
  std::vector<SymbolPmf> pmfs_;
};

StaticModel fitStatic(const TrafficTensor& tensor, Scope scope);

/// Histogram of the sliding window, recomputed for every prediction.
class AdaptiveModel final : public ProbabilityModel {
 public:
  AdaptiveModel(Scope scope, std::size_t alphabetSize);
  std::string kind() const override { return "adaptive"; }
  std::size_t alphabetSize() const override { return alphabetSize_; }
  SymbolPmf predictPmf(const ModelContext& ctx) const override;
  Scope scope() const noexcept { return scope_; }

 private:
  Scope scope_;
  std::size_t alphabetSize_;
};

SymbolPmf adaptivePmf(const ModelContext& ctx, Scope scope, std::size_t alphabetSize);

struct LaplaceParams {
  double mu = 0.0;  // location, symbol units
  double b = 1.0;   // scale, symbol units
};

/// Raw (unquantized) discretized Laplace masses over [0, A): unit bins
/// around each symbol, the two boundary symbols absorbing the tails.
std::vector<double> laplaceMasses(const LaplaceParams& params, std::size_t alphabetSize);
SymbolPmf laplacePmf(const LaplaceParams& params, std::size_t alphabetSize);

/// Laplace CDF.
double laplaceCdf(double x, const LaplaceParams& params);

}  // namespace atom
