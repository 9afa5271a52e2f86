#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "atom/hash.hpp"
#include "atom/nn/tape.hpp"
#include "atom/prob_models.hpp"
#include "atom/topology.hpp"
#include "atom/traffic_tensor.hpp"

namespace atom::nn {

enum class ArchKind : std::uint8_t { Rnn = 0, Stgnn = 1 };
enum class Distribution : std::uint8_t { Laplace = 0, Normal = 1 };

const char* toString(ArchKind kind) noexcept;
ArchKind parseArchKind(const std::string& text);

struct ArchDescriptor {
  ArchKind kind = ArchKind::Stgnn;
  std::size_t hiddenDim = 32;
  std::size_t windowSize = 12;
  std::vector<std::size_t> mlpLayers{32};
  Distribution distribution = Distribution::Laplace;
  std::size_t alphabetSize = 1024;
  double minScale = 0.05;

  void validate() const;
  /// Per-bin input channels: the traffic value, plus for ST-GNN the mask
  /// bit, known value, known-neighbour flag and known-neighbour offset.
  std::size_t featureDim() const noexcept { return kind == ArchKind::Rnn ? 1 : 5; }
  std::size_t headDim() const noexcept { return kind == ArchKind::Rnn ? 3 : 4; }
  /// Symbol units per unit of raw head output.
  double outputScale() const noexcept { return static_cast<double>(alphabetSize) / 64.0; }
  friend bool operator==(const ArchDescriptor&, const ArchDescriptor&) = default;
};

/// Weights plus architecture. All weights are float32 values held in
/// doubles, so a model reloaded from disk computes exactly what the
/// in-memory model computes.
class PredictorModel {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  PredictorModel() = default;
  /// Fresh weights drawn from `seed`.
  PredictorModel(const ArchDescriptor& arch, std::uint64_t seed);

  const ArchDescriptor& arch() const noexcept { return arch_; }
  std::vector<Parameter>& parameters() noexcept { return params_; }
  const std::vector<Parameter>& parameters() const noexcept { return params_; }
  std::vector<Parameter*> parameterPointers();
  Parameter& parameter(const std::string& name);
  const Parameter& parameter(const std::string& name) const;
  std::size_t parameterCount() const noexcept;

  /// Sets every weight to zero.
  void zeroWeights();
  /// Re-rounds all weights to float32 (after manual edits).
  void roundWeights();

  std::vector<std::uint8_t> serialize() const;
  static PredictorModel deserialize(std::span<const std::uint8_t> bytes);
  void save(const std::string& path) const;
  static PredictorModel load(const std::string& path);

  /// SHA-256 of the serialized body (everything but the trailing checksum).
  Digest checksum() const;

 private:
  ArchDescriptor arch_;
  std::vector<Parameter> params_;
};

/// Network inputs for a batch of `samples` windows over `links` links.
/// Rows are sample-major: row s*links + j.
struct ForwardInput {
  Mat window;  // rows x w, symbol units, oldest bin first
  Mat mask;    // rows x 1, 1 where the target-bin value is known
  Mat known;   // rows x 1, symbol units, meaningful where mask = 1
  std::size_t links = 1;
};

struct HeadVars {
  Var mu;
  Var b;
};

/// Records the full forward pass on `tape`. For RNN the graph is ignored
/// and mask/known may be empty.
HeadVars buildForward(Tape& tape, PredictorModel& model, const ForwardInput& in, const LinkGraph* graph);

/// RNN on one link's window.
LaplaceParams forwardRnn(const PredictorModel& model, std::span<const Symbol> window);

/// ST-GNN over all links for one bin; returns params for every link.
std::vector<LaplaceParams> forwardStgnn(const PredictorModel& model, const ModelContext& ctx);

/// Mask-independent part of one ST-GNN bin (bins 0..w-2), reusable for any
/// number of mask states.
class StgnnBinState {
 public:
  StgnnBinState(const PredictorModel& model, const LinkGraph& graph, std::span<const Symbol> window);
  std::vector<LaplaceParams> finish(std::span<const std::uint8_t> mask, std::span<const Symbol> known) const;

 private:
  const PredictorModel* model_;
  const LinkGraph* graph_;
  Mat window_;
  Mat hidden_;
};

/// Discretized predictive PMF for the descriptor's distribution.
SymbolPmf headPmf(const ArchDescriptor& arch, const LaplaceParams& params);

/// Adapts a PredictorModel to the codec's ProbabilityModel interface.
class NeuralModel final : public ProbabilityModel {
 public:
  NeuralModel(std::shared_ptr<const PredictorModel> model, LinkGraph graph);

  std::string kind() const override { return toString(model_->arch().kind); }
  std::size_t alphabetSize() const override { return model_->arch().alphabetSize; }
  SymbolPmf predictPmf(const ModelContext& ctx) const override;
  std::unique_ptr<BinPredictor> beginBin(const ModelContext& ctx) const override;

  const PredictorModel& model() const noexcept { return *model_; }
  const LinkGraph& graph() const noexcept { return graph_; }

 private:
  void check(const ModelContext& ctx) const;

  std::shared_ptr<const PredictorModel> model_;
  LinkGraph graph_;
};

struct TrainConfig {
  double learningRate = 3e-3;
  /// Learning rate decays geometrically to this fraction by the last epoch.
  double finalLrFraction = 0.03;
  std::size_t batchSize = 32;
  std::size_t epochs = 15;
  double maskDensityMin = 0.0;
  double maskDensityMax = 1.0;
  std::uint64_t seed = 1;
  double trainFraction = 0.70;
  /// Least-squares start for the linear autoregressive path.
  bool leastSquaresInit = true;
  std::function<void(std::size_t epoch, double loss)> onEpoch;

  void validate() const;
};

struct TrainResult {
  PredictorModel model;
  std::vector<double> lossHistory;  // mean NLL per predicted symbol (nats), one per epoch
  double evalNll = 0.0;             // same metric on the evaluation bins, empty mask
  std::size_t trainBins = 0;        // bins [0, trainBins) are training data
  double seconds = 0.0;
};

TrainResult trainPredictor(const TrafficTensor& tensor, const LinkGraph& graph, const ArchDescriptor& arch,
                           const TrainConfig& cfg);

/// First bin of the evaluation split.
std::size_t splitPoint(std::size_t bins, double trainFraction);

enum class MaskMode {
  None,         // no current-bin value known
  AllOthers,    // every link but the target known
  ChainOrder,   // links before the target (canonical order) known
};

/// Mean continuous Laplace NLL (nats) of the target bins [begin, end).
/// `count` receives the number of scored symbols.
double evaluateNll(const PredictorModel& model, const TrafficTensor& tensor, const LinkGraph& graph,
                   std::size_t begin, std::size_t end, MaskMode mode, std::size_t* count = nullptr);

/// Mean discretized code length (bits/symbol) under the quantized PMF.
double evaluateBits(const PredictorModel& model, const TrafficTensor& tensor, const LinkGraph& graph,
                    std::size_t begin, std::size_t end, MaskMode mode);

/// Compares tape gradients with central differences of step `h` for every
/// entry of every parameter. Returns the max of |a - n| / max(|a|, |n|, floor).
double gradCheck(const std::function<Var(Tape&)>& loss, const std::vector<Parameter*>& params, double h = 1e-4,
                 double floor = 1e-6);

/// Sample for a model-level gradient check.
struct GradSample {
  ForwardInput input;
  Mat target;   // rows x 1 symbols
  Mat weights;  // rows x 1
};

double gradCheck(PredictorModel& model, const GradSample& sample, const LinkGraph* graph);

}  // namespace atom::nn
