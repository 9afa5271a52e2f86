#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atom/arith_coder.hpp"
#include "atom/hash.hpp"
#include "atom/nn/predictor.hpp"
#include "atom/prob_models.hpp"
#include "atom/topology.hpp"
#include "atom/traffic_tensor.hpp"

namespace atom {

/// Parsed container header. See docs/container-format.md for the layout.
struct ContainerHeader {
  static constexpr std::uint8_t kFormatVersion = 1;

  Scope scenario = Scope::NetworkWide;
  Digest topologyHash{};
  Digest linkOrderHash{};
  std::uint32_t window = 12;
  SymbolAlphabet alphabet;
  std::string modelKind;                 // uniform | static | adaptive | rnn | stgnn
  std::optional<Digest> modelChecksum;   // neural models
  std::vector<std::uint8_t> staticModel; // serialized StaticModel
  std::vector<std::uint8_t> embeddedModel;
  std::uint64_t bins = 0;
  std::uint32_t links = 0;
  double binDuration = 300.0;
};

struct AtomContainer {
  ContainerHeader header;
  /// One stream (network-wide) or one per link (single-link).
  std::vector<std::vector<std::uint8_t>> streams;

  std::vector<std::uint8_t> serialize() const;
  static AtomContainer deserialize(std::span<const std::uint8_t> bytes);
  void save(const std::string& path) const;
  static AtomContainer load(const std::string& path);
  std::size_t payloadBytes() const noexcept;
};

/// Called for every coded symbol with the exact context and PMF used.
using PmfObserver = std::function<void(std::size_t bin, std::size_t link, const ModelContext& ctx, const SymbolPmf& pmf)>;

struct CodecOptions {
  std::size_t window = 12;  // ignored for neural models (taken from the architecture)
  bool embedModel = false;
  PmfObserver observer;
};

/// Model plus what the header needs to name it.
struct CodecModel {
  std::shared_ptr<const ProbabilityModel> model;
  std::string kind;
  std::optional<Digest> checksum;
  std::vector<std::uint8_t> staticBlob;
  std::vector<std::uint8_t> weights;  // serialized PredictorModel, for embedding
  std::optional<std::size_t> window;  // fixed by the model when set

  static CodecModel uniform(std::size_t alphabetSize);
  static CodecModel fitted(StaticModel model);
  static CodecModel adaptive(Scope scope, std::size_t alphabetSize);
  static CodecModel neural(std::shared_ptr<const nn::PredictorModel> model, const LinkGraph& graph);
};

AtomContainer compress(const TrafficTensor& tensor, const CodecModel& model, const Topology& topology, Scope scenario,
                       const CodecOptions& opts = {});

/// `model` may be null for uniform/static/adaptive containers and for
/// containers with an embedded neural model.
TrafficTensor decompress(const AtomContainer& container, const CodecModel* model, const Topology& topology,
                         const PmfObserver& observer = {});

/// Rebuilds the model named by the header (everything but a non-embedded
/// neural model, which needs `neural`).
CodecModel modelForHeader(const ContainerHeader& header, const Topology& topology,
                          std::shared_ptr<const nn::PredictorModel> neural = nullptr);

double compressionRatio(std::size_t rawBytes, std::size_t compressedBytes);

/// Bin-at-a-time compressor producing the same streams as compress().
class StreamCompressor {
 public:
  StreamCompressor(CodecModel model, const Topology& topology, Scope scenario, SymbolAlphabet alphabet,
                   const CodecOptions& opts = {});

  /// Codes one bin; returns the bytes of each stream that became final.
  std::vector<std::vector<std::uint8_t>> push(std::span<const Symbol> bin);
  /// Flushes all streams; returns the remaining bytes of each.
  std::vector<std::vector<std::uint8_t>> finish();
  /// Container with everything emitted so far (after finish()).
  AtomContainer container() const;

  std::size_t binsSeen() const noexcept { return bins_; }
  const std::vector<double>& binSeconds() const noexcept { return binSeconds_; }

 private:
  std::vector<std::vector<std::uint8_t>> drain();

  CodecModel model_;
  ContainerHeader header_;
  std::size_t window_;
  std::size_t links_;
  Scope scenario_;
  const Topology* topology_;
  LinkGraph graph_;
  std::vector<Symbol> history_;  // last `window_` bins, oldest first
  std::vector<ArithEncoder> encoders_;
  std::vector<std::size_t> drained_;
  std::vector<std::vector<std::uint8_t>> streams_;
  std::size_t bins_ = 0;
  bool finished_ = false;
  std::vector<double> binSeconds_;
};

}  // namespace atom
