#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atom/codec.hpp"
#include "atom/nn/predictor.hpp"
#include "atom/topology.hpp"
#include "atom/traffic_tensor.hpp"

namespace atom {

/// zlib-framed DEFLATE at the given level (9 = maximum).
std::vector<std::uint8_t> deflateBytes(std::span<const std::uint8_t> bytes, int level = 9);
std::vector<std::uint8_t> inflateBytes(std::span<const std::uint8_t> bytes, std::size_t expectedSize);

struct DeflateSizes {
  std::size_t binary = 0;  // DEFLATE of the packed symbols
  std::size_t csv = 0;     // DEFLATE of the CSV text
  std::size_t csvRaw = 0;  // CSV text size
};

/// Whole-sequence DEFLATE of both serializations.
DeflateSizes deflateWhole(const TrafficTensor& tensor, const Topology& topology);
/// Each bin compressed on its own (packed symbols of that bin); summed.
std::size_t deflatePerBin(const TrafficTensor& tensor);

/// One bench cell. Field names are the stable key=value interface.
struct BenchRecord {
  std::string dataset;
  std::string method;    // stgnn | rnn | static | adaptive | deflate | deflate-csv | deflate-per-bin
  std::string scenario;  // single-link | network-wide | n/a
  double cr = 0.0;
  std::size_t compressedBytes = 0;
  std::size_t rawBytes = 0;
  double meanPerBinSeconds = 0.0;
  std::size_t timingReps = 0;
  std::size_t modelSizeBytes = 0;
  double csvCr = 0.0;  // relative to the CSV text size
  bool verified = false;

  std::string key() const { return dataset + "|" + method + "|" + scenario; }
  std::string toKeyValue() const;
  static BenchRecord fromKeyValue(const std::string& line);
};

/// Loads records from a key=value file (missing file gives none).
std::vector<BenchRecord> loadRecords(const std::string& path);
void appendRecord(const std::string& path, const BenchRecord& record);

/// (CR_a / CR_b - 1) * 100.
double improvementPercent(double crA, double crB);

struct MeasureOptions {
  bool verify = true;
  std::size_t timingReps = 0;  // extra timed runs after one warm-up; 0 = time the measured run
  std::size_t timingBins = 0;  // bins per timed run (0 = all)
  bool embedModel = false;
};

/// Compresses `tensor`, checks the round trip and fills a record.
BenchRecord measureCodec(const std::string& dataset, const TrafficTensor& tensor, const CodecModel& model,
                         const Topology& topology, Scope scenario, const MeasureOptions& opts = {});

std::vector<BenchRecord> measureDeflate(const std::string& dataset, const TrafficTensor& tensor,
                                        const Topology& topology, bool perBin);

struct GridOptions {
  std::size_t bins = 2000;
  std::uint64_t seed = 1;
  nn::ArchDescriptor arch;  // kind is set per method
  nn::TrainConfig train;
  bool perBinDeflate = false;
  std::vector<int> levels{0, 30, 60, 100};
  std::string modelDir;  // when set, trained models are saved as <dataset>-<arch>.atmw
  std::function<void(const std::string&)> log;
};

std::string gridDatasetName(int spatial, int temporal);
/// The tensor runGrid uses for one cell.
TrafficTensor gridDataset(const Topology& topology, const GridOptions& opts, int spatial, int temporal);

/// Runs the synthetic grid: for each (spatial, temporal) cell trains ST-GNN
/// and RNN on the first 70% and compresses the last 30% with every method.
/// Records already present in `done` are skipped; every new record is
/// passed to `sink` as soon as it exists.
void runGrid(const Topology& topology, const GridOptions& opts, const std::vector<BenchRecord>& done,
             const std::function<void(const BenchRecord&)>& sink);

/// Lookup helper over a record list.
std::optional<BenchRecord> findRecord(const std::vector<BenchRecord>& records, const std::string& dataset,
                                      const std::string& method, const std::string& scenario);

/// 4 x 4 table of improvement% of method A over method B, rows = spatial
/// level (high first), columns = temporal level.
std::string renderGrid(const std::vector<BenchRecord>& records, const std::string& methodA, const std::string& scenarioA,
                       const std::string& methodB, const std::string& scenarioB, const std::vector<int>& levels = {0, 30, 60, 100});

/// Plain table of all records.
std::string renderTable(const std::vector<BenchRecord>& records);
/// JSON array of all records.
std::string recordsToJson(const std::vector<BenchRecord>& records);

}  // namespace atom
