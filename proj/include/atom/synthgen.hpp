#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "atom/topology.hpp"
#include "atom/traffic_tensor.hpp"

namespace atom {

/// Sine-based synthetic traffic with controlled spatial/temporal
/// correlation. Values are generated directly in symbol units.
struct SynthConfig {
  std::string topologyPath;  // informational when a Topology is passed directly
  std::size_t bins = 2000;
  std::size_t alphabetSize = 1024;
  double amplitude = 300.0;
  double period = 40.3;  // bins
  double phase = 0.0;
  double offset = 512.0;
  int spatialLevel = 100;   // % of links keeping the base phase/period
  int temporalLevel = 100;  // % of links without additive noise
  double noiseRelStd = 0.25;  // noise std as a fraction of the amplitude
  double phaseShiftMax = 6.283185307179586;
  double periodScaleMin = 0.5;
  double periodScaleMax = 2.0;
  std::uint64_t seed = 1;

  void validate() const;
  std::string toJson() const;
  static SynthConfig fromJson(const std::string& text);
  static SynthConfig load(const std::string& path);
};

struct SynthLayout {
  std::vector<bool> perturbed;  // phase/period changed
  std::vector<bool> noisy;      // additive noise
  std::vector<double> periods;  // per-link period in bins
};

TrafficTensor generate(const SynthConfig& cfg, const Topology& topology, SynthLayout* layout = nullptr);

/// Diurnal/weekly traffic with per-link scales, shared and private
/// fluctuations and rare bursts; raw values are calibrated to an affine
/// alphabet. Stand-in for Abilene/Geant-style measurements.
struct RealisticConfig {
  std::size_t bins = 2000;
  std::size_t alphabetSize = 1024;
  double binsPerDay = 288.0;
  double sharedNoise = 0.06;
  double privateNoise = 0.04;
  double burstRate = 0.002;
  std::uint64_t seed = 1;
};

TrafficTensor generateRealistic(const RealisticConfig& cfg, const Topology& topology);

struct CorrelationReport {
  double meanPairwiseSpatialCorr = 0.0;
  double meanLag1AutoCorr = 0.0;
  std::size_t constantColumns = 0;  // columns whose correlations were set to 1.0
};

CorrelationReport correlationReport(const TrafficTensor& tensor);

/// Pearson correlation; a constant input gives 1.0 by convention.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace atom
