#include "atom/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "atom/error.hpp"

namespace atom {

namespace {

bool gridLevel(int v) { return v == 0 || v == 30 || v == 60 || v == 100; }

std::vector<bool> pickSubset(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<bool> out(n, false);
  for (std::size_t i = 0; i < k && i < n; ++i) out[idx[i]] = true;
  return out;
}

std::size_t share(int percent, std::size_t n) {
  return static_cast<std::size_t>(std::lround(static_cast<double>(100 - percent) / 100.0 * static_cast<double>(n)));
}

}  // namespace

void SynthConfig::validate() const {
  if (!gridLevel(spatialLevel) || !gridLevel(temporalLevel)) {
    throw AtomError(ErrorCode::InvalidArgument, "correlation levels must be one of 0, 30, 60, 100");
  }
  if (!(amplitude > 0)) throw AtomError(ErrorCode::InvalidArgument, "amplitude must be > 0");
  if (!(period >= 2)) throw AtomError(ErrorCode::InvalidArgument, "period must be >= 2 bins");
  if (bins == 0) throw AtomError(ErrorCode::InvalidArgument, "bins must be > 0");
  if (noiseRelStd < 0) throw AtomError(ErrorCode::InvalidArgument, "noise must be >= 0");
  if (!(periodScaleMin > 0 && periodScaleMin <= periodScaleMax)) {
    throw AtomError(ErrorCode::InvalidArgument, "bad period scale range");
  }
}

std::string SynthConfig::toJson() const {
  nlohmann::ordered_json j;
  j["topology"] = topologyPath;
  j["bins"] = bins;
  j["alphabet"] = alphabetSize;
  j["base"] = {{"amplitude", amplitude}, {"period", period}, {"phase", phase}, {"offset", offset}};
  j["spatial_level"] = spatialLevel;
  j["temporal_level"] = temporalLevel;
  j["noise"] = {{"relative_std", noiseRelStd}};
  j["perturbation"] = {{"phase_shift_max", phaseShiftMax},
                       {"period_scale_min", periodScaleMin},
                       {"period_scale_max", periodScaleMax}};
  j["seed"] = seed;
  return j.dump(2);
}

SynthConfig SynthConfig::fromJson(const std::string& text) {
  SynthConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    c.topologyPath = j.value("topology", c.topologyPath);
    c.bins = j.value("bins", c.bins);
    c.alphabetSize = j.value("alphabet", c.alphabetSize);
    if (j.contains("base")) {
      const auto& b = j["base"];
      c.amplitude = b.value("amplitude", c.amplitude);
      c.period = b.value("period", c.period);
      c.phase = b.value("phase", c.phase);
      c.offset = b.value("offset", c.offset);
    }
    c.spatialLevel = j.value("spatial_level", c.spatialLevel);
    c.temporalLevel = j.value("temporal_level", c.temporalLevel);
    if (j.contains("noise")) c.noiseRelStd = j["noise"].value("relative_std", c.noiseRelStd);
    if (j.contains("perturbation")) {
      const auto& p = j["perturbation"];
      c.phaseShiftMax = p.value("phase_shift_max", c.phaseShiftMax);
      c.periodScaleMin = p.value("period_scale_min", c.periodScaleMin);
      c.periodScaleMax = p.value("period_scale_max", c.periodScaleMax);
    }
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw AtomError(ErrorCode::ParseError, std::string("synth config: ") + e.what());
  }
  c.validate();
  return c;
}

SynthConfig SynthConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw AtomError(ErrorCode::IoError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return fromJson(ss.str());
}

TrafficTensor generate(const SynthConfig& cfg, const Topology& topology, SynthLayout* layout) {
  cfg.validate();
  const std::size_t l = topology.numLinks();
  if (l == 0) throw AtomError(ErrorCode::InvalidTopology, "topology has no links");
  std::mt19937_64 rng(cfg.seed);
  const auto perturbed = pickSubset(l, share(cfg.spatialLevel, l), rng);
  const auto noisy = pickSubset(l, share(cfg.temporalLevel, l), rng);
  std::uniform_real_distribution<double> phaseDist(0.0, cfg.phaseShiftMax);
  std::uniform_real_distribution<double> scaleDist(cfg.periodScaleMin, cfg.periodScaleMax);
  std::normal_distribution<double> noise(0.0, cfg.noiseRelStd * cfg.amplitude);
  const SymbolAlphabet alphabet = SymbolAlphabet::identity(cfg.alphabetSize);
  TrafficTensor out(cfg.bins, l, alphabet);
  const double top = static_cast<double>(cfg.alphabetSize - 1);
  std::uint64_t clamps = 0;
  std::vector<double> periods(l);
  for (std::size_t j = 0; j < l; ++j) {
    double phase = cfg.phase;
    double period = cfg.period;
    if (perturbed[j]) {
      phase += phaseDist(rng);
      period *= scaleDist(rng);
    }
    periods[j] = period;
    for (std::size_t t = 0; t < cfg.bins; ++t) {
      double v = cfg.offset + cfg.amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / period + phase);
      if (noisy[j]) v += noise(rng);
      v = std::round(v);
      if (v < 0 || v > top) ++clamps;
      out.set(t, j, static_cast<Symbol>(std::clamp(v, 0.0, top)));
    }
  }
  out.setClampCount(clamps);
  if (layout) *layout = {perturbed, noisy, periods};
  return out;
}

TrafficTensor generateRealistic(const RealisticConfig& cfg, const Topology& topology) {
  const std::size_t l = topology.numLinks();
  if (l == 0) throw AtomError(ErrorCode::InvalidTopology, "topology has no links");
  if (cfg.bins == 0) throw AtomError(ErrorCode::InvalidArgument, "bins must be > 0");
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = topology.numNodes();
  // Node activity and time-zone offsets; link scale follows its endpoints.
  std::vector<double> activity(n), zone(n);
  for (std::size_t i = 0; i < n; ++i) {
    activity[i] = std::exp(0.6 * gauss(rng));
    zone[i] = 0.04 * gauss(rng);
  }
  auto nodeIndex = [&](const std::string& id) {
    return static_cast<std::size_t>(std::find(topology.nodes().begin(), topology.nodes().end(), id) -
                                    topology.nodes().begin());
  };
  std::vector<double> scale(l), shift(l), depth(l);
  for (std::size_t j = 0; j < l; ++j) {
    const auto a = nodeIndex(topology.links()[j].src);
    const auto b = nodeIndex(topology.links()[j].dst);
    scale[j] = 400.0 * activity[a] * activity[b] * std::exp(0.3 * gauss(rng));
    shift[j] = 0.5 * (zone[a] + zone[b]);
    depth[j] = std::clamp(0.55 + 0.1 * gauss(rng), 0.3, 0.8);
  }
  std::vector<double> shared(cfg.bins);
  double s = 0.0;
  for (auto& v : shared) {
    s = 0.97 * s + std::sqrt(1 - 0.97 * 0.97) * gauss(rng);
    v = s;
  }
  std::vector<double> raw(cfg.bins * l);
  for (std::size_t j = 0; j < l; ++j) {
    double p = 0.0;
    double burst = 0.0;
    for (std::size_t t = 0; t < cfg.bins; ++t) {
      const double day = static_cast<double>(t) / cfg.binsPerDay + shift[j];
      const double diurnal = 1.0 - depth[j] * 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * day)) +
                             0.08 * std::sin(4.0 * std::numbers::pi * day);
      const double weekly = 1.0 - 0.15 * (std::fmod(std::floor(day), 7.0) >= 5.0 ? 1.0 : 0.0);
      p = 0.9 * p + std::sqrt(1 - 0.81) * gauss(rng);
      if (unit(rng) < cfg.burstRate) burst = 0.5 + unit(rng);
      burst *= 0.8;
      const double level = diurnal * weekly * (1.0 + cfg.sharedNoise * shared[t] + cfg.privateNoise * p + burst);
      raw[t * l + j] = std::max(0.0, scale[j] * level);
    }
  }
  const auto alphabet = SymbolAlphabet::calibrate(raw, cfg.alphabetSize);
  TrafficTensor out(cfg.bins, l, alphabet);
  std::uint64_t clamps = 0;
  for (std::size_t t = 0; t < cfg.bins; ++t) {
    for (std::size_t j = 0; j < l; ++j) out.set(t, j, alphabet.quantize(raw[t * l + j], &clamps));
  }
  out.setClampCount(clamps);
  return out;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  if (n < 2) return 1.0;
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 1.0;
  return sab / std::sqrt(saa * sbb);
}

CorrelationReport correlationReport(const TrafficTensor& x) {
  if (x.bins() < 3) throw AtomError(ErrorCode::InvalidArgument, "correlation report needs at least 3 bins");
  CorrelationReport r;
  const std::size_t l = x.links();
  std::vector<std::vector<double>> cols(l);
  for (std::size_t j = 0; j < l; ++j) {
    const auto c = x.column(j);
    cols[j].assign(c.begin(), c.end());
    if (std::all_of(c.begin(), c.end(), [&](Symbol s) { return s == c.front(); })) ++r.constantColumns;
  }
  double spatial = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = i + 1; j < l; ++j) {
      spatial += pearson(cols[i], cols[j]);
      ++pairs;
    }
  }
  r.meanPairwiseSpatialCorr = pairs ? spatial / static_cast<double>(pairs) : 1.0;
  double lag = 0.0;
  for (const auto& c : cols) {
    const std::vector<double> head(c.begin(), c.end() - 1);
    const std::vector<double> tail(c.begin() + 1, c.end());
    lag += pearson(head, tail);
  }
  r.meanLag1AutoCorr = lag / static_cast<double>(l);
  return r;
}

}  // namespace atom
