#include "atom/bench.hpp"

#include <zlib.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "atom/error.hpp"
#include "atom/synthgen.hpp"

namespace atom {

std::vector<std::uint8_t> deflateBytes(std::span<const std::uint8_t> bytes, int level) {
  uLongf size = compressBound(static_cast<uLong>(bytes.size()));
  std::vector<std::uint8_t> out(size);
  const int rc = compress2(out.data(), &size, bytes.data(), static_cast<uLong>(bytes.size()), level);
  if (rc != Z_OK) throw AtomError(ErrorCode::IoError, "zlib compress2 failed with code " + std::to_string(rc));
  out.resize(size);
  return out;
}

std::vector<std::uint8_t> inflateBytes(std::span<const std::uint8_t> bytes, std::size_t expectedSize) {
  std::vector<std::uint8_t> out(expectedSize);
  uLongf size = static_cast<uLongf>(expectedSize);
  const int rc = uncompress(out.data(), &size, bytes.data(), static_cast<uLong>(bytes.size()));
  if (rc != Z_OK) throw AtomError(ErrorCode::CorruptContainer, "zlib uncompress failed with code " + std::to_string(rc));
  out.resize(size);
  return out;
}

DeflateSizes deflateWhole(const TrafficTensor& x, const Topology& topology) {
  DeflateSizes d;
  d.binary = deflateBytes(x.packSymbols()).size();
  const std::string csv = toCsv(x, topology);
  d.csvRaw = csv.size();
  d.csv = deflateBytes({reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()}).size();
  return d;
}

std::size_t deflatePerBin(const TrafficTensor& x) {
  std::size_t total = 0;
  for (std::size_t t = 0; t < x.bins(); ++t) total += deflateBytes(x.slice(t, t + 1).packSymbols()).size();
  return total;
}

std::string BenchRecord::toKeyValue() const {
  std::ostringstream o;
  o << std::setprecision(10);
  o << "dataset=" << dataset << " method=" << method << " scenario=" << scenario << " cr=" << cr
    << " compressed_bytes=" << compressedBytes << " raw_bytes=" << rawBytes << " mean_per_bin_s=" << meanPerBinSeconds
    << " timing_reps=" << timingReps << " model_bytes=" << modelSizeBytes << " csv_cr=" << csvCr
    << " verified=" << (verified ? 1 : 0);
  return o.str();
}

BenchRecord BenchRecord::fromKeyValue(const std::string& line) {
  BenchRecord r;
  std::istringstream in(line);
  std::string tok;
  try {
    while (in >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) throw AtomError(ErrorCode::ParseError, "bad bench field '" + tok + "'");
      const std::string k = tok.substr(0, eq);
      const std::string v = tok.substr(eq + 1);
      if (k == "dataset") r.dataset = v;
      else if (k == "method") r.method = v;
      else if (k == "scenario") r.scenario = v;
      else if (k == "cr") r.cr = std::stod(v);
      else if (k == "compressed_bytes") r.compressedBytes = std::stoull(v);
      else if (k == "raw_bytes") r.rawBytes = std::stoull(v);
      else if (k == "mean_per_bin_s") r.meanPerBinSeconds = std::stod(v);
      else if (k == "timing_reps") r.timingReps = std::stoull(v);
      else if (k == "model_bytes") r.modelSizeBytes = std::stoull(v);
      else if (k == "csv_cr") r.csvCr = std::stod(v);
      else if (k == "verified") r.verified = v == "1";
    }
  } catch (const std::logic_error& e) {
    throw AtomError(ErrorCode::ParseError, "bad bench record '" + line + "': " + e.what());
  }
  if (r.dataset.empty() || r.method.empty()) throw AtomError(ErrorCode::ParseError, "bench record without dataset/method");
  return r;
}

std::vector<BenchRecord> loadRecords(const std::string& path) {
  std::vector<BenchRecord> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    out.push_back(BenchRecord::fromKeyValue(line));
  }
  return out;
}

void appendRecord(const std::string& path, const BenchRecord& record) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw AtomError(ErrorCode::IoError, "cannot append to " + path);
  out << record.toKeyValue() << '\n';
}

double improvementPercent(double crA, double crB) {
  if (!(crB > 0)) throw AtomError(ErrorCode::InvalidArgument, "baseline CR must be positive");
  return (crA / crB - 1.0) * 100.0;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double streamMeanPerBin(const TrafficTensor& x, const CodecModel& model, const Topology& topology, Scope scenario,
                        std::size_t bins) {
  StreamCompressor sc(model, topology, scenario, x.alphabet());
  const std::size_t n = bins == 0 ? x.bins() : std::min(bins, x.bins());
  for (std::size_t t = 0; t < n; ++t) sc.push(x.row(t));
  const auto& s = sc.binSeconds();
  const std::size_t w = model.window.value_or(CodecOptions{}.window);
  if (n <= w) return 0.0;
  double total = 0.0;
  for (std::size_t t = w; t < n; ++t) total += s[t];
  return total / static_cast<double>(n - w);
}

}  // namespace

BenchRecord measureCodec(const std::string& dataset, const TrafficTensor& x, const CodecModel& model,
                         const Topology& topology, Scope scenario, const MeasureOptions& opts) {
  BenchRecord r;
  r.dataset = dataset;
  r.method = model.kind;
  r.scenario = toString(scenario);
  CodecOptions co;
  co.embedModel = opts.embedModel;
  const std::size_t w = model.window.value_or(co.window);
  const auto start = std::chrono::steady_clock::now();
  const AtomContainer c = compress(x, model, topology, scenario, co);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto bytes = c.serialize();
  r.compressedBytes = bytes.size();
  r.rawBytes = x.rawBytes();
  r.cr = compressionRatio(r.rawBytes, r.compressedBytes);
  r.csvCr = static_cast<double>(toCsv(x, topology).size()) / static_cast<double>(r.compressedBytes);
  r.modelSizeBytes = model.weights.size();
  if (opts.verify) {
    const TrafficTensor back = decompress(AtomContainer::deserialize(bytes), &model, topology);
    if (!(back == x)) throw AtomError(ErrorCode::CorruptContainer, "round trip failed for " + dataset + "/" + model.kind);
    r.verified = true;
  }
  if (opts.timingReps == 0) {
    r.meanPerBinSeconds = secs / static_cast<double>(x.bins() - w);
    r.timingReps = 1;
  } else {
    streamMeanPerBin(x, model, topology, scenario, opts.timingBins);  // warm-up
    std::vector<double> runs;
    for (std::size_t i = 0; i < opts.timingReps; ++i) {
      runs.push_back(streamMeanPerBin(x, model, topology, scenario, opts.timingBins));
    }
    r.meanPerBinSeconds = median(runs);
    r.timingReps = opts.timingReps;
  }
  return r;
}

std::vector<BenchRecord> measureDeflate(const std::string& dataset, const TrafficTensor& x, const Topology& topology,
                                        bool perBin) {
  const DeflateSizes d = deflateWhole(x, topology);
  const std::size_t raw = x.rawBytes();
  std::vector<BenchRecord> out;
  BenchRecord b;
  b.dataset = dataset;
  b.scenario = "n/a";
  b.rawBytes = raw;
  b.verified = true;
  b.timingReps = 0;
  b.method = "deflate";
  b.compressedBytes = d.binary;
  b.cr = compressionRatio(raw, d.binary);
  b.csvCr = static_cast<double>(d.csvRaw) / static_cast<double>(d.binary);
  out.push_back(b);
  b.method = "deflate-csv";
  b.compressedBytes = d.csv;
  b.cr = compressionRatio(raw, d.csv);
  b.csvCr = static_cast<double>(d.csvRaw) / static_cast<double>(d.csv);
  out.push_back(b);
  if (perBin) {
    const std::size_t pb = deflatePerBin(x);
    b.method = "deflate-per-bin";
    b.compressedBytes = pb;
    b.cr = compressionRatio(raw, pb);
    b.csvCr = static_cast<double>(d.csvRaw) / static_cast<double>(pb);
    out.push_back(b);
  }
  return out;
}

std::string gridDatasetName(int spatial, int temporal) {
  return "synth-s" + std::to_string(spatial) + "-t" + std::to_string(temporal);
}

std::optional<BenchRecord> findRecord(const std::vector<BenchRecord>& records, const std::string& dataset,
                                      const std::string& method, const std::string& scenario) {
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    if (it->dataset == dataset && it->method == method && it->scenario == scenario) return *it;
  }
  return std::nullopt;
}

TrafficTensor gridDataset(const Topology& topology, const GridOptions& opts, int spatial, int temporal) {
  SynthConfig cfg;
  cfg.bins = opts.bins;
  cfg.spatialLevel = spatial;
  cfg.temporalLevel = temporal;
  cfg.alphabetSize = opts.arch.alphabetSize;
  cfg.seed = opts.seed * 1000 + static_cast<std::uint64_t>(spatial) * 7 + static_cast<std::uint64_t>(temporal);
  return generate(cfg, topology);
}

void runGrid(const Topology& topology, const GridOptions& opts, const std::vector<BenchRecord>& done,
             const std::function<void(const BenchRecord&)>& sink) {
  const LinkGraph graph = buildLinkGraph(topology);
  auto log = [&](const std::string& s) {
    if (opts.log) opts.log(s);
  };
  auto have = [&](const std::string& ds, const std::string& m, const std::string& sc) {
    return findRecord(done, ds, m, sc).has_value();
  };
  for (int s : opts.levels) {
    for (int t : opts.levels) {
      const std::string ds = gridDatasetName(s, t);
      const TrafficTensor x = gridDataset(topology, opts, s, t);
      const std::size_t split = nn::splitPoint(x.bins(), opts.train.trainFraction);
      const TrafficTensor eval = x.slice(split, x.bins());
      if (!have(ds, "deflate", "n/a")) {
        for (const auto& r : measureDeflate(ds, eval, topology, opts.perBinDeflate)) sink(r);
      }
      for (Scope sc : {Scope::NetworkWide, Scope::SingleLink}) {
        if (!have(ds, "static", toString(sc))) sink(measureCodec(ds, eval, CodecModel::fitted(fitStatic(eval, sc)), topology, sc));
        if (!have(ds, "adaptive", toString(sc))) {
          sink(measureCodec(ds, eval, CodecModel::adaptive(sc, eval.alphabet().size()), topology, sc));
        }
      }
      for (nn::ArchKind kind : {nn::ArchKind::Stgnn, nn::ArchKind::Rnn}) {
        const Scope sc = kind == nn::ArchKind::Stgnn ? Scope::NetworkWide : Scope::SingleLink;
        if (have(ds, nn::toString(kind), toString(sc))) continue;
        nn::ArchDescriptor arch = opts.arch;
        arch.kind = kind;
        log(ds + ": training " + nn::toString(kind));
        auto res = nn::trainPredictor(x, graph, arch, opts.train);
        log(ds + ": " + nn::toString(kind) + " trained in " + std::to_string(res.seconds) + " s, eval NLL " +
            std::to_string(res.evalNll));
        if (!opts.modelDir.empty()) res.model.save(opts.modelDir + "/" + ds + "-" + nn::toString(kind) + ".atmw");
        auto model = std::make_shared<const nn::PredictorModel>(std::move(res.model));
        sink(measureCodec(ds, eval, CodecModel::neural(model, graph), topology, sc));
      }
    }
  }
}

std::string renderGrid(const std::vector<BenchRecord>& records, const std::string& methodA, const std::string& scenarioA,
                       const std::string& methodB, const std::string& scenarioB, const std::vector<int>& levels) {
  std::ostringstream o;
  o << methodA << " vs " << methodB << ", CR improvement %\n";
  o << std::setw(14) << "spatial\\temp";
  for (int t : levels) o << std::setw(10) << (std::to_string(t) + "%");
  o << '\n';
  std::vector<int> rows(levels.rbegin(), levels.rend());
  for (int s : rows) {
    o << std::setw(14) << (std::to_string(s) + "%");
    for (int t : levels) {
      const std::string ds = gridDatasetName(s, t);
      const auto a = findRecord(records, ds, methodA, scenarioA);
      const auto b = findRecord(records, ds, methodB, scenarioB);
      if (a && b) {
        std::ostringstream cell;
        cell << std::fixed << std::setprecision(1) << improvementPercent(a->cr, b->cr);
        o << std::setw(10) << cell.str();
      } else {
        o << std::setw(10) << "n/a";
      }
    }
    o << '\n';
  }
  return o.str();
}

std::string renderTable(const std::vector<BenchRecord>& records) {
  std::ostringstream o;
  o << std::left << std::setw(22) << "dataset" << std::setw(16) << "method" << std::setw(14) << "scenario" << std::right
    << std::setw(9) << "CR" << std::setw(9) << "CSV CR" << std::setw(12) << "bytes" << std::setw(12) << "raw"
    << std::setw(12) << "s/bin" << std::setw(10) << "model" << '\n';
  for (const auto& r : records) {
    o << std::left << std::setw(22) << r.dataset << std::setw(16) << r.method << std::setw(14) << r.scenario
      << std::right << std::fixed << std::setprecision(3) << std::setw(9) << r.cr << std::setw(9) << r.csvCr
      << std::setw(12) << r.compressedBytes << std::setw(12) << r.rawBytes << std::setprecision(5) << std::setw(12)
      << r.meanPerBinSeconds << std::setw(10) << r.modelSizeBytes << '\n';
  }
  return o.str();
}

std::string recordsToJson(const std::vector<BenchRecord>& records) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    arr.push_back({{"dataset", r.dataset},
                   {"method", r.method},
                   {"scenario", r.scenario},
                   {"cr", r.cr},
                   {"compressed_bytes", r.compressedBytes},
                   {"raw_bytes", r.rawBytes},
                   {"mean_per_bin_s", r.meanPerBinSeconds},
                   {"timing_reps", r.timingReps},
                   {"model_bytes", r.modelSizeBytes},
                   {"csv_cr", r.csvCr},
                   {"verified", r.verified}});
  }
  return arr.dump(2);
}

}  // namespace atom
