// Acceptance run: one line per criterion, "criterion N: PASS|FAIL|SKIP ...".
// Expensive results (grid cells, trained models) are kept in --work so a
// rerun picks up where the last one stopped.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

#include "atom/arith_coder.hpp"
#include "atom/bench.hpp"
#include "atom/codec.hpp"
#include "atom/error.hpp"
#include "atom/nn/predictor.hpp"
#include "atom/synthgen.hpp"

using namespace atom;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  enum Kind { Pass, Fail, Skip } kind;
  std::string detail;
};

std::string fmt(double v, int prec = 3) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(prec);
  o << v;
  return o.str();
}

void logLine(const std::string& s) { std::cerr << "  " << s << std::endl; }

TrafficTensor randomTensor(std::size_t bins, std::size_t links, std::size_t A, std::mt19937_64& rng) {
  std::vector<Symbol> d(bins * links);
  // mix of smooth, constant and noisy columns
  const int style = static_cast<int>(rng() % 3);
  std::uniform_int_distribution<Symbol> any(0, static_cast<Symbol>(A - 1));
  for (std::size_t j = 0; j < links; ++j) {
    Symbol v = any(rng);
    for (std::size_t t = 0; t < bins; ++t) {
      if (style == 0) {
        v = any(rng);
      } else if (style == 1) {
        const int step = static_cast<int>(rng() % 5) - 2;
        v = static_cast<Symbol>(std::clamp<long>(static_cast<long>(v) + step, 0, static_cast<long>(A - 1)));
      }
      d[t * links + j] = v;
    }
  }
  return TrafficTensor(bins, links, std::move(d), SymbolAlphabet::identity(A));
}

Topology randomTopology(std::size_t nodes, std::mt19937_64& rng) {
  std::vector<std::string> ns;
  for (std::size_t i = 0; i < nodes; ++i) ns.push_back("v" + std::to_string(i));
  std::vector<DirectedLink> links;
  for (std::size_t i = 0; i + 1 < nodes; ++i) {
    links.push_back({ns[i], ns[i + 1]});
    if (rng() % 2) links.push_back({ns[i + 1], ns[i]});
  }
  if (nodes > 2 && rng() % 2) links.push_back({ns[nodes - 1], ns[0]});
  return Topology("rand" + std::to_string(nodes), ns, links);
}

std::shared_ptr<const nn::PredictorModel> randomNet(nn::ArchKind kind, std::size_t A, std::mt19937_64& rng) {
  nn::ArchDescriptor a;
  a.kind = kind;
  a.hiddenDim = 2 + rng() % 6;
  a.windowSize = 2 + rng() % 5;
  a.mlpLayers = {2 + rng() % 6};
  a.alphabetSize = A;
  a.minScale = 0.05;
  nn::PredictorModel m(a, rng());
  // spread the outputs so some predictions are sharp and some wide
  std::normal_distribution<double> n(0.0, 0.3);
  for (const char* name : {"lin.a", "lin.c"}) {
    auto& v = m.parameter(name).value;
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] += n(rng);
  }
  m.roundWeights();
  return std::make_shared<const nn::PredictorModel>(std::move(m));
}

CodecModel randomCodecModel(const TrafficTensor& x, const Topology& topo, Scope sc, std::mt19937_64& rng,
                            std::string& label) {
  const std::size_t A = x.alphabet().size();
  switch (rng() % 4) {
    case 0: label = "uniform"; return CodecModel::uniform(A);
    case 1: label = "static"; return CodecModel::fitted(fitStatic(x, sc));
    case 2: label = "adaptive"; return CodecModel::adaptive(sc, A);
    default: {
      const auto kind = sc == Scope::NetworkWide ? nn::ArchKind::Stgnn : nn::ArchKind::Rnn;
      label = nn::toString(kind);
      return CodecModel::neural(randomNet(kind, A, rng), buildLinkGraph(topo));
    }
  }
}

// 1
Outcome losslessness(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int trials = 240;
  int ok = 0;
  std::string firstFail;
  for (int i = 0; i < trials; ++i) {
    const auto topo = randomTopology(2 + rng() % 6, rng);
    const std::size_t A = std::size_t{1} << (1 + rng() % 12);
    const Scope sc = rng() % 2 ? Scope::NetworkWide : Scope::SingleLink;
    std::string label;
    const auto probe = randomTensor(40, topo.numLinks(), A, rng);
    auto model = randomCodecModel(probe, topo, sc, rng, label);
    const std::size_t w = model.window.value_or(1 + rng() % 8);
    const std::size_t bins = w + 1 + rng() % 60;
    const auto x = randomTensor(bins, topo.numLinks(), A, rng);
    if (label == "static") model = CodecModel::fitted(fitStatic(x, sc));
    CodecOptions o;
    o.window = w;
    o.embedModel = rng() % 2;
    try {
      const auto bytes = compress(x, model, topo, sc, o).serialize();
      const auto back = decompress(AtomContainer::deserialize(bytes), o.embedModel ? nullptr : &model, topo);
      if (back == x) {
        ++ok;
        continue;
      }
      if (firstFail.empty()) firstFail = "mismatch";
    } catch (const std::exception& e) {
      if (firstFail.empty()) firstFail = e.what();
    }
    if (firstFail.size() < 200) firstFail += " (trial " + std::to_string(i) + ", " + label + ", A=" + std::to_string(A) + ")";
  }
  std::string d = std::to_string(ok) + "/" + std::to_string(trials) + " exact round trips";
  if (ok != trials) d += "; first failure: " + firstFail;
  return {ok == trials ? Outcome::Pass : Outcome::Fail, d};
}

// 2
Outcome coderOptimality(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  int violations = 0;
  double worstExcess = -1e300;
  for (int s = 0; s < 100; ++s) {
    const std::size_t A = 2 + rng() % 2047;
    const std::size_t n = rng() % 5000;
    const double alpha = std::exp(std::uniform_real_distribution<double>(-3, 1)(rng));
    std::gamma_distribution<double> g(alpha, 1.0);
    std::vector<SymbolPmf> pmfs;
    std::vector<Symbol> seq;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> p(A);
      for (auto& v : p) v = g(rng);
      pmfs.push_back(quantizePmf(p));
      // every fourth schedule codes arbitrary symbols, not typical ones
      seq.push_back(s % 4 == 3 ? static_cast<Symbol>(rng() % A)
                               : pmfs.back().lookup(static_cast<std::uint32_t>(rng() % SymbolPmf::kTotal)));
    }
    double oracle = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      oracle += std::log2(static_cast<double>(SymbolPmf::kTotal)) - std::log2(static_cast<double>(pmfs[i].count(seq[i])));
    }
    ArithEncoder enc;
    for (std::size_t i = 0; i < n; ++i) enc.encode(seq[i], pmfs[i]);
    const auto bytes = enc.finish();
    const double excess = static_cast<double>(bytes.size()) * 8.0 - oracle;
    worstExcess = std::max(worstExcess, excess);
    ArithDecoder dec(bytes);
    bool same = dec.symbolCount() == n;
    for (std::size_t i = 0; same && i < n; ++i) same = dec.decode(pmfs[i]) == seq[i];
    if (excess > 64.0 || !same) ++violations;
  }
  return {violations == 0 ? Outcome::Pass : Outcome::Fail,
          std::to_string(violations) + " violations over 100 schedules; worst excess " + fmt(worstExcess, 1) +
              " bits (limit 64, stream trailer included)"};
}

// 3
Outcome gradients(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst[2] = {0, 0};
  for (int rep = 0; rep < 3; ++rep) {
    for (auto kind : {nn::ArchKind::Rnn, nn::ArchKind::Stgnn}) {
      nn::ArchDescriptor a;
      a.kind = kind;
      a.hiddenDim = 8;
      a.windowSize = 5;
      a.mlpLayers = {8};
      a.alphabetSize = 256;
      nn::PredictorModel m(a, rng());
      std::normal_distribution<double> n(0.0, 0.2);
      for (const char* name : {"lin.a", "lin.c", "lin.ai", "lin.ci"}) {
        auto& v = m.parameter(name).value;
        for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = n(rng);
      }
      const LinkGraph graph = buildLinkGraph(Topology("sq", {"a", "b", "c", "d"}, {{"a", "b"}, {"b", "c"}, {"c", "d"}, {"d", "a"}, {"b", "a"}}));
      const std::size_t links = kind == nn::ArchKind::Rnn ? 1 : graph.numLinks();
      const std::size_t samples = kind == nn::ArchKind::Rnn ? 8 : 2;
      const auto rows = static_cast<Eigen::Index>(links * samples);
      nn::GradSample s;
      s.input.links = links;
      s.input.window = nn::Mat(rows, 5);
      s.input.mask = nn::Mat::Zero(rows, 1);
      s.input.known = nn::Mat::Zero(rows, 1);
      s.target = nn::Mat(rows, 1);
      s.weights = nn::Mat(rows, 1);
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index t = 0; t < 5; ++t) s.input.window(r, t) = static_cast<double>(rng() % 256);
        s.target(r, 0) = static_cast<double>(rng() % 256);
        const bool k = kind == nn::ArchKind::Stgnn && rng() % 2;
        s.input.mask(r, 0) = k;
        s.input.known(r, 0) = k ? s.target(r, 0) : 0.0;
        s.weights(r, 0) = k ? 0.0 : 1.0;
      }
      const double e = nn::gradCheck(m, s, kind == nn::ArchKind::Stgnn ? &graph : nullptr);
      double& slot = worst[kind == nn::ArchKind::Rnn ? 0 : 1];
      slot = std::max(slot, e);
    }
  }
  const bool ok = worst[0] < 1e-4 && worst[1] < 1e-4;
  std::ostringstream d;
  d.setf(std::ios::scientific);
  d.precision(2);
  d << "max relative error rnn " << worst[0] << ", stgnn " << worst[1] << " (hidden 8, limit 1e-4)";
  return {ok ? Outcome::Pass : Outcome::Fail, d.str()};
}

// 8
Outcome streaming(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  int ok = 0;
  std::string firstFail;
  for (int i = 0; i < 20; ++i) {
    const auto topo = randomTopology(2 + rng() % 8, rng);
    const std::size_t A = std::size_t{1} << (2 + rng() % 9);
    const Scope sc = rng() % 2 ? Scope::NetworkWide : Scope::SingleLink;
    std::string label;
    auto probe = randomTensor(30, topo.numLinks(), A, rng);
    auto model = randomCodecModel(probe, topo, sc, rng, label);
    const std::size_t w = model.window.value_or(1 + rng() % 8);
    const auto x = randomTensor(w + 20 + rng() % 200, topo.numLinks(), A, rng);
    if (label == "static") model = CodecModel::fitted(fitStatic(x, sc));
    CodecOptions o;
    o.window = w;
    const auto batch = compress(x, model, topo, sc, o);
    StreamCompressor s(model, topo, sc, x.alphabet(), o);
    std::vector<std::vector<std::uint8_t>> streams(batch.streams.size());
    auto append = [&](const std::vector<std::vector<std::uint8_t>>& part) {
      for (std::size_t k = 0; k < part.size(); ++k) streams[k].insert(streams[k].end(), part[k].begin(), part[k].end());
    };
    for (std::size_t t = 0; t < x.bins(); ++t) append(s.push(x.row(t)));
    append(s.finish());
    if (streams == batch.streams && s.container().serialize() == batch.serialize()) {
      ++ok;
    } else if (firstFail.empty()) {
      firstFail = "dataset " + std::to_string(i) + " (" + label + ")";
    }
  }
  std::string d = std::to_string(ok) + "/20 byte-identical";
  if (ok != 20) d += "; first difference: " + firstFail;
  return {ok == 20 ? Outcome::Pass : Outcome::Fail, d};
}

struct Work {
  fs::path dir;
  std::string records() const { return (dir / "records.kv").string(); }
  std::string model(const std::string& name) const { return (dir / (name + ".atmw")).string(); }
};

std::vector<BenchRecord> ensureGrid(const Topology& nsf, const GridOptions& go, const Work& work) {
  auto done = loadRecords(work.records());
  runGrid(nsf, go, done, [&](const BenchRecord& r) {
    appendRecord(work.records(), r);
    done.push_back(r);
    logLine(r.toKeyValue());
  });
  return done;
}

// 4
Outcome gridVsDeflate(const std::vector<BenchRecord>& recs) {
  int wins = 0, cells = 0, strongHigh = 0;
  std::string weak;
  for (int s : {0, 30, 60, 100}) {
    for (int t : {0, 30, 60, 100}) {
      const auto ds = gridDatasetName(s, t);
      const auto a = findRecord(recs, ds, "stgnn", "network-wide");
      const auto b = findRecord(recs, ds, "deflate", "n/a");
      if (!a || !b) return {Outcome::Fail, "missing grid record for " + ds};
      ++cells;
      const double imp = improvementPercent(a->cr, b->cr);
      if (a->cr > b->cr) ++wins;
      if (t == 100) {
        if (imp >= 20.0) {
          ++strongHigh;
        } else {
          weak += " " + ds + "=" + fmt(imp, 1) + "%";
        }
      }
    }
  }
  const bool ok = wins >= 14 && strongHigh == 4;
  std::string d = "ST-GNN beats DEFLATE in " + std::to_string(wins) + "/" + std::to_string(cells) + " cells; " +
                  std::to_string(strongHigh) + "/4 temporal-100 cells at >= 20%";
  if (!weak.empty()) d += " (below:" + weak + ")";
  return {ok ? Outcome::Pass : Outcome::Fail, d};
}

// 5
Outcome spatialColumn(const std::vector<BenchRecord>& recs) {
  int ge = 0, gt = 0;
  std::string cells;
  for (int t : {0, 30, 60, 100}) {
    const auto ds = gridDatasetName(100, t);
    const auto a = findRecord(recs, ds, "stgnn", "network-wide");
    const auto b = findRecord(recs, ds, "rnn", "single-link");
    if (!a || !b) return {Outcome::Fail, "missing grid record for " + ds};
    if (a->cr >= b->cr) ++ge;
    if (a->cr > b->cr) ++gt;
    cells += " t" + std::to_string(t) + ":" + fmt(a->cr) + "/" + fmt(b->cr);
  }
  return {ge == 4 && gt >= 3 ? Outcome::Pass : Outcome::Fail,
          "ST-GNN >= RNN in " + std::to_string(ge) + "/4, strictly in " + std::to_string(gt) + "/4 (CR stgnn/rnn" + cells + ")"};
}

struct RealStyle {
  std::string name;
  BenchRecord stgnn, adaptive, statik, deflate;
};

RealStyle ensureRealStyle(const std::string& topoName, const Topology& topo, std::uint64_t seed, const GridOptions& go,
                          const Work& work) {
  const std::string ds = "realistic-" + topoName;
  auto done = loadRecords(work.records());
  auto sink = [&](const BenchRecord& r) {
    appendRecord(work.records(), r);
    done.push_back(r);
    logLine(r.toKeyValue());
  };
  RealisticConfig rc;
  rc.bins = 2000;
  rc.seed = seed;
  const auto x = generateRealistic(rc, topo);
  const auto split = nn::splitPoint(x.bins(), go.train.trainFraction);
  const auto eval = x.slice(split, x.bins());
  const auto nw = Scope::NetworkWide;
  if (!findRecord(done, ds, "deflate", "n/a")) {
    for (const auto& r : measureDeflate(ds, eval, topo, false)) sink(r);
  }
  if (!findRecord(done, ds, "static", toString(nw))) sink(measureCodec(ds, eval, CodecModel::fitted(fitStatic(eval, nw)), topo, nw));
  if (!findRecord(done, ds, "adaptive", toString(nw))) {
    sink(measureCodec(ds, eval, CodecModel::adaptive(nw, eval.alphabet().size()), topo, nw));
  }
  if (!findRecord(done, ds, "stgnn", toString(nw))) {
    const auto graph = buildLinkGraph(topo);
    std::shared_ptr<const nn::PredictorModel> model;
    if (fs::exists(work.model(ds + "-stgnn"))) {
      model = std::make_shared<const nn::PredictorModel>(nn::PredictorModel::load(work.model(ds + "-stgnn")));
    } else {
      nn::ArchDescriptor a = go.arch;
      a.kind = nn::ArchKind::Stgnn;
      a.alphabetSize = x.alphabet().size();
      logLine(ds + ": training stgnn");
      auto res = nn::trainPredictor(x, graph, a, go.train);
      logLine(ds + ": trained in " + fmt(res.seconds, 1) + " s, eval NLL " + fmt(res.evalNll, 4));
      res.model.save(work.model(ds + "-stgnn"));
      model = std::make_shared<const nn::PredictorModel>(std::move(res.model));
    }
    MeasureOptions mo;
    mo.timingReps = 3;
    mo.timingBins = 60;
    sink(measureCodec(ds, eval, CodecModel::neural(model, graph), topo, nw, mo));
  }
  RealStyle r;
  r.name = ds;
  r.stgnn = *findRecord(done, ds, "stgnn", "network-wide");
  r.adaptive = *findRecord(done, ds, "adaptive", "network-wide");
  r.statik = *findRecord(done, ds, "static", "network-wide");
  r.deflate = *findRecord(done, ds, "deflate", "n/a");
  return r;
}

// 6
Outcome baselineOrdering(const std::vector<RealStyle>& sets) {
  bool ok = true;
  std::string d;
  for (const auto& s : sets) {
    const double vsStatic = improvementPercent(s.stgnn.cr, s.statik.cr);
    const bool good = s.stgnn.cr > s.adaptive.cr && s.stgnn.cr > s.statik.cr && s.stgnn.cr > s.deflate.cr && vsStatic >= 15.0;
    ok = ok && good;
    d += (d.empty() ? "" : "; ") + s.name + ": stgnn " + fmt(s.stgnn.cr) + ", adaptive " + fmt(s.adaptive.cr) + ", static " +
         fmt(s.statik.cr) + ", deflate " + fmt(s.deflate.cr) + ", +" + fmt(vsStatic, 1) + "% over static";
  }
  return {ok ? Outcome::Pass : Outcome::Fail, d};
}

// 7
Outcome realData(const fs::path& dataDir, const GridOptions& go) {
  const fs::path real = dataDir / "real";
  std::vector<std::pair<fs::path, fs::path>> pairs;
  for (const char* name : {"abilene", "geant"}) {
    const auto csv = real / (std::string(name) + ".csv");
    if (fs::exists(csv)) pairs.emplace_back(csv, dataDir / "topologies" / (std::string(name) + ".topo"));
  }
  if (pairs.empty()) return {Outcome::Skip, "informational; no CSVs under " + real.string()};
  std::string d;
  for (const auto& [csv, topoPath] : pairs) {
    const auto topo = Topology::load(topoPath.string());
    const auto x = ingestCsv(csv.string(), topo);
    const auto graph = buildLinkGraph(topo);
    nn::ArchDescriptor a = go.arch;
    a.kind = nn::ArchKind::Stgnn;
    a.alphabetSize = x.alphabet().size();
    auto res = nn::trainPredictor(x, graph, a, go.train);
    const auto eval = x.slice(res.trainBins, x.bins());
    auto model = std::make_shared<const nn::PredictorModel>(std::move(res.model));
    const auto bytes = compress(eval, CodecModel::neural(model, graph), topo, Scope::NetworkWide).serialize().size();
    std::ostringstream text;
    text << toCsv(eval, topo);
    const double cr = static_cast<double>(text.str().size()) / static_cast<double>(bytes);
    d += (d.empty() ? "" : "; ") + csv.filename().string() + " CR vs CSV " + fmt(cr, 2) +
         (cr >= 2.0 && cr <= 5.0 ? " (inside [2, 5])" : " (outside [2, 5])");
  }
  return {Outcome::Skip, "informational; " + d};
}

// 9
Outcome costAndSize(const RealStyle& geant, const Work& work) {
  const double perBin = geant.stgnn.meanPerBinSeconds;
  const std::size_t size = fs::exists(work.model(geant.name + "-stgnn")) ? fs::file_size(work.model(geant.name + "-stgnn"))
                                                                        : geant.stgnn.modelSizeBytes;
  const bool ok = perBin < 10.0 && size < 1'000'000;
  return {ok ? Outcome::Pass : Outcome::Fail, "72-link mean per-bin compression " + fmt(perBin * 1000.0, 2) +
                                                   " ms (limit 10 s), model file " + std::to_string(size) + " bytes (limit 1 MB)"};
}

// 10
Outcome maskBenefit(const Topology& nsf, const GridOptions& go, const Work& work) {
  const int s = 100, t = 60;
  const auto ds = gridDatasetName(s, t);
  const auto x = gridDataset(nsf, go, s, t);
  const auto graph = buildLinkGraph(nsf);
  nn::PredictorModel model;
  if (fs::exists(work.model(ds + "-stgnn"))) {
    model = nn::PredictorModel::load(work.model(ds + "-stgnn"));
  } else {
    nn::ArchDescriptor a = go.arch;
    a.kind = nn::ArchKind::Stgnn;
    logLine(ds + ": training stgnn for the mask check");
    model = nn::trainPredictor(x, graph, a, go.train).model;
    model.save(work.model(ds + "-stgnn"));
  }
  const auto split = nn::splitPoint(x.bins(), go.train.trainFraction);
  std::size_t n = 0;
  const double full = nn::evaluateNll(model, x, graph, split, x.bins(), nn::MaskMode::AllOthers, &n);
  const double empty = nn::evaluateNll(model, x, graph, split, x.bins(), nn::MaskMode::None);
  const bool ok = full <= empty && n >= 1000;
  return {ok ? Outcome::Pass : Outcome::Fail, ds + ": NLL all-others-known " + fmt(full, 4) + " vs empty mask " + fmt(empty, 4) +
                                                  " nats over " + std::to_string(n) + " samples"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string dataDir = "data";
  std::string workDir = "acceptance-work";
  std::uint64_t seed = 20240601;
  std::vector<int> only;
  app.add_option("--data-dir", dataDir);
  app.add_option("--work", workDir, "cache for grid records and trained models");
  app.add_option("--seed", seed);
  app.add_option("--only", only, "run just these criteria");
  CLI11_PARSE(app, argc, argv);

  Work work{workDir};
  fs::create_directories(work.dir);
  GridOptions go;  // T = 2000, default architecture and training
  go.modelDir = work.dir.string();
  go.log = logLine;

  auto want = [&](int c) { return only.empty() || std::find(only.begin(), only.end(), c) != only.end(); };
  int failures = 0;
  auto report = [&](int c, const std::function<Outcome()>& fn) {
    if (!want(c)) return;
    const auto start = std::chrono::steady_clock::now();
    Outcome o{Outcome::Fail, ""};
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {Outcome::Fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* tag = o.kind == Outcome::Pass ? "PASS" : o.kind == Outcome::Fail ? "FAIL" : "SKIP";
    if (o.kind == Outcome::Fail) ++failures;
    std::cout << "criterion " << c << ": " << tag << " - " << o.detail << " [" << fmt(secs, 1) << " s]" << std::endl;
  };

  report(1, [&] { return losslessness(seed + 1); });
  report(2, [&] { return coderOptimality(seed + 2); });
  report(3, [&] { return gradients(seed + 3); });

  const auto topoDir = fs::path(dataDir) / "topologies";
  std::vector<BenchRecord> grid;
  std::optional<Topology> nsf;
  auto loadGrid = [&] {
    if (!nsf) nsf = Topology::load((topoDir / "nsfnet.topo").string());
    if (grid.empty()) grid = ensureGrid(*nsf, go, work);
  };
  report(4, [&] {
    loadGrid();
    return gridVsDeflate(grid);
  });
  report(5, [&] {
    loadGrid();
    return spatialColumn(grid);
  });

  std::vector<RealStyle> real;
  auto loadReal = [&] {
    if (!real.empty()) return;
    real.push_back(ensureRealStyle("abilene", Topology::load((topoDir / "abilene.topo").string()), seed + 6, go, work));
    real.push_back(ensureRealStyle("geant", Topology::load((topoDir / "geant.topo").string()), seed + 7, go, work));
  };
  report(6, [&] {
    loadReal();
    return baselineOrdering(real);
  });
  report(7, [&] { return realData(dataDir, go); });
  report(8, [&] { return streaming(seed + 8); });
  report(9, [&] {
    loadReal();
    return costAndSize(real[1], work);
  });
  report(10, [&] {
    if (!nsf) nsf = Topology::load((topoDir / "nsfnet.topo").string());
    return maskBenefit(*nsf, go, work);
  });

  std::cout << (failures == 0 ? "all gating criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
