// atom: train, compress, decompress, synth, bench, report.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include "atom/bench.hpp"
#include "atom/bytes.hpp"
#include "atom/codec.hpp"
#include "atom/error.hpp"
#include "atom/nn/predictor.hpp"
#include "atom/synthgen.hpp"

using namespace atom;

namespace {

struct DataArgs {
  std::string topology;
  std::string data;
  std::size_t alphabet = SymbolAlphabet::kDefaultSize;
  bool identity = false;
};

void addDataArgs(CLI::App* cmd, DataArgs& a, bool needData = true) {
  cmd->add_option("--topology", a.topology, "topology file")->required()->check(CLI::ExistingFile);
  auto* d = cmd->add_option("--data", a.data, "traffic CSV")->check(CLI::ExistingFile);
  if (needData) d->required();
  cmd->add_option("--alphabet", a.alphabet, "alphabet size (power of two)");
  cmd->add_flag("--identity", a.identity, "CSV values are symbols already");
}

TrafficTensor loadData(const DataArgs& a, const Topology& topo) {
  CsvOptions o;
  o.alphabetSize = a.alphabet;
  o.identityQuantizer = a.identity;
  return ingestCsv(a.data, topo, o);
}

int exitCode(ErrorCode c) { return 10 + static_cast<int>(c); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lossless compression of multi-link traffic time series"};
  app.require_subcommand(1);

  // train
  DataArgs trainData;
  std::string trainArch = "stgnn", trainOut, lossOut;
  nn::ArchDescriptor arch;
  nn::TrainConfig tc;
  std::size_t window = 12;
  auto* train = app.add_subcommand("train", "train an RNN or ST-GNN predictor");
  addDataArgs(train, trainData);
  train->add_option("--arch", trainArch, "rnn | stgnn")->check(CLI::IsMember({"rnn", "stgnn"}));
  train->add_option("--window", window, "sliding window in bins");
  train->add_option("--hidden", arch.hiddenDim, "hidden dimension");
  train->add_option("--epochs", tc.epochs);
  train->add_option("--lr", tc.learningRate);
  train->add_option("--batch", tc.batchSize);
  train->add_option("--seed", tc.seed);
  train->add_option("--train-fraction", tc.trainFraction);
  train->add_option("--model,-o", trainOut, "output model file")->required();
  train->add_option("--loss-out", lossOut, "write the loss curve (epoch loss) here");

  // compress
  DataArgs compData;
  std::string compModel, compMethod = "neural", compOut, scenarioText = "network-wide";
  bool verify = false, embed = false;
  auto* comp = app.add_subcommand("compress", "compress a traffic CSV");
  addDataArgs(comp, compData);
  comp->add_option("--model", compModel, "predictor model file (neural method)");
  comp->add_option("--method", compMethod, "neural | static | adaptive | uniform")
      ->check(CLI::IsMember({"neural", "static", "adaptive", "uniform"}));
  comp->add_option("--scenario", scenarioText)->check(CLI::IsMember({"single-link", "network-wide"}));
  comp->add_option("--window", window, "window for non-neural methods");
  comp->add_flag("--verify", verify, "decompress and compare before reporting success");
  comp->add_flag("--embed-model", embed, "store the model weights in the container");
  comp->add_option("--out,-o", compOut, "container file")->required();

  // decompress
  std::string decTopo, decIn, decModel, decOut;
  auto* dec = app.add_subcommand("decompress", "restore a CSV from a container");
  dec->add_option("--topology", decTopo)->required()->check(CLI::ExistingFile);
  dec->add_option("--in,-i", decIn, "container file")->required()->check(CLI::ExistingFile);
  dec->add_option("--model", decModel, "predictor model file (unless embedded)");
  dec->add_option("--out,-o", decOut, "output CSV")->required();

  // synth
  std::string synTopo, synConfig, synOut;
  SynthConfig sc;
  bool realistic = false;
  auto* syn = app.add_subcommand("synth", "generate a synthetic dataset");
  syn->add_option("--topology", synTopo)->required()->check(CLI::ExistingFile);
  syn->add_option("--config", synConfig, "JSON synth config")->check(CLI::ExistingFile);
  syn->add_option("--spatial", sc.spatialLevel);
  syn->add_option("--temporal", sc.temporalLevel);
  syn->add_option("--bins", sc.bins);
  syn->add_option("--seed", sc.seed);
  syn->add_flag("--realistic", realistic, "diurnal traffic mix instead of sines");
  syn->add_option("--out,-o", synOut, "output CSV")->required();

  // bench
  DataArgs benchData;
  std::string benchOut = "bench.kv";
  bool grid = false, perBinGzip = false, full = false;
  GridOptions go;
  std::size_t timingReps = 5;
  auto* bench = app.add_subcommand("bench", "benchmark Atom against Static AC, Adaptive AC and DEFLATE");
  addDataArgs(bench, benchData, false);
  bench->add_flag("--grid", grid, "run the 4x4 synthetic correlation grid");
  bench->add_flag("--per-bin-gzip", perBinGzip, "also DEFLATE each bin on its own");
  bench->add_flag("--full", full, "larger grid runs (T=8000, more epochs)");
  bench->add_option("--epochs", go.train.epochs);
  bench->add_option("--hidden", go.arch.hiddenDim);
  bench->add_option("--window", go.arch.windowSize);
  bench->add_option("--seed", go.seed);
  bench->add_option("--timing-reps", timingReps, "timed repetitions per neural cell (dataset mode)");
  bench->add_option("--out,-o", benchOut, "key=value results file, appended and resumable");

  // report
  std::string repIn;
  bool repJson = false;
  auto* rep = app.add_subcommand("report", "render bench results");
  rep->add_option("--in,-i", repIn, "bench results file")->required()->check(CLI::ExistingFile);
  rep->add_flag("--json", repJson, "machine-readable output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      const Topology topo = Topology::load(trainData.topology);
      const TrafficTensor x = loadData(trainData, topo);
      arch.kind = nn::parseArchKind(trainArch);
      arch.windowSize = window;
      arch.alphabetSize = x.alphabet().size();
      tc.onEpoch = [](std::size_t e, double loss) { std::fprintf(stderr, "epoch %zu loss %.5f\n", e, loss); };
      const auto res = nn::trainPredictor(x, buildLinkGraph(topo), arch, tc);
      res.model.save(trainOut);
      if (!lossOut.empty()) {
        std::ofstream o(lossOut);
        for (std::size_t i = 0; i < res.lossHistory.size(); ++i) o << i + 1 << ' ' << res.lossHistory[i] << '\n';
      }
      std::cout << "model=" << trainOut << " arch=" << trainArch << " params=" << res.model.parameterCount()
                << " model_bytes=" << res.model.serialize().size() << " eval_nll=" << res.evalNll
                << " train_seconds=" << res.seconds << " checksum=" << toHex(res.model.checksum()) << '\n';
    } else if (*comp) {
      const Topology topo = Topology::load(compData.topology);
      const TrafficTensor x = loadData(compData, topo);
      const Scope scenario = parseScope(scenarioText);
      CodecModel m;
      if (compMethod == "neural") {
        if (compModel.empty()) throw AtomError(ErrorCode::InvalidArgument, "--model is required for the neural method");
        m = CodecModel::neural(std::make_shared<nn::PredictorModel>(nn::PredictorModel::load(compModel)), buildLinkGraph(topo));
      } else if (compMethod == "static") {
        m = CodecModel::fitted(fitStatic(x, scenario));
      } else if (compMethod == "adaptive") {
        m = CodecModel::adaptive(scenario, x.alphabet().size());
      } else {
        m = CodecModel::uniform(x.alphabet().size());
      }
      CodecOptions co;
      co.window = window;
      co.embedModel = embed;
      const AtomContainer c = compress(x, m, topo, scenario, co);
      const auto bytes = c.serialize();
      if (verify) {
        const TrafficTensor back = decompress(AtomContainer::deserialize(bytes), &m, topo);
        if (!(back == x)) throw AtomError(ErrorCode::CorruptContainer, "verification failed: round trip differs");
      }
      writeFile(compOut, bytes);
      std::cout << "container=" << compOut << " method=" << m.kind << " scenario=" << scenarioText
                << " compressed_bytes=" << bytes.size() << " raw_bytes=" << x.rawBytes()
                << " cr=" << compressionRatio(x.rawBytes(), bytes.size()) << " verified=" << (verify ? 1 : 0)
                << " clamped=" << x.clampCount() << '\n';
    } else if (*dec) {
      const Topology topo = Topology::load(decTopo);
      const AtomContainer c = AtomContainer::load(decIn);
      std::shared_ptr<const nn::PredictorModel> neural;
      if (!decModel.empty()) neural = std::make_shared<nn::PredictorModel>(nn::PredictorModel::load(decModel));
      const CodecModel m = modelForHeader(c.header, topo, neural);
      const TrafficTensor x = decompress(c, &m, topo);
      writeCsv(decOut, x, topo);
      std::cout << "csv=" << decOut << " bins=" << x.bins() << " links=" << x.links() << '\n';
    } else if (*syn) {
      const Topology topo = Topology::load(synTopo);
      TrafficTensor x;
      if (realistic) {
        RealisticConfig rc;
        rc.bins = sc.bins;
        rc.seed = sc.seed;
        x = generateRealistic(rc, topo);
      } else {
        if (!synConfig.empty()) sc = SynthConfig::load(synConfig);
        sc.topologyPath = synTopo;
        x = generate(sc, topo);
      }
      writeCsv(synOut, x, topo);
      const auto r = correlationReport(x);
      std::cout << "csv=" << synOut << " bins=" << x.bins() << " links=" << x.links()
                << " spatial_corr=" << r.meanPairwiseSpatialCorr << " lag1_autocorr=" << r.meanLag1AutoCorr << '\n';
    } else if (*bench) {
      const Topology topo = Topology::load(benchData.topology);
      auto done = loadRecords(benchOut);
      auto sink = [&](const BenchRecord& r) {
        appendRecord(benchOut, r);
        done.push_back(r);
        std::cout << r.toKeyValue() << std::endl;
      };
      if (grid) {
        go.perBinDeflate = perBinGzip;
        if (full) {
          go.bins = 8000;
          go.train.epochs *= 2;
        }
        go.log = [](const std::string& s) { std::cerr << s << std::endl; };
        runGrid(topo, go, done, sink);
        std::cout << renderGrid(done, "stgnn", "network-wide", "deflate", "n/a")
                  << renderGrid(done, "stgnn", "network-wide", "rnn", "single-link");
      } else {
        if (benchData.data.empty()) throw AtomError(ErrorCode::InvalidArgument, "bench needs --grid or --data");
        const TrafficTensor x = loadData(benchData, topo);
        const std::size_t split = nn::splitPoint(x.bins(), go.train.trainFraction);
        const TrafficTensor eval = x.slice(split, x.bins());
        const std::string ds = benchData.data;
        const LinkGraph g = buildLinkGraph(topo);
        auto have = [&](const std::string& method, Scope s) {
          return findRecord(done, ds, method, toString(s)).has_value();
        };
        if (!findRecord(done, ds, "deflate", "n/a")) {
          for (const auto& r : measureDeflate(ds, eval, topo, perBinGzip)) sink(r);
        }
        for (Scope s : {Scope::NetworkWide, Scope::SingleLink}) {
          if (!have("static", s)) sink(measureCodec(ds, eval, CodecModel::fitted(fitStatic(eval, s)), topo, s));
          if (!have("adaptive", s)) sink(measureCodec(ds, eval, CodecModel::adaptive(s, eval.alphabet().size()), topo, s));
        }
        for (auto kind : {nn::ArchKind::Stgnn, nn::ArchKind::Rnn}) {
          const Scope s = kind == nn::ArchKind::Stgnn ? Scope::NetworkWide : Scope::SingleLink;
          if (have(nn::toString(kind), s)) continue;
          nn::ArchDescriptor a = go.arch;
          a.kind = kind;
          a.alphabetSize = x.alphabet().size();
          auto res = nn::trainPredictor(x, g, a, go.train);
          auto model = std::make_shared<const nn::PredictorModel>(std::move(res.model));
          MeasureOptions mo;
          mo.timingReps = timingReps;
          mo.timingBins = 60;
          sink(measureCodec(ds, eval, CodecModel::neural(model, g), topo, s, mo));
        }
        std::cout << renderTable(done);
      }
    } else if (*rep) {
      const auto records = loadRecords(repIn);
      if (repJson) {
        std::cout << recordsToJson(records) << '\n';
      } else {
        std::cout << renderTable(records) << '\n';
        std::cout << renderGrid(records, "stgnn", "network-wide", "deflate", "n/a") << '\n';
        std::cout << renderGrid(records, "stgnn", "network-wide", "rnn", "single-link");
      }
    }
  } catch (const AtomError& e) {
    std::cerr << "error[" << toString(e.code()) << "]: " << e.what() << '\n';
    return exitCode(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error[Internal]: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
