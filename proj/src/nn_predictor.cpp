#include "atom/nn/predictor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "atom/bytes.hpp"
#include "atom/error.hpp"

namespace atom::nn {

namespace {

constexpr char kMagic[4] = {'A', 'T', 'M', 'W'};
constexpr double kLinearLrScale = 0.01;
constexpr double kOffsetGain = 10.0;
constexpr double kBlendBias = -3.0;  // neighbour-mean gate starts mostly closed

Mat glorot(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double gain = 1.0) {
  const double limit = gain * std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> u(-limit, limit);
  Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = u(rng);
  }
  return m;
}

Mat uniformInit(std::size_t rows, std::size_t cols, double limit, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-limit, limit);
  Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = u(rng);
  }
  return m;
}

Mat zeros(std::size_t rows, std::size_t cols) {
  return Mat::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

void addMlp(std::vector<Parameter>& ps, const std::string& prefix, std::size_t in,
            const std::vector<std::size_t>& hidden, std::size_t out, std::mt19937_64& rng, double lastGain) {
  std::size_t prev = in;
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    ps.emplace_back(prefix + ".w" + std::to_string(i), glorot(prev, hidden[i], rng));
    ps.emplace_back(prefix + ".b" + std::to_string(i), zeros(1, hidden[i]));
    prev = hidden[i];
  }
  const auto last = std::to_string(hidden.size());
  ps.emplace_back(prefix + ".w" + last, glorot(prev, out, rng, lastGain));
  ps.emplace_back(prefix + ".b" + last, zeros(1, out));
}

Var mlp(Tape& t, PredictorModel& m, const std::string& prefix, Var x, std::size_t hiddenLayers) {
  Var h = x;
  for (std::size_t i = 0; i <= hiddenLayers; ++i) {
    const auto k = std::to_string(i);
    h = t.addRow(t.matmul(h, t.param(m.parameter(prefix + ".w" + k))), t.param(m.parameter(prefix + ".b" + k)));
    if (i < hiddenLayers) h = t.tanh(h);
  }
  return h;
}

Var gruCell(Tape& t, PredictorModel& m, Var x, Var h, std::size_t hd) {
  const Var gx = t.addRow(t.matmul(x, t.param(m.parameter("gru.wx"))), t.param(m.parameter("gru.bx")));
  const Var gh = t.addRow(t.matmul(h, t.param(m.parameter("gru.wh"))), t.param(m.parameter("gru.bh")));
  const Var r = t.sigmoid(t.add(t.sliceCols(gx, 0, hd), t.sliceCols(gh, 0, hd)));
  const Var z = t.sigmoid(t.add(t.sliceCols(gx, hd, hd), t.sliceCols(gh, hd, hd)));
  const Var n = t.tanh(t.add(t.sliceCols(gx, 2 * hd, hd), t.mul(r, t.sliceCols(gh, 2 * hd, hd))));
  return t.add(t.mul(t.oneMinus(z), n), t.mul(z, h));
}

// Known-neighbour summary for the target bin: flag and mean known value
// (symbol units, falls back to the link's last value).
void neighbourSummary(const ForwardInput& in, const LinkGraph* graph, Mat& has, Mat& mean) {
  const Eigen::Index rows = in.window.rows();
  const Eigen::Index w = in.window.cols();
  has = Mat::Zero(rows, 1);
  mean = in.window.col(w - 1);
  if (!graph || in.mask.size() == 0) return;
  const auto links = static_cast<Eigen::Index>(in.links);
  for (Eigen::Index s = 0; s < rows / links; ++s) {
    for (Eigen::Index i = 0; i < links; ++i) {
      double sum = 0.0;
      int count = 0;
      for (std::size_t k : graph->neighbors(static_cast<std::size_t>(i))) {
        const Eigen::Index r = s * links + static_cast<Eigen::Index>(k);
        if (in.mask(r, 0) != 0.0) {
          sum += in.known(r, 0);
          ++count;
        }
      }
      if (count > 0) {
        has(s * links + i, 0) = 1.0;
        mean(s * links + i, 0) = sum / count;
      }
    }
  }
}

Mat features(const ArchDescriptor& a, const ForwardInput& in, std::size_t t, const Mat& has, const Mat& mean) {
  const double norm = 1.0 / static_cast<double>(a.alphabetSize - 1);
  const Eigen::Index rows = in.window.rows();
  Mat f = Mat::Zero(rows, static_cast<Eigen::Index>(a.featureDim()));
  f.col(0) = in.window.col(static_cast<Eigen::Index>(t)) * norm;
  if (a.kind == ArchKind::Stgnn && t + 1 == a.windowSize && in.mask.size() != 0) {
    const Eigen::Index last = in.window.cols() - 1;
    f.col(1) = in.mask;
    f.col(2) = in.known.cwiseProduct(in.mask) * norm;
    f.col(3) = has;
    f.col(4) = (mean - in.window.col(last)).cwiseProduct(has) * (norm * kOffsetGain);
  }
  return f;
}

Mat initialHidden(const ArchDescriptor& a, const ForwardInput& in) {
  Mat h = Mat::Zero(in.window.rows(), static_cast<Eigen::Index>(a.hiddenDim));
  h.col(0) = in.window.col(0) / static_cast<double>(a.alphabetSize - 1);
  return h;
}

Var recurrentStep(Tape& t, PredictorModel& m, Var h, const Mat& f, const LinkGraph* graph, std::size_t links) {
  const ArchDescriptor& a = m.arch();
  const Var fv = t.constant(f);
  if (a.kind == ArchKind::Rnn) return gruCell(t, m, fv, h, a.hiddenDim);
  const Var msg = mlp(t, m, "msg", t.concatCols({h, fv}), a.mlpLayers.size());
  Var agg;
  if (graph && graph->numLinks() == links) {
    agg = t.neighborSum(msg, *graph);
  } else {
    agg = t.constant(Mat::Zero(t.value(msg).rows(), t.value(msg).cols()));
  }
  return gruCell(t, m, t.concatCols({agg, fv}), h, a.hiddenDim);
}

HeadVars readout(Tape& t, PredictorModel& m, Var h, const Mat& window, const Mat& has, const Mat& mean) {
  const ArchDescriptor& a = m.arch();
  const double unit = a.outputScale();
  const double top = static_cast<double>(a.alphabetSize - 1);
  const Var o = mlp(t, m, "out", h, a.mlpLayers.size());
  const Var win = t.constant(window);
  const Var lin1 = t.addRow(t.matmul(win, t.param(m.parameter("lin.a"))), t.scale(t.param(m.parameter("lin.ai")), top));
  const Var lin2 = t.addRow(t.matmul(win, t.param(m.parameter("lin.c"))), t.scale(t.param(m.parameter("lin.ci")), top));
  const Var g = t.sigmoid(t.sliceCols(o, 2, 1));
  Var mu = t.add(t.mul(g, lin1), t.mul(t.oneMinus(g), lin2));
  if (a.kind == ArchKind::Stgnn) {
    const Var s = t.mul(t.sigmoid(t.sliceCols(o, 3, 1)), t.constant(has));
    mu = t.add(t.mul(t.oneMinus(s), mu), t.mul(s, t.constant(mean)));
  }
  mu = t.add(mu, t.scale(t.sliceCols(o, 0, 1), unit));
  const Var b = t.clampMin(t.scale(t.softplus(t.sliceCols(o, 1, 1)), unit), a.minScale);
  return {mu, b};
}

void checkInput(const ArchDescriptor& a, const ForwardInput& in) {
  if (static_cast<std::size_t>(in.window.cols()) != a.windowSize) {
    throw AtomError(ErrorCode::ShapeMismatch, "window has " + std::to_string(in.window.cols()) +
                                                  " bins, model expects " + std::to_string(a.windowSize));
  }
  if (in.links == 0 || in.window.rows() % static_cast<Eigen::Index>(in.links) != 0) {
    throw AtomError(ErrorCode::ShapeMismatch, "window rows are not a multiple of the link count");
  }
  if (in.mask.size() != 0 && (in.mask.rows() != in.window.rows() || in.known.rows() != in.window.rows())) {
    throw AtomError(ErrorCode::ShapeMismatch, "mask/known rows differ from window rows");
  }
}

std::vector<LaplaceParams> toParams(const Mat& mu, const Mat& b) {
  std::vector<LaplaceParams> out(static_cast<std::size_t>(mu.rows()));
  for (Eigen::Index i = 0; i < mu.rows(); ++i) out[static_cast<std::size_t>(i)] = {mu(i, 0), b(i, 0)};
  return out;
}

// Window of one sample as a links x w matrix (row = link).
Mat windowMatrix(std::span<const Symbol> window, std::size_t w, std::size_t links) {
  Mat m(static_cast<Eigen::Index>(links), static_cast<Eigen::Index>(w));
  for (std::size_t t = 0; t < w; ++t) {
    for (std::size_t j = 0; j < links; ++j) {
      m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(t)) = window[t * links + j];
    }
  }
  return m;
}

double normalCdf(double x, double mu, double sigma) { return 0.5 * std::erfc(-(x - mu) / (sigma * std::sqrt(2.0))); }

}  // namespace

const char* toString(ArchKind kind) noexcept { return kind == ArchKind::Rnn ? "rnn" : "stgnn"; }

ArchKind parseArchKind(const std::string& text) {
  if (text == "rnn") return ArchKind::Rnn;
  if (text == "stgnn") return ArchKind::Stgnn;
  throw AtomError(ErrorCode::InvalidArgument, "unknown architecture '" + text + "'");
}

void ArchDescriptor::validate() const {
  if (hiddenDim < 1) throw AtomError(ErrorCode::InvalidArgument, "hiddenDim must be >= 1");
  if (windowSize < 2) throw AtomError(ErrorCode::InvalidArgument, "window size must be >= 2");
  for (auto wdt : mlpLayers) {
    if (wdt < 1) throw AtomError(ErrorCode::InvalidArgument, "MLP widths must be >= 1");
  }
  if (alphabetSize < 2) throw AtomError(ErrorCode::InvalidArgument, "alphabet too small");
  if (!(minScale > 0) || !std::isfinite(minScale)) throw AtomError(ErrorCode::InvalidArgument, "minScale must be > 0");
}

PredictorModel::PredictorModel(const ArchDescriptor& arch, std::uint64_t seed) : arch_(arch) {
  arch_.validate();
  std::mt19937_64 rng(seed);
  const std::size_t h = arch_.hiddenDim;
  const std::size_t f = arch_.featureDim();
  const std::size_t gruIn = arch_.kind == ArchKind::Rnn ? f : h + f;
  const double lim = 1.0 / std::sqrt(static_cast<double>(h));
  params_.emplace_back("gru.wx", uniformInit(gruIn, 3 * h, lim, rng));
  params_.emplace_back("gru.wh", uniformInit(h, 3 * h, lim, rng));
  params_.emplace_back("gru.bx", uniformInit(1, 3 * h, lim, rng));
  params_.emplace_back("gru.bh", uniformInit(1, 3 * h, lim, rng));
  if (arch_.kind == ArchKind::Stgnn) addMlp(params_, "msg", h + f, arch_.mlpLayers, h, rng, 1.0);
  addMlp(params_, "out", h, arch_.mlpLayers, arch_.headDim(), rng, 0.1);
  if (arch_.kind == ArchKind::Stgnn) params_.back().value(0, 3) = kBlendBias;
  const std::size_t w = arch_.windowSize;
  Mat a = zeros(w, 1);
  a(static_cast<Eigen::Index>(w) - 1, 0) = 1.0;
  params_.emplace_back("lin.a", a, kLinearLrScale);
  params_.emplace_back("lin.ai", zeros(1, 1), kLinearLrScale);
  params_.emplace_back("lin.c", Mat::Constant(static_cast<Eigen::Index>(w), 1, 1.0 / static_cast<double>(w)),
                       kLinearLrScale);
  params_.emplace_back("lin.ci", zeros(1, 1), kLinearLrScale);
  roundWeights();
}

std::vector<Parameter*> PredictorModel::parameterPointers() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

Parameter& PredictorModel::parameter(const std::string& name) {
  for (auto& p : params_) {
    if (p.name == name) return p;
  }
  throw AtomError(ErrorCode::InvalidArgument, "model has no weight '" + name + "'");
}

const Parameter& PredictorModel::parameter(const std::string& name) const {
  return const_cast<PredictorModel*>(this)->parameter(name);
}

std::size_t PredictorModel::parameterCount() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

void PredictorModel::zeroWeights() {
  for (auto& p : params_) p.value.setZero();
}

void PredictorModel::roundWeights() {
  for (auto& p : params_) roundToFloat(p.value);
}

std::vector<std::uint8_t> PredictorModel::serialize() const {
  ByteWriter w;
  w.bytes({reinterpret_cast<const std::uint8_t*>(kMagic), 4});
  w.u32(kFormatVersion);
  w.u8(static_cast<std::uint8_t>(arch_.kind));
  w.u8(static_cast<std::uint8_t>(arch_.distribution));
  w.u32(static_cast<std::uint32_t>(arch_.alphabetSize));
  w.u32(static_cast<std::uint32_t>(arch_.hiddenDim));
  w.u32(static_cast<std::uint32_t>(arch_.windowSize));
  w.u32(static_cast<std::uint32_t>(arch_.mlpLayers.size()));
  for (auto wdt : arch_.mlpLayers) w.u32(static_cast<std::uint32_t>(wdt));
  w.f64(arch_.minScale);
  w.u32(static_cast<std::uint32_t>(params_.size()));
  for (const auto& p : params_) {
    w.str(p.name);
    w.u32(static_cast<std::uint32_t>(p.value.rows()));
    w.u32(static_cast<std::uint32_t>(p.value.cols()));
    for (Eigen::Index i = 0; i < p.value.rows(); ++i) {
      for (Eigen::Index j = 0; j < p.value.cols(); ++j) w.f32(static_cast<float>(p.value(i, j)));
    }
  }
  const Digest d = sha256(std::span<const std::uint8_t>(w.buffer()));
  w.bytes(d);
  return w.take();
}

PredictorModel PredictorModel::deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 + 32 || !std::equal(kMagic, kMagic + 4, bytes.begin())) {
    throw AtomError(ErrorCode::CorruptContainer, "not a model file (bad magic)");
  }
  const auto body = bytes.first(bytes.size() - 32);
  const Digest stored = [&] {
    Digest d{};
    std::copy(bytes.end() - 32, bytes.end(), d.begin());
    return d;
  }();
  if (sha256(body) != stored) throw AtomError(ErrorCode::ChecksumMismatch, "model file checksum does not match its weights");
  ByteReader r(body, "model file");
  r.bytes(4);
  const auto version = r.u32();
  if (version != kFormatVersion) {
    throw AtomError(ErrorCode::CorruptContainer, "unsupported model format version " + std::to_string(version));
  }
  ArchDescriptor a;
  const auto kind = r.u8();
  const auto dist = r.u8();
  if (kind > 1 || dist > 1) throw AtomError(ErrorCode::CorruptContainer, "bad architecture descriptor");
  a.kind = static_cast<ArchKind>(kind);
  a.distribution = static_cast<Distribution>(dist);
  a.alphabetSize = r.u32();
  a.hiddenDim = r.u32();
  a.windowSize = r.u32();
  const auto layers = r.u32();
  if (layers > 64) throw AtomError(ErrorCode::CorruptContainer, "too many MLP layers");
  a.mlpLayers.assign(layers, 0);
  for (auto& wdt : a.mlpLayers) wdt = r.u32();
  a.minScale = r.f64();
  a.validate();
  PredictorModel m(a, 0);
  const auto count = r.u32();
  if (count != m.params_.size()) throw AtomError(ErrorCode::CorruptContainer, "weight count does not match architecture");
  for (auto& p : m.params_) {
    const std::string name = r.str();
    const auto rows = r.u32();
    const auto cols = r.u32();
    if (name != p.name || rows != p.value.rows() || cols != p.value.cols()) {
      throw AtomError(ErrorCode::CorruptContainer, "weight '" + name + "' does not match architecture");
    }
    for (Eigen::Index i = 0; i < p.value.rows(); ++i) {
      for (Eigen::Index j = 0; j < p.value.cols(); ++j) p.value(i, j) = r.f32();
    }
  }
  if (!r.done()) throw AtomError(ErrorCode::CorruptContainer, "trailing bytes in model file");
  return m;
}

void PredictorModel::save(const std::string& path) const { writeFile(path, serialize()); }

PredictorModel PredictorModel::load(const std::string& path) { return deserialize(readFile(path)); }

Digest PredictorModel::checksum() const {
  const auto bytes = serialize();
  Digest d{};
  std::copy(bytes.end() - 32, bytes.end(), d.begin());
  return d;
}

HeadVars buildForward(Tape& t, PredictorModel& m, const ForwardInput& in, const LinkGraph* graph) {
  const ArchDescriptor& a = m.arch();
  checkInput(a, in);
  Mat has, mean;
  if (a.kind == ArchKind::Stgnn) {
    neighbourSummary(in, graph, has, mean);
  } else {
    has = Mat::Zero(in.window.rows(), 1);
    mean = in.window.col(in.window.cols() - 1);
  }
  Var h = t.constant(initialHidden(a, in));
  for (std::size_t step = 0; step < a.windowSize; ++step) {
    h = recurrentStep(t, m, h, features(a, in, step, has, mean), graph, in.links);
  }
  return readout(t, m, h, in.window, has, mean);
}

LaplaceParams forwardRnn(const PredictorModel& model, std::span<const Symbol> window) {
  const ArchDescriptor& a = model.arch();
  if (a.kind != ArchKind::Rnn) throw AtomError(ErrorCode::ScenarioMismatch, "forwardRnn needs an RNN model");
  if (window.size() != a.windowSize) {
    throw AtomError(ErrorCode::ShapeMismatch, "window has " + std::to_string(window.size()) + " bins, model expects " +
                                                  std::to_string(a.windowSize));
  }
  ForwardInput in;
  in.window = windowMatrix(window, a.windowSize, 1);
  Tape t(false);
  const auto head = buildForward(t, const_cast<PredictorModel&>(model), in, nullptr);
  return {t.value(head.mu)(0, 0), t.value(head.b)(0, 0)};
}

std::vector<LaplaceParams> forwardStgnn(const PredictorModel& model, const ModelContext& ctx) {
  if (model.arch().kind != ArchKind::Stgnn) throw AtomError(ErrorCode::ScenarioMismatch, "forwardStgnn needs an ST-GNN model");
  if (!ctx.graph) throw AtomError(ErrorCode::InvalidArgument, "ST-GNN context needs a link graph");
  StgnnBinState state(model, *ctx.graph, ctx.window);
  return state.finish(ctx.mask, ctx.known);
}

StgnnBinState::StgnnBinState(const PredictorModel& model, const LinkGraph& graph, std::span<const Symbol> window)
    : model_(&model), graph_(&graph) {
  const ArchDescriptor& a = model.arch();
  if (a.kind != ArchKind::Stgnn) throw AtomError(ErrorCode::ScenarioMismatch, "ST-GNN state needs an ST-GNN model");
  const std::size_t links = graph.numLinks();
  if (links == 0 || window.size() != a.windowSize * links) {
    throw AtomError(ErrorCode::ShapeMismatch, "window has " + std::to_string(window.size()) + " symbols, expected " +
                                                  std::to_string(a.windowSize * links));
  }
  ForwardInput in;
  in.window = windowMatrix(window, a.windowSize, links);
  in.links = links;
  window_ = in.window;
  Mat has = Mat::Zero(in.window.rows(), 1);
  Mat mean = in.window.col(in.window.cols() - 1);
  Tape t(false);
  auto& m = const_cast<PredictorModel&>(model);
  Var h = t.constant(initialHidden(a, in));
  for (std::size_t step = 0; step + 1 < a.windowSize; ++step) {
    h = recurrentStep(t, m, h, features(a, in, step, has, mean), graph_, links);
  }
  hidden_ = t.value(h);
}

std::vector<LaplaceParams> StgnnBinState::finish(std::span<const std::uint8_t> mask,
                                                 std::span<const Symbol> known) const {
  const ArchDescriptor& a = model_->arch();
  const auto links = static_cast<Eigen::Index>(graph_->numLinks());
  ForwardInput in;
  in.window = window_;
  in.links = graph_->numLinks();
  in.mask = Mat::Zero(links, 1);
  in.known = Mat::Zero(links, 1);
  if (!mask.empty()) {
    if (mask.size() != in.links || known.size() != in.links) throw AtomError(ErrorCode::ShapeMismatch, "mask length");
    for (Eigen::Index j = 0; j < links; ++j) {
      if (mask[static_cast<std::size_t>(j)]) {
        in.mask(j, 0) = 1.0;
        in.known(j, 0) = known[static_cast<std::size_t>(j)];
      }
    }
  }
  Mat has, mean;
  neighbourSummary(in, graph_, has, mean);
  Tape t(false);
  auto& m = const_cast<PredictorModel&>(*model_);
  Var h = t.constant(hidden_);
  h = recurrentStep(t, m, h, features(a, in, a.windowSize - 1, has, mean), graph_, in.links);
  const auto head = readout(t, m, h, in.window, has, mean);
  return toParams(t.value(head.mu), t.value(head.b));
}

SymbolPmf headPmf(const ArchDescriptor& arch, const LaplaceParams& params) {
  if (arch.distribution == Distribution::Laplace) return laplacePmf(params, arch.alphabetSize);
  const std::size_t n = arch.alphabetSize;
  std::vector<double> p(n);
  double prev = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double c = normalCdf(static_cast<double>(k) + 0.5, params.mu, params.b);
    p[k] = std::max(0.0, c - prev);
    prev = c;
  }
  p[n - 1] = std::max(0.0, 1.0 - prev);
  return quantizePmf(p);
}

NeuralModel::NeuralModel(std::shared_ptr<const PredictorModel> model, LinkGraph graph)
    : model_(std::move(model)), graph_(std::move(graph)) {
  if (!model_) throw AtomError(ErrorCode::InvalidArgument, "null predictor model");
}

void NeuralModel::check(const ModelContext& ctx) const {
  ctx.validate();
  if (ctx.windowBins != model_->arch().windowSize) {
    throw AtomError(ErrorCode::ShapeMismatch, "context window of " + std::to_string(ctx.windowBins) +
                                                  " bins, model expects " + std::to_string(model_->arch().windowSize));
  }
  if (model_->arch().kind == ArchKind::Stgnn && ctx.links != graph_.numLinks()) {
    throw AtomError(ErrorCode::ShapeMismatch, "context has " + std::to_string(ctx.links) + " links, graph has " +
                                                  std::to_string(graph_.numLinks()));
  }
}

namespace {

class RnnBinPredictor final : public BinPredictor {
 public:
  RnnBinPredictor(const PredictorModel& model, const ModelContext& ctx) : model_(model) {
    ForwardInput in;
    in.window = windowMatrix(ctx.window, ctx.windowBins, ctx.links);
    Tape t(false);
    const auto head = buildForward(t, const_cast<PredictorModel&>(model), in, nullptr);
    params_ = toParams(t.value(head.mu), t.value(head.b));
  }
  SymbolPmf predict(const ModelContext& ctx) override { return headPmf(model_.arch(), params_.at(ctx.targetLink)); }

 private:
  const PredictorModel& model_;
  std::vector<LaplaceParams> params_;
};

class StgnnBinPredictor final : public BinPredictor {
 public:
  StgnnBinPredictor(const PredictorModel& model, const LinkGraph& graph, const ModelContext& ctx)
      : model_(model), state_(model, graph, ctx.window) {}
  SymbolPmf predict(const ModelContext& ctx) override {
    ctx.validate();
    const auto params = state_.finish(ctx.mask, ctx.known);
    return headPmf(model_.arch(), params.at(ctx.targetLink));
  }

 private:
  const PredictorModel& model_;
  StgnnBinState state_;
};

}  // namespace

SymbolPmf NeuralModel::predictPmf(const ModelContext& ctx) const {
  check(ctx);
  if (model_->arch().kind == ArchKind::Rnn) {
    std::vector<Symbol> col(ctx.windowBins);
    for (std::size_t t = 0; t < ctx.windowBins; ++t) col[t] = ctx.at(t, ctx.targetLink);
    return headPmf(model_->arch(), forwardRnn(*model_, col));
  }
  StgnnBinState state(*model_, graph_, ctx.window);
  return headPmf(model_->arch(), state.finish(ctx.mask, ctx.known).at(ctx.targetLink));
}

std::unique_ptr<BinPredictor> NeuralModel::beginBin(const ModelContext& ctx) const {
  check(ctx);
  if (model_->arch().kind == ArchKind::Rnn) return std::make_unique<RnnBinPredictor>(*model_, ctx);
  return std::make_unique<StgnnBinPredictor>(*model_, graph_, ctx);
}

}  // namespace atom::nn
