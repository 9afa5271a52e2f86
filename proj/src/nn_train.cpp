#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "atom/error.hpp"
#include "atom/nn/predictor.hpp"

namespace atom::nn {

namespace {

ForwardInput batchInput(const TrafficTensor& x, std::span<const std::size_t> bins, std::size_t w) {
  const std::size_t links = x.links();
  ForwardInput in;
  in.links = links;
  const auto rows = static_cast<Eigen::Index>(bins.size() * links);
  in.window.resize(rows, static_cast<Eigen::Index>(w));
  for (std::size_t s = 0; s < bins.size(); ++s) {
    for (std::size_t t = 0; t < w; ++t) {
      const auto row = x.row(bins[s] - w + t);
      for (std::size_t j = 0; j < links; ++j) {
        in.window(static_cast<Eigen::Index>(s * links + j), static_cast<Eigen::Index>(t)) = row[j];
      }
    }
  }
  return in;
}

Mat targets(const TrafficTensor& x, std::span<const std::size_t> bins) {
  const std::size_t links = x.links();
  Mat y(static_cast<Eigen::Index>(bins.size() * links), 1);
  for (std::size_t s = 0; s < bins.size(); ++s) {
    const auto row = x.row(bins[s]);
    for (std::size_t j = 0; j < links; ++j) y(static_cast<Eigen::Index>(s * links + j), 0) = row[j];
  }
  return y;
}

// Least-squares fit of target ~ window . a + intercept over the given
// (bin, link) rows; a small ridge keeps flat windows solvable.
Eigen::VectorXd fitLinear(const TrafficTensor& x, std::size_t w, std::size_t begin, std::size_t end,
                          const std::vector<std::size_t>& links) {
  const auto n = static_cast<Eigen::Index>(w + 1);
  Mat xtx = Mat::Zero(n, n);
  Eigen::VectorXd xty = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd row(n);
  const double top = static_cast<double>(x.alphabet().size() - 1);
  for (std::size_t t = begin; t < end; ++t) {
    for (std::size_t j : links) {
      for (std::size_t k = 0; k < w; ++k) row(static_cast<Eigen::Index>(k)) = x.at(t - w + k, j);
      row(n - 1) = top;
      xtx.noalias() += row * row.transpose();
      xty += row * static_cast<double>(x.at(t, j));
    }
  }
  const double ridge = 1e-9 * xtx.trace() + 1e-9;
  xtx.diagonal().array() += ridge;
  return xtx.ldlt().solve(xty);
}

void leastSquaresInit(PredictorModel& m, const TrafficTensor& x, std::size_t trainBins) {
  const std::size_t w = m.arch().windowSize;
  std::vector<std::size_t> all(x.links());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const Eigen::VectorXd pooled = fitLinear(x, w, w, trainBins, all);
  if (!pooled.allFinite()) return;
  // Split links by how well the pooled fit explains them: one linear path
  // starts from the well-predicted half, the other from the rest.
  std::vector<double> resid(x.links(), 0.0);
  const double top = static_cast<double>(x.alphabet().size() - 1);
  for (std::size_t j = 0; j < x.links(); ++j) {
    for (std::size_t t = w; t < trainBins; ++t) {
      double p = pooled(static_cast<Eigen::Index>(w)) * top;
      for (std::size_t k = 0; k < w; ++k) p += pooled(static_cast<Eigen::Index>(k)) * x.at(t - w + k, j);
      resid[j] += (p - x.at(t, j)) * (p - x.at(t, j));
    }
  }
  std::vector<std::size_t> order = all;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return resid[a] < resid[b]; });
  const std::size_t half = std::max<std::size_t>(1, (order.size() + 1) / 2);
  const std::vector<std::size_t> good(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(half));
  std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(half), order.end());
  if (rest.empty()) rest = good;
  auto assign = [&](const Eigen::VectorXd& coef, const char* weights, const char* intercept) {
    if (!coef.allFinite()) return;
    Parameter& p = m.parameter(weights);
    for (std::size_t k = 0; k < w; ++k) p.value(static_cast<Eigen::Index>(k), 0) = coef(static_cast<Eigen::Index>(k));
    m.parameter(intercept).value(0, 0) = coef(static_cast<Eigen::Index>(w));
  };
  assign(fitLinear(x, w, w, trainBins, good), "lin.a", "lin.ai");
  assign(fitLinear(x, w, w, trainBins, rest), "lin.c", "lin.ci");
  m.roundWeights();
}

double laplaceNllScalar(double y, const LaplaceParams& p) { return std::log(2.0 * p.b) + std::abs(y - p.mu) / p.b; }

template <typename Score>
double evaluate(const PredictorModel& model, const TrafficTensor& x, const LinkGraph& graph, std::size_t begin,
                std::size_t end, MaskMode mode, std::size_t* count, Score score) {
  const ArchDescriptor& a = model.arch();
  const std::size_t w = a.windowSize;
  begin = std::max(begin, w);
  if (end > x.bins() || begin >= end) throw AtomError(ErrorCode::InvalidArgument, "empty evaluation range");
  const std::size_t links = x.links();
  double total = 0.0;
  std::size_t n = 0;
  if (mode == MaskMode::None || a.kind == ArchKind::Rnn) {
    std::vector<std::size_t> bins;
    auto flush = [&] {
      if (bins.empty()) return;
      ForwardInput in = batchInput(x, bins, w);
      in.mask = Mat::Zero(in.window.rows(), 1);
      in.known = Mat::Zero(in.window.rows(), 1);
      Tape t(false);
      const auto head = buildForward(t, const_cast<PredictorModel&>(model), in, &graph);
      const Mat y = targets(x, bins);
      for (Eigen::Index r = 0; r < y.rows(); ++r) {
        total += score(y(r, 0), LaplaceParams{t.value(head.mu)(r, 0), t.value(head.b)(r, 0)});
        ++n;
      }
      bins.clear();
    };
    for (std::size_t t = begin; t < end; ++t) {
      bins.push_back(t);
      if (bins.size() == 64) flush();
    }
    flush();
  } else {
    std::vector<std::uint8_t> mask(links);
    for (std::size_t t = begin; t < end; ++t) {
      const auto window = x.data().subspan((t - w) * links, w * links);
      const auto known = x.row(t);
      StgnnBinState state(model, graph, window);
      for (std::size_t j = 0; j < links; ++j) {
        for (std::size_t k = 0; k < links; ++k) mask[k] = mode == MaskMode::AllOthers ? (k != j) : (k < j);
        const auto params = state.finish(mask, known);
        total += score(static_cast<double>(known[j]), params[j]);
        ++n;
      }
    }
  }
  if (count) *count = n;
  return total / static_cast<double>(n);
}

}  // namespace

void TrainConfig::validate() const {
  if (!(trainFraction > 0.0 && trainFraction < 1.0)) throw AtomError(ErrorCode::InvalidArgument, "trainFraction must lie in (0, 1)");
  if (!(maskDensityMin >= 0.0 && maskDensityMax <= 1.0 && maskDensityMin <= maskDensityMax)) {
    throw AtomError(ErrorCode::InvalidArgument, "mask density range must be a sub-interval of [0, 1]");
  }
  if (batchSize == 0 || epochs == 0) throw AtomError(ErrorCode::InvalidArgument, "batch size and epochs must be positive");
  if (!(learningRate > 0.0) || !(finalLrFraction > 0.0)) throw AtomError(ErrorCode::InvalidArgument, "learning rate must be positive");
}

std::size_t splitPoint(std::size_t bins, double trainFraction) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(bins) * trainFraction));
}

TrainResult trainPredictor(const TrafficTensor& x, const LinkGraph& graph, const ArchDescriptor& arch,
                           const TrainConfig& cfg) {
  arch.validate();
  cfg.validate();
  if (x.alphabet().size() != arch.alphabetSize) {
    throw AtomError(ErrorCode::ShapeMismatch, "tensor alphabet " + std::to_string(x.alphabet().size()) +
                                                  " vs model alphabet " + std::to_string(arch.alphabetSize));
  }
  if (arch.kind == ArchKind::Stgnn && graph.numLinks() != x.links()) {
    throw AtomError(ErrorCode::ShapeMismatch, "link graph has " + std::to_string(graph.numLinks()) + " links, tensor has " +
                                                  std::to_string(x.links()));
  }
  if (arch.distribution != Distribution::Laplace) {
    throw AtomError(ErrorCode::InvalidArgument, "only the Laplace head can be trained");
  }
  const std::size_t w = arch.windowSize;
  const std::size_t trainBins = splitPoint(x.bins(), cfg.trainFraction);
  if (x.bins() <= w + 1 || trainBins <= w || trainBins >= x.bins()) {
    throw AtomError(ErrorCode::InvalidArgument, "tensor of " + std::to_string(x.bins()) +
                                                    " bins is too short for window " + std::to_string(w));
  }
  const auto start = std::chrono::steady_clock::now();
  TrainResult res;
  res.trainBins = trainBins;
  res.model = PredictorModel(arch, cfg.seed);
  PredictorModel& m = res.model;
  if (cfg.leastSquaresInit) leastSquaresInit(m, x, trainBins);

  std::mt19937_64 rng(cfg.seed ^ 0x9E3779B97F4A7C15ull);
  std::vector<std::size_t> order(trainBins - w);
  std::iota(order.begin(), order.end(), w);
  auto params = m.parameterPointers();
  Adam adam;
  const double decay = cfg.epochs > 1 ? std::pow(cfg.finalLrFraction, 1.0 / static_cast<double>(cfg.epochs - 1)) : 1.0;
  const std::size_t links = x.links();
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.learningRate * std::pow(decay, static_cast<double>(epoch));
    std::shuffle(order.begin(), order.end(), rng);
    double lossSum = 0.0;
    double weightSum = 0.0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += cfg.batchSize) {
      const std::size_t nb = std::min(cfg.batchSize, order.size() - b0);
      const std::span<const std::size_t> bins(order.data() + b0, nb);
      ForwardInput in = batchInput(x, bins, w);
      const Mat y = targets(x, bins);
      in.known = y;
      in.mask = Mat::Zero(y.rows(), 1);
      if (arch.kind == ArchKind::Stgnn) {
        for (std::size_t s = 0; s < nb; ++s) {
          const double density = cfg.maskDensityMin + (cfg.maskDensityMax - cfg.maskDensityMin) * unit(rng);
          for (std::size_t j = 0; j < links; ++j) {
            if (unit(rng) < density) in.mask(static_cast<Eigen::Index>(s * links + j), 0) = 1.0;
          }
        }
      }
      const Mat weights = (1.0 - in.mask.array()).matrix();
      const double wsum = weights.sum();
      if (wsum == 0.0) continue;
      Tape t;
      const auto head = buildForward(t, m, in, &graph);
      const Var total = t.laplaceNll(head.mu, head.b, y, weights);
      const double value = t.value(total)(0, 0);
      if (!std::isfinite(value)) {
        throw AtomError(ErrorCode::TrainingDiverged, "loss became non-finite at epoch " + std::to_string(epoch + 1) +
                                                         ", batch starting " + std::to_string(b0) + ", lr " +
                                                         std::to_string(lr));
      }
      const Var loss = t.scale(total, 1.0 / wsum);
      for (auto* p : params) p->zeroGrad();
      t.backward(loss);
      adam.step(params, lr);
      lossSum += value;
      weightSum += wsum;
    }
    res.lossHistory.push_back(lossSum / weightSum);
    if (cfg.onEpoch) cfg.onEpoch(epoch + 1, res.lossHistory.back());
  }
  res.evalNll = evaluateNll(m, x, graph, trainBins, x.bins(), MaskMode::None);
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

double evaluateNll(const PredictorModel& model, const TrafficTensor& x, const LinkGraph& graph, std::size_t begin,
                   std::size_t end, MaskMode mode, std::size_t* count) {
  return evaluate(model, x, graph, begin, end, mode, count, laplaceNllScalar);
}

double evaluateBits(const PredictorModel& model, const TrafficTensor& x, const LinkGraph& graph, std::size_t begin,
                    std::size_t end, MaskMode mode) {
  return evaluate(model, x, graph, begin, end, mode, nullptr, [&](double y, const LaplaceParams& p) {
    return headPmf(model.arch(), p).bits(static_cast<Symbol>(y));
  });
}

double gradCheck(const std::function<Var(Tape&)>& loss, const std::vector<Parameter*>& params, double h,
                 double floor) {
  for (auto* p : params) p->zeroGrad();
  {
    Tape t;
    t.backward(loss(t));
  }
  auto eval = [&] {
    Tape t(false);
    return t.value(loss(t))(0, 0);
  };
  double worst = 0.0;
  for (auto* p : params) {
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      double& v = p->value.data()[i];
      const double saved = v;
      v = saved + h;
      const double up = eval();
      v = saved - h;
      const double down = eval();
      v = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = p->grad.data()[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
      worst = std::max(worst, std::abs(analytic - numeric) / denom);
    }
  }
  return worst;
}

double gradCheck(PredictorModel& model, const GradSample& sample, const LinkGraph* graph) {
  return gradCheck(
      [&](Tape& t) {
        const auto head = buildForward(t, model, sample.input, graph);
        return t.laplaceNll(head.mu, head.b, sample.target, sample.weights);
      },
      model.parameterPointers());
}

}  // namespace atom::nn
