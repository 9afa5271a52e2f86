#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "atom/error.hpp"
#include "atom/nn/predictor.hpp"
#include "atom/synthgen.hpp"
#include "test_util.hpp"

using namespace atom;
using namespace atom::nn;

namespace {

ArchDescriptor smallArch(ArchKind kind, std::size_t A = 64) {
  ArchDescriptor a;
  a.kind = kind;
  a.hiddenDim = 5;
  a.windowSize = 4;
  a.mlpLayers = {6};
  a.alphabetSize = A;
  return a;
}

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double softplus(double x) { return x > 30 ? x : std::log1p(std::exp(x)); }

std::vector<double> refMlp(const PredictorModel& m, const std::string& prefix, std::vector<double> x) {
  const std::size_t layers = m.arch().mlpLayers.size();
  for (std::size_t i = 0; i <= layers; ++i) {
    const Mat& W = m.parameter(prefix + ".w" + std::to_string(i)).value;
    const Mat& b = m.parameter(prefix + ".b" + std::to_string(i)).value;
    std::vector<double> y(static_cast<std::size_t>(W.cols()));
    for (Eigen::Index c = 0; c < W.cols(); ++c) {
      double acc = b(0, c);
      for (Eigen::Index r = 0; r < W.rows(); ++r) acc += x[static_cast<std::size_t>(r)] * W(r, c);
      y[static_cast<std::size_t>(c)] = i < layers ? std::tanh(acc) : acc;
    }
    x = std::move(y);
  }
  return x;
}

std::vector<double> refGru(const PredictorModel& m, const std::vector<double>& in, const std::vector<double>& h) {
  const std::size_t H = h.size();
  const Mat& wx = m.parameter("gru.wx").value;
  const Mat& wh = m.parameter("gru.wh").value;
  const Mat& bx = m.parameter("gru.bx").value;
  const Mat& bh = m.parameter("gru.bh").value;
  std::vector<double> gx(3 * H), gh(3 * H);
  for (std::size_t c = 0; c < 3 * H; ++c) {
    gx[c] = bx(0, c);
    gh[c] = bh(0, c);
    for (std::size_t r = 0; r < in.size(); ++r) gx[c] += in[r] * wx(r, c);
    for (std::size_t r = 0; r < H; ++r) gh[c] += h[r] * wh(r, c);
  }
  std::vector<double> out(H);
  for (std::size_t k = 0; k < H; ++k) {
    const double r = sig(gx[k] + gh[k]);
    const double z = sig(gx[H + k] + gh[H + k]);
    const double n = std::tanh(gx[2 * H + k] + r * gh[2 * H + k]);
    out[k] = (1 - z) * n + z * h[k];
  }
  return out;
}

// Straightforward loop implementation of the whole predictor for one bin.
// window[t][j], mask/known per link (may be empty).
std::vector<LaplaceParams> referenceForward(const PredictorModel& m, const std::vector<std::vector<double>>& window,
                                            const std::vector<std::uint8_t>& mask, const std::vector<double>& known,
                                            const LinkGraph& graph) {
  const auto& a = m.arch();
  const bool st = a.kind == ArchKind::Stgnn;
  const std::size_t L = window[0].size(), w = a.windowSize, H = a.hiddenDim;
  const double top = static_cast<double>(a.alphabetSize - 1);
  std::vector<double> has(L, 0.0), mean(L);
  for (std::size_t j = 0; j < L; ++j) {
    mean[j] = window[w - 1][j];
    if (!st || mask.empty()) continue;
    double s = 0;
    int c = 0;
    for (auto k : graph.neighbors(j)) {
      if (mask[k]) {
        s += known[k];
        ++c;
      }
    }
    if (c) {
      has[j] = 1;
      mean[j] = s / c;
    }
  }
  std::vector<std::vector<double>> h(L, std::vector<double>(H, 0.0));
  for (std::size_t j = 0; j < L; ++j) h[j][0] = window[0][j] / top;
  for (std::size_t t = 0; t < w; ++t) {
    std::vector<std::vector<double>> f(L);
    for (std::size_t j = 0; j < L; ++j) {
      f[j] = {window[t][j] / top};
      if (st) {
        f[j].resize(5, 0.0);
        if (t + 1 == w && !mask.empty()) {
          f[j][1] = mask[j];
          f[j][2] = mask[j] ? known[j] / top : 0.0;
          f[j][3] = has[j];
          f[j][4] = 10.0 * (mean[j] - window[w - 1][j]) * has[j] / top;
        }
      }
    }
    std::vector<std::vector<double>> next(L);
    if (st) {
      std::vector<std::vector<double>> msg(L);
      for (std::size_t j = 0; j < L; ++j) {
        auto in = h[j];
        in.insert(in.end(), f[j].begin(), f[j].end());
        msg[j] = refMlp(m, "msg", in);
      }
      for (std::size_t j = 0; j < L; ++j) {
        std::vector<double> agg(H, 0.0);
        for (auto k : graph.neighbors(j)) {
          for (std::size_t q = 0; q < H; ++q) agg[q] += msg[k][q];
        }
        agg.insert(agg.end(), f[j].begin(), f[j].end());
        next[j] = refGru(m, agg, h[j]);
      }
    } else {
      for (std::size_t j = 0; j < L; ++j) next[j] = refGru(m, f[j], h[j]);
    }
    h = std::move(next);
  }
  const double U = a.alphabetSize / 64.0;
  std::vector<LaplaceParams> out(L);
  for (std::size_t j = 0; j < L; ++j) {
    const auto o = refMlp(m, "out", h[j]);
    double lin1 = m.parameter("lin.ai").value(0, 0) * top, lin2 = m.parameter("lin.ci").value(0, 0) * top;
    for (std::size_t t = 0; t < w; ++t) {
      lin1 += m.parameter("lin.a").value(t, 0) * window[t][j];
      lin2 += m.parameter("lin.c").value(t, 0) * window[t][j];
    }
    const double g = sig(o[2]);
    double mu = g * lin1 + (1 - g) * lin2;
    if (st) {
      const double s = sig(o[3]) * has[j];
      mu = (1 - s) * mu + s * mean[j];
    }
    mu += U * o[0];
    out[j] = {mu, std::max(a.minScale, U * softplus(o[1]))};
  }
  return out;
}

struct BinData {
  std::vector<Symbol> flat;  // w x L, oldest first
  std::vector<std::vector<double>> rows;
  std::vector<std::uint8_t> mask;
  std::vector<Symbol> known;
  std::vector<double> knownD;
};

BinData randomBin(std::size_t w, std::size_t L, std::size_t A, std::mt19937_64& rng, double maskP = 0.5) {
  BinData d;
  d.rows.assign(w, std::vector<double>(L));
  for (std::size_t t = 0; t < w; ++t) {
    for (std::size_t j = 0; j < L; ++j) {
      const Symbol s = static_cast<Symbol>(rng() % A);
      d.flat.push_back(s);
      d.rows[t][j] = s;
    }
  }
  std::bernoulli_distribution coin(maskP);
  for (std::size_t j = 0; j < L; ++j) {
    d.mask.push_back(coin(rng) ? 1 : 0);
    d.known.push_back(d.mask.back() ? static_cast<Symbol>(rng() % A) : 0);
    d.knownD.push_back(d.known.back());
  }
  return d;
}

ModelContext contextFor(const BinData& d, std::size_t w, std::size_t L, const LinkGraph& g) {
  ModelContext c;
  c.window = d.flat;
  c.windowBins = w;
  c.links = L;
  c.mask = d.mask;
  c.known = d.known;
  c.graph = &g;
  return c;
}

void randomizeLinear(PredictorModel& m, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 0.2);
  for (const char* name : {"lin.a", "lin.c", "lin.ai", "lin.ci"}) {
    for (Eigen::Index i = 0; i < m.parameter(name).value.size(); ++i) m.parameter(name).value.data()[i] = n(rng);
  }
  m.roundWeights();
}

GradSample gradSample(const ArchDescriptor& a, std::size_t samples, std::size_t links, std::mt19937_64& rng) {
  const auto rows = static_cast<Eigen::Index>(samples * links);
  GradSample s;
  s.input.links = links;
  s.input.window = Mat(rows, static_cast<Eigen::Index>(a.windowSize));
  s.input.mask = Mat::Zero(rows, 1);
  s.input.known = Mat::Zero(rows, 1);
  s.target = Mat(rows, 1);
  s.weights = Mat(rows, 1);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index t = 0; t < s.input.window.cols(); ++t) s.input.window(r, t) = static_cast<double>(rng() % a.alphabetSize);
    s.target(r, 0) = static_cast<double>(rng() % a.alphabetSize);
    const bool known = rng() % 2;
    s.input.mask(r, 0) = known;
    s.input.known(r, 0) = known ? s.target(r, 0) : 0.0;
    s.weights(r, 0) = known ? 0.0 : 1.0;
  }
  return s;
}

}  // namespace

TEST(Tape, LinearGradCheck) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 1);
  Parameter W("w", Mat::NullaryExpr(4, 1, [&] { return n(rng); }));
  Parameter b("b", Mat::NullaryExpr(1, 1, [&] { return n(rng); }));
  const Mat x = Mat::NullaryExpr(20, 4, [&] { return n(rng); });
  const Mat y = Mat::NullaryExpr(20, 1, [&] { return 5.0 * n(rng); });
  const Mat wts = Mat::Ones(20, 1);
  const double err = gradCheck(
      [&](Tape& t) {
        const Var mu = t.addRow(t.matmul(t.constant(x), t.param(W)), t.param(b));
        return t.laplaceNll(mu, t.constant(Mat::Constant(20, 1, 1.5)), y, wts);
      },
      {&W, &b});
  EXPECT_LT(err, 1e-8);
}

TEST(Tape, ElementwiseOpsGradCheck) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0, 1);
  Parameter A("a", Mat::NullaryExpr(6, 3, [&] { return n(rng); }));
  Parameter B("b", Mat::NullaryExpr(6, 3, [&] { return n(rng); }));
  const Mat y = Mat::NullaryExpr(6, 1, [&] { return n(rng); });
  const Mat wts = Mat::Ones(6, 1);
  const auto graph = buildLinkGraph(fixtures::ring(3));
  const double err = gradCheck(
      [&](Tape& t) {
        const Var a = t.param(A), b = t.param(B);
        const Var mix = t.add(t.mul(t.sigmoid(a), t.tanh(b)), t.oneMinus(t.scale(t.sub(a, b), 0.3)));
        const Var agg = t.neighborSum(mix, graph);
        const Var cat = t.concatCols({agg, t.softplus(b)});
        const Var mu = t.sliceCols(cat, 1, 1);
        const Var sc = t.clampMin(t.softplus(t.sliceCols(cat, 4, 1)), 0.01);
        return t.laplaceNll(t.mulCol(mu, t.sliceCols(cat, 5, 1)), sc, y, wts);
      },
      {&A, &B});
  EXPECT_LT(err, 1e-5);
}

TEST(Predictor, RnnGradCheck) {
  std::mt19937_64 rng(3);
  PredictorModel m(smallArch(ArchKind::Rnn), 9);
  randomizeLinear(m, rng);
  const auto s = gradSample(m.arch(), 6, 1, rng);
  EXPECT_LT(gradCheck(m, s, nullptr), 1e-4);
}

TEST(Predictor, StgnnGradCheck) {
  std::mt19937_64 rng(4);
  PredictorModel m(smallArch(ArchKind::Stgnn), 10);
  randomizeLinear(m, rng);
  const auto g = buildLinkGraph(fixtures::directedRing(4));
  const auto s = gradSample(m.arch(), 3, 4, rng);
  EXPECT_LT(gradCheck(m, s, &g), 1e-4);
}

TEST(Predictor, MatchesReferenceImplementation) {
  std::mt19937_64 rng(5);
  for (auto kind : {ArchKind::Rnn, ArchKind::Stgnn}) {
    PredictorModel m(smallArch(kind), 11);
    randomizeLinear(m, rng);
    const std::size_t L = kind == ArchKind::Rnn ? 1 : 6;
    const auto g = buildLinkGraph(fixtures::ring(3));
    const auto graph = kind == ArchKind::Rnn ? isolatedLinks(1) : g;
    for (int trial = 0; trial < 5; ++trial) {
      const auto d = randomBin(4, L, 64, rng);
      std::vector<LaplaceParams> got;
      if (kind == ArchKind::Rnn) {
        got = {forwardRnn(m, d.flat)};
      } else {
        got = forwardStgnn(m, contextFor(d, 4, L, graph));
      }
      const auto want = referenceForward(m, d.rows, kind == ArchKind::Rnn ? std::vector<std::uint8_t>{} : d.mask,
                                         d.knownD, graph);
      for (std::size_t j = 0; j < L; ++j) {
        EXPECT_NEAR(got[j].mu, want[j].mu, 1e-9);
        EXPECT_NEAR(got[j].b, want[j].b, 1e-9);
      }
    }
  }
}

TEST(Predictor, ZeroWeightsGiveBiasOutput) {
  for (auto kind : {ArchKind::Rnn, ArchKind::Stgnn}) {
    PredictorModel m(smallArch(kind, 1024), 3);
    m.zeroWeights();
    auto& bias = m.parameter("out.b1").value;
    bias(0, 0) = 0.75;
    bias(0, 1) = -0.5;
    m.roundWeights();
    const double U = 1024.0 / 64.0;
    const double mu = U * static_cast<double>(static_cast<float>(0.75));
    const double b = std::max(0.05, U * std::log1p(std::exp(-0.5)));
    std::vector<Symbol> win(4, 700);
    if (kind == ArchKind::Rnn) {
      const auto p = forwardRnn(m, win);
      EXPECT_NEAR(p.mu, mu, 1e-9);
      EXPECT_NEAR(p.b, b, 1e-9);
    } else {
      const auto g = isolatedLinks(1);
      ModelContext c;
      c.window = win;
      c.windowBins = 4;
      c.links = 1;
      c.graph = &g;
      const auto p = forwardStgnn(m, c);
      EXPECT_NEAR(p[0].mu, mu, 1e-9);
      EXPECT_NEAR(p[0].b, b, 1e-9);
    }
  }
}

TEST(Predictor, IsolatedLinksAreIndependent) {
  std::mt19937_64 rng(6);
  PredictorModel m(smallArch(ArchKind::Stgnn), 12);
  randomizeLinear(m, rng);
  const auto g = isolatedLinks(5);
  auto d = randomBin(4, 5, 64, rng);
  const auto base = forwardStgnn(m, contextFor(d, 4, 5, g));
  // changing link 4 leaves links 0..3 untouched
  for (std::size_t t = 0; t < 4; ++t) d.flat[t * 5 + 4] = (d.flat[t * 5 + 4] + 17) % 64;
  d.mask[4] = 1;
  d.known[4] = 3;
  const auto changed = forwardStgnn(m, contextFor(d, 4, 5, g));
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_EQ(base[j].mu, changed[j].mu);
    EXPECT_EQ(base[j].b, changed[j].b);
  }
}

TEST(Predictor, PermutationEquivariance) {
  std::mt19937_64 rng(7);
  PredictorModel m(smallArch(ArchKind::Stgnn), 13);
  randomizeLinear(m, rng);
  const auto topo = fixtures::loadTopology("abilene");
  const auto g = buildLinkGraph(topo);
  const std::size_t L = topo.numLinks();
  const auto d = randomBin(4, L, 64, rng);
  std::vector<std::size_t> perm(L);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  BinData p = d;
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t t = 0; t < 4; ++t) p.flat[t * L + i] = d.flat[t * L + perm[i]];
    p.mask[i] = d.mask[perm[i]];
    p.known[i] = d.known[perm[i]];
  }
  const auto pg = g.permuted(perm);
  const auto base = forwardStgnn(m, contextFor(d, 4, L, g));
  const auto out = forwardStgnn(m, contextFor(p, 4, L, pg));
  for (std::size_t i = 0; i < L; ++i) {
    EXPECT_NEAR(out[i].mu, base[perm[i]].mu, 1e-9);
    EXPECT_NEAR(out[i].b, base[perm[i]].b, 1e-9);
  }
}

TEST(Predictor, SymmetricRingGivesEqualOutputs) {
  PredictorModel m(smallArch(ArchKind::Stgnn), 14);
  const auto g = buildLinkGraph(fixtures::directedRing(6));
  std::vector<Symbol> win;
  for (std::size_t t = 0; t < 4; ++t) win.insert(win.end(), 6, static_cast<Symbol>(10 + 7 * t));
  ModelContext c;
  c.window = win;
  c.windowBins = 4;
  c.links = 6;
  c.graph = &g;
  const auto out = forwardStgnn(m, c);
  for (const auto& p : out) {
    EXPECT_DOUBLE_EQ(p.mu, out[0].mu);
    EXPECT_DOUBLE_EQ(p.b, out[0].b);
  }
}

TEST(Predictor, SeedDeterminism) {
  const PredictorModel a(smallArch(ArchKind::Stgnn), 42), b(smallArch(ArchKind::Stgnn), 42), c(smallArch(ArchKind::Stgnn), 43);
  EXPECT_EQ(a.checksum(), b.checksum());
  EXPECT_NE(a.checksum(), c.checksum());
}

TEST(Predictor, SerializeRoundTrip) {
  std::mt19937_64 rng(8);
  PredictorModel m(smallArch(ArchKind::Stgnn), 15);
  randomizeLinear(m, rng);
  const auto path = (std::filesystem::temp_directory_path() / "atom_nn_test.atmw").string();
  m.save(path);
  const auto back = PredictorModel::load(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.checksum(), m.checksum());
  EXPECT_EQ(back.arch(), m.arch());
  const auto g = buildLinkGraph(fixtures::ring(3));
  const auto d = randomBin(4, 6, 64, rng);
  const auto p1 = forwardStgnn(m, contextFor(d, 4, 6, g));
  const auto p2 = forwardStgnn(back, contextFor(d, 4, 6, g));
  for (std::size_t j = 0; j < 6; ++j) {
    EXPECT_EQ(p1[j].mu, p2[j].mu);
    EXPECT_EQ(p1[j].b, p2[j].b);
  }
}

TEST(Predictor, CorruptModelFileRejected) {
  PredictorModel m(smallArch(ArchKind::Rnn), 16);
  auto bytes = m.serialize();
  bytes[bytes.size() / 2] ^= 0x40;
  try {
    PredictorModel::deserialize(bytes);
    FAIL() << "expected ChecksumMismatch";
  } catch (const AtomError& e) {
    EXPECT_EQ(e.code(), ErrorCode::ChecksumMismatch);
  }
}

TEST(Predictor, WrongWindowLengthRejected) {
  PredictorModel m(smallArch(ArchKind::Rnn), 17);
  std::vector<Symbol> win(3, 1);
  EXPECT_THROW(forwardRnn(m, win), AtomError);
}

TEST(Predictor, BinStateMatchesFullForward) {
  std::mt19937_64 rng(9);
  PredictorModel m(smallArch(ArchKind::Stgnn), 18);
  randomizeLinear(m, rng);
  const auto g = buildLinkGraph(fixtures::loadTopology("nsfnet"));
  const auto d = randomBin(4, 42, 64, rng, 0.3);
  StgnnBinState state(m, g, d.flat);
  const auto a = state.finish(d.mask, d.known);
  const auto want = referenceForward(m, d.rows, d.mask, d.knownD, g);
  for (std::size_t j = 0; j < 42; ++j) EXPECT_NEAR(a[j].mu, want[j].mu, 1e-9);
}

namespace {

TrafficTensor sineLink(std::size_t bins, std::size_t A) {
  SynthConfig c;
  c.bins = bins;
  c.alphabetSize = A;
  c.amplitude = A * 0.3;
  c.offset = A * 0.5;
  c.period = 17.3;
  c.spatialLevel = 100;
  c.temporalLevel = 100;
  Topology one("one", {"a", "b"}, {{"a", "b"}});
  return generate(c, one);
}

}  // namespace

TEST(Training, LossDecreasesAndBeatsConstantFit) {
  const auto x = sineLink(400, 256);
  auto arch = smallArch(ArchKind::Rnn, 256);
  arch.windowSize = 8;
  TrainConfig tc;
  tc.epochs = 8;
  const auto r = trainPredictor(x, isolatedLinks(1), arch, tc);
  ASSERT_EQ(r.lossHistory.size(), 8u);
  EXPECT_LT(r.lossHistory.back(), r.lossHistory.front());
  // best constant Laplace on the evaluation bins: median and mean absolute deviation
  std::vector<double> ys;
  for (std::size_t t = r.trainBins; t < x.bins(); ++t) ys.push_back(x.at(t, 0));
  auto sorted = ys;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double med = sorted[sorted.size() / 2];
  double mad = 0;
  for (double y : ys) mad += std::abs(y - med);
  mad /= ys.size();
  const double constNll = std::log(2 * mad) + 1.0;
  std::size_t count = 0;
  const double nll = evaluateNll(r.model, x, isolatedLinks(1), r.trainBins, x.bins(), MaskMode::None, &count);
  EXPECT_EQ(count, x.bins() - r.trainBins);
  EXPECT_LT(nll, constNll);
  EXPECT_NEAR(nll, r.evalNll, 1e-9);
}

TEST(Training, SameSeedSameWeights) {
  const auto x = sineLink(200, 64);
  auto arch = smallArch(ArchKind::Rnn);
  TrainConfig tc;
  tc.epochs = 2;
  const auto a = trainPredictor(x, isolatedLinks(1), arch, tc);
  const auto b = trainPredictor(x, isolatedLinks(1), arch, tc);
  EXPECT_EQ(a.model.checksum(), b.model.checksum());
  EXPECT_EQ(a.trainBins, splitPoint(200, 0.7));
}

TEST(Training, StgnnOnRing) {
  const auto topo = fixtures::ring(3);
  SynthConfig c;
  c.bins = 240;
  c.alphabetSize = 64;
  c.amplitude = 20;
  c.offset = 32;
  const auto x = generate(c, topo);
  TrainConfig tc;
  tc.epochs = 2;
  const auto g = buildLinkGraph(topo);
  const auto r = trainPredictor(x, g, smallArch(ArchKind::Stgnn), tc);
  EXPECT_TRUE(std::isfinite(r.evalNll));
  const double chain = evaluateBits(r.model, x, g, r.trainBins, x.bins(), MaskMode::ChainOrder);
  EXPECT_GT(chain, 0.0);
  EXPECT_LT(chain, 6.0);
}

TEST(Training, RejectsBadConfig) {
  const auto x = sineLink(100, 64);
  TrainConfig tc;
  tc.trainFraction = 1.0;
  EXPECT_THROW(trainPredictor(x, isolatedLinks(1), smallArch(ArchKind::Rnn), tc), AtomError);
  auto normal = smallArch(ArchKind::Rnn);
  normal.distribution = Distribution::Normal;
  EXPECT_THROW(trainPredictor(x, isolatedLinks(1), normal, TrainConfig{}), AtomError);
  EXPECT_THROW(trainPredictor(x, isolatedLinks(1), smallArch(ArchKind::Rnn, 128), TrainConfig{}), AtomError);
}
