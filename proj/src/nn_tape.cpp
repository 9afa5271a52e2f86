#include "atom/nn/tape.hpp"

#include <cmath>

#include "atom/error.hpp"

namespace atom::nn {

namespace {

void requireSame(const Mat& a, const Mat& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw AtomError(ErrorCode::ShapeMismatch, std::string(op) + ": " + std::to_string(a.rows()) + "x" +
                                                  std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                                                  "x" + std::to_string(b.cols()));
  }
}

double softplusScalar(double x) { return x > 30 ? x : std::log1p(std::exp(x)); }
double sigmoidScalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Parameter::Parameter(std::string n, Mat init, double scale)
    : name(std::move(n)), value(std::move(init)), lrScale(scale) {
  grad = Mat::Zero(value.rows(), value.cols());
  m = Mat::Zero(value.rows(), value.cols());
  v = Mat::Zero(value.rows(), value.cols());
}

Var Tape::push(Mat value, std::function<void(Tape&, std::size_t)> back) {
  Node n;
  n.value = std::move(value);
  if (recording_) n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Mat& Tape::gradOf(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Var Tape::constant(Mat value) { return push(std::move(value)); }

Var Tape::param(Parameter& p) {
  Var v = push(p.value);
  nodes_[v.id].param = &p;
  return v;
}

Var Tape::matmul(Var x, Var w) {
  const Mat& a = value(x);
  const Mat& b = value(w);
  if (a.cols() != b.rows()) {
    throw AtomError(ErrorCode::ShapeMismatch, "matmul: inner dimensions " + std::to_string(a.cols()) + " vs " +
                                                  std::to_string(b.rows()));
  }
  Mat out = a * b;
  return push(std::move(out), [x, w](Tape& t, std::size_t self) {
    const Mat& g = t.nodes_[self].grad;
    t.gradOf(x.id).noalias() += g * t.value(w).transpose();
    t.gradOf(w.id).noalias() += t.value(x).transpose() * g;
  });
}

Var Tape::addRow(Var x, Var bias) {
  const Mat& a = value(x);
  const Mat& b = value(bias);
  if (b.rows() != 1 || b.cols() != a.cols()) throw AtomError(ErrorCode::ShapeMismatch, "addRow: bias shape");
  Mat out = a.rowwise() + b.row(0);
  return push(std::move(out), [x, bias](Tape& t, std::size_t self) {
    const Mat& g = t.nodes_[self].grad;
    t.gradOf(x.id) += g;
    t.gradOf(bias.id) += g.colwise().sum();
  });
}

Var Tape::add(Var a, Var b) {
  requireSame(value(a), value(b), "add");
  Mat out = value(a) + value(b);
  return push(std::move(out), [a, b](Tape& t, std::size_t self) {
    const Mat& g = t.nodes_[self].grad;
    t.gradOf(a.id) += g;
    t.gradOf(b.id) += g;
  });
}

Var Tape::sub(Var a, Var b) {
  requireSame(value(a), value(b), "sub");
  Mat out = value(a) - value(b);
  return push(std::move(out), [a, b](Tape& t, std::size_t self) {
    const Mat& g = t.nodes_[self].grad;
    t.gradOf(a.id) += g;
    t.gradOf(b.id) -= g;
  });
}

Var Tape::mul(Var a, Var b) {
  requireSame(value(a), value(b), "mul");
  Mat out = value(a).cwiseProduct(value(b));
  return push(std::move(out), [a, b](Tape& t, std::size_t self) {
    const Mat& g = t.nodes_[self].grad;
    t.gradOf(a.id) += g.cwiseProduct(t.value(b));
    t.gradOf(b.id) += g.cwiseProduct(t.value(a));
  });
}

Var Tape::mulCol(Var x, Var col) {
  const Mat& a = value(x);
  const Mat& c = value(col);
  if (c.cols() != 1 || c.rows() != a.rows()) throw AtomError(ErrorCode::ShapeMismatch, "mulCol: column shape");
  Mat out = a.array().colwise() * c.col(0).array();
  return push(std::move(out), [x, col](Tape& t, std::size_t self) {
    const Mat& g = t.nodes_[self].grad;
    t.gradOf(x.id) += (g.array().colwise() * t.value(col).col(0).array()).matrix();
    t.gradOf(col.id) += g.cwiseProduct(t.value(x)).rowwise().sum();
  });
}

Var Tape::scale(Var x, double s) {
  Mat out = value(x) * s;
  return push(std::move(out), [x, s](Tape& t, std::size_t self) { t.gradOf(x.id) += t.nodes_[self].grad * s; });
}

Var Tape::oneMinus(Var x) {
  Mat out = (1.0 - value(x).array()).matrix();
  return push(std::move(out), [x](Tape& t, std::size_t self) { t.gradOf(x.id) -= t.nodes_[self].grad; });
}

Var Tape::tanh(Var x) {
  Mat out = value(x).array().tanh().matrix();
  return push(std::move(out), [x](Tape& t, std::size_t self) {
    const Mat& y = t.nodes_[self].value;
    t.gradOf(x.id) += (t.nodes_[self].grad.array() * (1.0 - y.array().square())).matrix();
  });
}

Var Tape::sigmoid(Var x) {
  Mat out = value(x).unaryExpr([](double v) { return sigmoidScalar(v); });
  return push(std::move(out), [x](Tape& t, std::size_t self) {
    const Mat& y = t.nodes_[self].value;
    t.gradOf(x.id) += (t.nodes_[self].grad.array() * y.array() * (1.0 - y.array())).matrix();
  });
}

Var Tape::softplus(Var x) {
  Mat out = value(x).unaryExpr([](double v) { return softplusScalar(v); });
  return push(std::move(out), [x](Tape& t, std::size_t self) {
    const Mat d = t.value(x).unaryExpr([](double v) { return sigmoidScalar(v); });
    t.gradOf(x.id) += t.nodes_[self].grad.cwiseProduct(d);
  });
}

Var Tape::clampMin(Var x, double lo) {
  Mat out = value(x).cwiseMax(lo);
  return push(std::move(out), [x, lo](Tape& t, std::size_t self) {
    const Mat pass = (t.value(x).array() > lo).cast<double>().matrix();
    t.gradOf(x.id) += t.nodes_[self].grad.cwiseProduct(pass);
  });
}

Var Tape::concatCols(const std::vector<Var>& parts) {
  if (parts.empty()) throw AtomError(ErrorCode::ShapeMismatch, "concat of nothing");
  const Eigen::Index rows = value(parts[0]).rows();
  Eigen::Index cols = 0;
  for (Var p : parts) {
    if (value(p).rows() != rows) throw AtomError(ErrorCode::ShapeMismatch, "concat: row counts differ");
    cols += value(p).cols();
  }
  Mat out(rows, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    out.middleCols(at, value(p).cols()) = value(p);
    at += value(p).cols();
  }
  return push(std::move(out), [parts](Tape& t, std::size_t self) {
    const Mat& g = t.nodes_[self].grad;
    Eigen::Index off = 0;
    for (Var p : parts) {
      const Eigen::Index c = t.value(p).cols();
      t.gradOf(p.id) += g.middleCols(off, c);
      off += c;
    }
  });
}

Var Tape::sliceCols(Var x, std::size_t begin, std::size_t count) {
  const Mat& a = value(x);
  if (begin + count > static_cast<std::size_t>(a.cols())) throw AtomError(ErrorCode::ShapeMismatch, "slice range");
  const auto b = static_cast<Eigen::Index>(begin);
  const auto c = static_cast<Eigen::Index>(count);
  Mat out = a.middleCols(b, c);
  return push(std::move(out), [x, b, c](Tape& t, std::size_t self) {
    t.gradOf(x.id).middleCols(b, c) += t.nodes_[self].grad;
  });
}

Var Tape::neighborSum(Var x, const LinkGraph& graph) {
  const Mat& a = value(x);
  const auto links = static_cast<Eigen::Index>(graph.numLinks());
  if (links == 0 || a.rows() % links != 0) throw AtomError(ErrorCode::ShapeMismatch, "neighborSum: rows vs links");
  const Eigen::Index samples = a.rows() / links;
  Mat out = Mat::Zero(a.rows(), a.cols());
  for (Eigen::Index s = 0; s < samples; ++s) {
    for (Eigen::Index i = 0; i < links; ++i) {
      for (std::size_t k : graph.neighbors(static_cast<std::size_t>(i))) {
        out.row(s * links + i) += a.row(s * links + static_cast<Eigen::Index>(k));
      }
    }
  }
  const LinkGraph* g = &graph;
  return push(std::move(out), [x, g, links, samples](Tape& t, std::size_t self) {
    const Mat& up = t.nodes_[self].grad;
    Mat& dx = t.gradOf(x.id);
    for (Eigen::Index s = 0; s < samples; ++s) {
      for (Eigen::Index i = 0; i < links; ++i) {
        for (std::size_t k : g->neighbors(static_cast<std::size_t>(i))) {
          dx.row(s * links + static_cast<Eigen::Index>(k)) += up.row(s * links + i);
        }
      }
    }
  });
}

Var Tape::laplaceNll(Var mu, Var b, const Mat& y, const Mat& weights) {
  const Mat& m = value(mu);
  const Mat& s = value(b);
  requireSame(m, s, "laplaceNll");
  requireSame(m, y, "laplaceNll");
  requireSame(m, weights, "laplaceNll");
  double total = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (weights(i, 0) == 0.0) continue;
    total += weights(i, 0) * (std::log(2.0 * s(i, 0)) + std::abs(y(i, 0) - m(i, 0)) / s(i, 0));
  }
  Mat out(1, 1);
  out(0, 0) = total;
  return push(std::move(out), [mu, b, y, weights](Tape& t, std::size_t self) {
    const double g = t.nodes_[self].grad(0, 0);
    const Mat& m = t.value(mu);
    const Mat& s = t.value(b);
    Mat& dm = t.gradOf(mu.id);
    Mat& ds = t.gradOf(b.id);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double wgt = weights(i, 0);
      if (wgt == 0.0) continue;
      const double d = y(i, 0) - m(i, 0);
      const double sign = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
      dm(i, 0) += g * wgt * (-sign / s(i, 0));
      ds(i, 0) += g * wgt * (1.0 / s(i, 0) - std::abs(d) / (s(i, 0) * s(i, 0)));
    }
  });
}

void Tape::backward(Var out) {
  if (!recording_) throw AtomError(ErrorCode::InvalidArgument, "backward on a non-recording tape");
  if (value(out).size() != 1) throw AtomError(ErrorCode::ShapeMismatch, "backward needs a scalar output");
  gradOf(out.id)(0, 0) = 1.0;
  for (std::size_t i = out.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.size() == 0) continue;
    if (n.back) n.back(*this, i);
    if (n.param) n.param->grad += n.grad;
  }
}

double Adam::step(std::vector<Parameter*>& params, double lr) {
  double sq = 0.0;
  for (auto* p : params) sq += p->grad.squaredNorm();
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) throw AtomError(ErrorCode::TrainingDiverged, "non-finite gradient norm");
  const double clip = cfg_.clipNorm > 0 && norm > cfg_.clipNorm ? cfg_.clipNorm / norm : 1.0;
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (auto* p : params) {
    const Mat g = p->grad * clip;
    p->m = cfg_.beta1 * p->m + (1.0 - cfg_.beta1) * g;
    p->v = cfg_.beta2 * p->v + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    const double rate = lr * p->lrScale;
    p->value.array() -= rate * (p->m.array() / bc1) / ((p->v.array() / bc2).sqrt() + cfg_.eps);
    roundToFloat(p->value);
  }
  return norm;
}

void roundToFloat(Mat& m) {
  m = m.unaryExpr([](double v) { return static_cast<double>(static_cast<float>(v)); });
}

}  // namespace atom::nn
