#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "atom/topology.hpp"

namespace atom::nn {

using Mat = Eigen::MatrixXd;

/// Trainable weight with its gradient and Adam moments. `lrScale` multiplies
/// the learning rate for this tensor only.
struct Parameter {
  std::string name;
  Mat value;
  Mat grad;
  Mat m;
  Mat v;
  double lrScale = 1.0;

  Parameter() = default;
  Parameter(std::string n, Mat init, double scale = 1.0);
  void zeroGrad() { grad.setZero(value.rows(), value.cols()); }
};

/// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = static_cast<std::size_t>(-1);
};

/// Reverse-mode tape. Every op appends a node; backward() walks the nodes in
/// reverse and accumulates gradients into the parameters it touched.
/// With recording off, ops only compute values (inference).
class Tape {
 public:
  explicit Tape(bool recording = true) : recording_(recording) {}

  bool recording() const noexcept { return recording_; }
  const Mat& value(Var v) const { return nodes_[v.id].value; }
  const Mat& grad(Var v) const { return nodes_[v.id].grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

  Var constant(Mat value);
  Var param(Parameter& p);

  Var matmul(Var x, Var w);       // (n x k) * (k x m)
  Var addRow(Var x, Var bias);    // bias is 1 x m, broadcast over rows
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);          // elementwise
  Var mulCol(Var x, Var col);     // x (n x m) scaled row-wise by col (n x 1)
  Var scale(Var x, double s);
  Var oneMinus(Var x);
  Var tanh(Var x);
  Var sigmoid(Var x);
  Var softplus(Var x);
  Var clampMin(Var x, double lo);
  Var concatCols(const std::vector<Var>& parts);
  Var sliceCols(Var x, std::size_t begin, std::size_t count);
  /// out[s*links + i] = sum over neighbours k of i of x[s*links + k].
  Var neighborSum(Var x, const LinkGraph& graph);
  /// Sum of weights * (log(2b) + |y - mu| / b), all n x 1.
  Var laplaceNll(Var mu, Var b, const Mat& y, const Mat& weights);

  /// Seeds d(out)/d(out) = 1 for a 1 x 1 output and back-propagates.
  void backward(Var out);

 private:
  struct Node {
    Mat value;
    Mat grad;
    std::function<void(Tape&, std::size_t)> back;
    Parameter* param = nullptr;
  };
  Var push(Mat value, std::function<void(Tape&, std::size_t)> back = {});
  Mat& gradOf(std::size_t id);

  bool recording_;
  std::vector<Node> nodes_;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clipNorm = 5.0;  // global gradient norm clip, 0 disables
};

class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}
  /// One update; returns the pre-clip global gradient norm.
  double step(std::vector<Parameter*>& params, double lr);
  std::size_t steps() const noexcept { return t_; }

 private:
  AdamConfig cfg_;
  std::size_t t_ = 0;
};

/// Rounds every entry to the nearest float32.
void roundToFloat(Mat& m);

}  // namespace atom::nn
