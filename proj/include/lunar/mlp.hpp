#pragma once

#include <Eigen/Core>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lunar/rng.hpp"
#include "lunar/text_io.hpp"

namespace lunar {

/// Dense rectifier network: affine + ReLU on hidden layers, affine output.
/// Weights of layer k map dims[k] inputs to dims[k+1] outputs (rows x cols =
/// out x in). Batches are column-major: one sample per column.
template <typename Scalar>
class Mlp {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Mlp() = default;

  /// All parameters zero.
  explicit Mlp(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.size() < 2) throw std::invalid_argument("mlp needs at least two layer dims");
    for (int d : dims_) {
      if (d <= 0) throw std::invalid_argument("mlp layer dims must be positive");
    }
    for (std::size_t k = 0; k + 1 < dims_.size(); ++k) {
      weights_.push_back(Matrix::Zero(dims_[k + 1], dims_[k]));
      biases_.push_back(Vector::Zero(dims_[k + 1]));
    }
  }

  /// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
  static Mlp init(std::vector<int> dims, std::uint64_t seed) {
    Mlp net(std::move(dims));
    Rng rng(seed);
    for (auto& w : net.weights_) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(w.cols()));
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
          w(i, j) = static_cast<Scalar>(rng.uniform(-bound, bound));
        }
      }
    }
    return net;
  }

  const std::vector<int>& dims() const { return dims_; }
  std::size_t layer_count() const { return weights_.size(); }
  int input_size() const { return dims_.front(); }
  int output_size() const { return dims_.back(); }

  Matrix& weight(std::size_t k) { return weights_[k]; }
  const Matrix& weight(std::size_t k) const { return weights_[k]; }
  Vector& bias(std::size_t k) { return biases_[k]; }
  const Vector& bias(std::size_t k) const { return biases_[k]; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t k = 0; k < weights_.size(); ++k) n += weights_[k].size() + biases_[k].size();
    return n;
  }

  bool same_shape(const Mlp& other) const { return dims_ == other.dims_; }

  template <typename Derived>
  Matrix forward(const Eigen::MatrixBase<Derived>& inputs) const {
    if (inputs.rows() != input_size()) throw std::invalid_argument("mlp input size mismatch");
    Matrix a = inputs.template cast<Scalar>();
    for (std::size_t k = 0; k < weights_.size(); ++k) {
      Matrix z = weights_[k] * a;
      z.colwise() += biases_[k];
      if (k + 1 < weights_.size()) z = z.cwiseMax(Scalar(0));
      a = std::move(z);
    }
    return a;
  }

  bool operator==(const Mlp& other) const {
    if (dims_ != other.dims_) return false;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
      if (weights_[k] != other.weights_[k] || biases_[k] != other.biases_[k]) return false;
    }
    return true;
  }

 private:
  std::vector<int> dims_;
  std::vector<Matrix> weights_;
  std::vector<Vector> biases_;
};

/// Partial derivatives with the same shapes as an Mlp's parameters.
template <typename Scalar>
struct GradientSet {
  using Matrix = typename Mlp<Scalar>::Matrix;
  using Vector = typename Mlp<Scalar>::Vector;

  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  static GradientSet zeros_like(const Mlp<Scalar>& net) {
    GradientSet g;
    for (std::size_t k = 0; k < net.layer_count(); ++k) {
      g.weights.push_back(Matrix::Zero(net.weight(k).rows(), net.weight(k).cols()));
      g.biases.push_back(Vector::Zero(net.bias(k).size()));
    }
    return g;
  }

  bool matches(const Mlp<Scalar>& net) const {
    if (weights.size() != net.layer_count() || biases.size() != net.layer_count()) return false;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      if (weights[k].rows() != net.weight(k).rows() || weights[k].cols() != net.weight(k).cols() ||
          biases[k].size() != net.bias(k).size()) {
        return false;
      }
    }
    return true;
  }
};

template <typename Scalar>
struct LossAndGradients {
  Scalar loss;
  GradientSet<Scalar> grads;
};

/// Mean squared TD error over the batch, counting only the selected output of
/// each sample: loss = mean_i (target_i - Q(x_i)[action_i])^2. Non-selected
/// outputs contribute no gradient.
template <typename Scalar, typename Derived>
LossAndGradients<Scalar> backward(const Mlp<Scalar>& net, const Eigen::MatrixBase<Derived>& inputs,
                                  std::span<const int> selected,
                                  const typename Mlp<Scalar>::Vector& targets) {
  using Matrix = typename Mlp<Scalar>::Matrix;
  const Eigen::Index n = inputs.cols();
  if (n == 0) throw std::invalid_argument("backward on an empty batch");
  if (static_cast<Eigen::Index>(selected.size()) != n || targets.size() != n) {
    throw std::invalid_argument("backward: batch, selection and target sizes differ");
  }
  if (inputs.rows() != net.input_size()) throw std::invalid_argument("mlp input size mismatch");

  const std::size_t layers = net.layer_count();
  std::vector<Matrix> pre(layers);         // affine outputs
  std::vector<Matrix> act(layers + 1);     // act[0] = inputs
  act[0] = inputs.template cast<Scalar>();
  for (std::size_t k = 0; k < layers; ++k) {
    pre[k] = net.weight(k) * act[k];
    pre[k].colwise() += net.bias(k);
    act[k + 1] = (k + 1 < layers) ? Matrix(pre[k].cwiseMax(Scalar(0))) : pre[k];
  }

  Matrix delta = Matrix::Zero(net.output_size(), n);
  Scalar loss = 0;
  const Scalar inv_n = Scalar(1) / static_cast<Scalar>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int a = selected[static_cast<std::size_t>(i)];
    if (a < 0 || a >= net.output_size()) throw std::out_of_range("selected output out of range");
    const Scalar err = targets(i) - act[layers](a, i);
    loss += err * err;
    delta(a, i) = Scalar(-2) * err * inv_n;
  }
  loss *= inv_n;

  LossAndGradients<Scalar> out{loss, {}};
  out.grads.weights.resize(layers);
  out.grads.biases.resize(layers);
  for (std::size_t k = layers; k-- > 0;) {
    out.grads.weights[k].noalias() = delta * act[k].transpose();
    out.grads.biases[k] = delta.rowwise().sum();
    if (k > 0) {
      Matrix back = net.weight(k).transpose() * delta;
      delta = back.cwiseProduct((pre[k - 1].array() > Scalar(0)).matrix().template cast<Scalar>());
    }
  }
  return out;
}

/// Adaptive-moment optimizer state (first/second moments with bias correction).
template <typename Scalar>
class Adam {
 public:
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar epsilon = Scalar(1e-8);

  explicit Adam(const Mlp<Scalar>& net)
      : m_(GradientSet<Scalar>::zeros_like(net)), v_(GradientSet<Scalar>::zeros_like(net)) {}

  long long step_count() const { return t_; }
  const GradientSet<Scalar>& first_moment() const { return m_; }
  const GradientSet<Scalar>& second_moment() const { return v_; }

  void apply(Mlp<Scalar>& net, const GradientSet<Scalar>& g, Scalar lr) {
    if (!g.matches(net) || !m_.matches(net)) {
      throw std::invalid_argument("adam: gradient shapes do not match the network");
    }
    ++t_;
    const Scalar c1 = Scalar(1) - std::pow(beta1, static_cast<Scalar>(t_));
    const Scalar c2 = Scalar(1) - std::pow(beta2, static_cast<Scalar>(t_));
    for (std::size_t k = 0; k < net.layer_count(); ++k) {
      update(net.weight(k), m_.weights[k], v_.weights[k], g.weights[k], lr, c1, c2);
      update(net.bias(k), m_.biases[k], v_.biases[k], g.biases[k], lr, c1, c2);
    }
  }

 private:
  template <typename P, typename G>
  void update(P& param, P& m, P& v, const G& grad, Scalar lr, Scalar c1, Scalar c2) {
    m = beta1 * m + (Scalar(1) - beta1) * grad;
    v = beta2 * v + (Scalar(1) - beta2) * grad.cwiseAbs2();
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + epsilon);
  }

  GradientSet<Scalar> m_;
  GradientSet<Scalar> v_;
  long long t_ = 0;
};

template <typename Scalar>
void sgd_apply(Mlp<Scalar>& net, const GradientSet<Scalar>& g, Scalar lr) {
  if (!g.matches(net)) throw std::invalid_argument("sgd: gradient shapes do not match the network");
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    net.weight(k) -= lr * g.weights[k];
    net.bias(k) -= lr * g.biases[k];
  }
}

namespace detail {

template <typename Scalar>
std::string format_scalar(Scalar v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename Scalar>
Scalar parse_scalar(std::string_view tok, std::size_t lineno) {
  auto v = parse_number<Scalar>(tok);
  if (!v) throw ParseError(lineno, "bad number '" + std::string(tok) + "'");
  return *v;
}

}  // namespace detail

/// Text weight file: "mlp dims=d0,d1,..." then, per layer k, a line
/// "layer k weights <rows> <cols>" followed by the row-major weight rows, and a
/// line "layer k bias <rows>" followed by one line of biases.
template <typename Scalar>
void save_mlp(std::ostream& os, const Mlp<Scalar>& net) {
  os << "mlp dims=";
  for (std::size_t i = 0; i < net.dims().size(); ++i) os << (i ? "," : "") << net.dims()[i];
  os << "\n";
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    const auto& w = net.weight(k);
    os << "layer " << k << " weights " << w.rows() << " " << w.cols() << "\n";
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        os << (j ? " " : "") << detail::format_scalar(w(i, j));
      }
      os << "\n";
    }
    const auto& b = net.bias(k);
    os << "layer " << k << " bias " << b.size() << "\n";
    for (Eigen::Index i = 0; i < b.size(); ++i) os << (i ? " " : "") << detail::format_scalar(b(i));
    os << "\n";
  }
}

template <typename Scalar>
Mlp<Scalar> load_mlp(std::istream& is) {
  std::size_t lineno = 0;
  std::string line;
  auto next = [&](const char* what) -> std::string_view {
    if (!std::getline(is, line)) throw ParseError(lineno + 1, std::string("unexpected end of file, expected ") + what);
    ++lineno;
    return line;
  };

  auto header = tokens(next("header"));
  if (header.size() != 2 || header[0] != "mlp" || header[1].substr(0, 5) != "dims=") {
    throw ParseError(lineno, "expected 'mlp dims=<d0,d1,...>'");
  }
  std::vector<int> dims;
  for (auto d : split(header[1].substr(5), ',')) {
    auto v = parse_number<int>(d);
    if (!v || *v <= 0) throw ParseError(lineno, "bad layer dimension '" + std::string(d) + "'");
    dims.push_back(*v);
  }
  if (dims.size() < 2) throw ParseError(lineno, "need at least two layer dims");

  Mlp<Scalar> net(dims);
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    const std::string tag = "layer " + std::to_string(k);
    auto& w = net.weight(k);
    auto wh = tokens(next("weights header"));
    if (wh.size() != 5 || wh[0] != "layer" || wh[2] != "weights" ||
        parse_number<std::size_t>(wh[1]) != k) {
      throw ParseError(lineno, "expected '" + tag + " weights <rows> <cols>'");
    }
    const auto rows = parse_number<long>(wh[3]);
    const auto cols = parse_number<long>(wh[4]);
    if (rows != w.rows() || cols != w.cols()) {
      throw ParseError(lineno, tag + ": weight shape does not match dims (expected " +
                                   std::to_string(w.rows()) + "x" + std::to_string(w.cols()) + ")");
    }
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      auto vals = tokens(next("weight row"));
      if (static_cast<Eigen::Index>(vals.size()) != w.cols()) {
        throw ParseError(lineno, tag + ": weight row has " + std::to_string(vals.size()) +
                                     " values, expected " + std::to_string(w.cols()));
      }
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        w(i, j) = detail::parse_scalar<Scalar>(vals[static_cast<std::size_t>(j)], lineno);
      }
    }
    auto& b = net.bias(k);
    auto bh = tokens(next("bias header"));
    if (bh.size() != 4 || bh[0] != "layer" || bh[2] != "bias" ||
        parse_number<std::size_t>(bh[1]) != k) {
      throw ParseError(lineno, "expected '" + tag + " bias <rows>'");
    }
    if (parse_number<long>(bh[3]) != b.size()) {
      throw ParseError(lineno, tag + ": bias length does not match dims (expected " +
                                   std::to_string(b.size()) + ")");
    }
    auto vals = tokens(next("bias row"));
    if (static_cast<Eigen::Index>(vals.size()) != b.size()) {
      throw ParseError(lineno, tag + ": bias row has " + std::to_string(vals.size()) +
                                   " values, expected " + std::to_string(b.size()));
    }
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      b(i) = detail::parse_scalar<Scalar>(vals[static_cast<std::size_t>(i)], lineno);
    }
  }
  return net;
}

}  // namespace lunar
