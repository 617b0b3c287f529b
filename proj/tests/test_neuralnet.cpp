#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "lunar/mlp.hpp"
#include "oracles.hpp"

using namespace lunar;
using Net = Mlp<double>;

namespace {

Net one_one_one() {
  Net net({1, 1, 1});
  net.weight(0)(0, 0) = 2.0;
  net.weight(1)(0, 0) = 3.0;
  return net;
}

Net with_random_biases(Net net, Rng& rng) {
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    for (Eigen::Index i = 0; i < net.bias(k).size(); ++i) net.bias(k)(i) = rng.uniform(-0.5, 0.5);
  }
  return net;
}

Eigen::MatrixXd random_batch(int rows, int cols, Rng& rng) {
  Eigen::MatrixXd x(rows, cols);
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) = rng.normal();
  return x;
}

}  // namespace

TEST_SUITE("neuralnet") {

TEST_CASE("init is seeded, bounded and counts parameters") {
  const auto a = Net::init({8, 128, 128, 4}, 42);
  const auto b = Net::init({8, 128, 128, 4}, 42);
  CHECK(a == b);
  CHECK_FALSE(a == Net::init({8, 128, 128, 4}, 43));
  // 8*128+128 + 128*128+128 + 128*4+4
  CHECK(a.parameter_count() == 18180);
  for (std::size_t k = 0; k < a.layer_count(); ++k) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(a.weight(k).cols()));
    CHECK(a.weight(k).cwiseAbs().maxCoeff() <= bound);
    CHECK(a.bias(k).isZero());
  }
  CHECK_THROWS_AS(Net({8, 0, 4}), std::invalid_argument);
  CHECK_THROWS_AS(Net({8}), std::invalid_argument);
}

TEST_CASE("forward examples") {
  const Net zero({8, 16, 4});
  Rng rng(1);
  CHECK(zero.forward(random_batch(8, 3, rng)).isZero());

  const Net net = one_one_one();
  Eigen::MatrixXd x(1, 2);
  x << 1.0, -1.0;
  const auto y = net.forward(x);
  CHECK(y(0, 0) == 6.0);
  CHECK(y(0, 1) == 0.0);
}

TEST_CASE("batched forward equals per-sample forward") {
  Rng rng(2);
  const Net net = with_random_biases(Net::init({8, 32, 32, 4}, 3), rng);
  const auto x = random_batch(8, 17, rng);
  const auto batched = net.forward(x);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const Eigen::VectorXd single = net.forward(x.col(j));
    CHECK((batched.col(j) - single).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK_THROWS_AS(net.forward(random_batch(7, 1, rng)), std::invalid_argument);
}

TEST_CASE("bias-free rectifier nets are positively homogeneous") {
  Rng rng(4);
  const Net net = Net::init({8, 32, 4}, 5);
  const auto x = random_batch(8, 5, rng);
  const auto y = net.forward(x);
  const auto y3 = net.forward(3.0 * x);
  CHECK((y3 - 3.0 * y).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("linear 1-1 net matches the hand-derived quadratic") {
  Net net({1, 1});
  net.weight(0)(0, 0) = 2.0;
  net.bias(0)(0) = 0.5;
  Eigen::MatrixXd x(1, 1);
  x << 3.0;
  const std::vector<int> sel{0};
  Eigen::VectorXd t(1);
  t << 10.0;
  // prediction 6.5, error 3.5: loss 12.25, dL/dw = -2*3.5*3, dL/db = -2*3.5
  const auto r = backward(net, x, std::span<const int>(sel), t);
  CHECK(r.loss == doctest::Approx(12.25));
  CHECK(r.grads.weights[0](0, 0) == doctest::Approx(-21.0));
  CHECK(r.grads.biases[0](0) == doctest::Approx(-7.0));
}

TEST_CASE("zero error means zero gradient") {
  Rng rng(6);
  const Net net = with_random_biases(Net::init({4, 8, 3}, 7), rng);
  const auto x = random_batch(4, 6, rng);
  std::vector<int> sel{0, 1, 2, 0, 1, 2};
  const auto q = net.forward(x);
  Eigen::VectorXd t(6);
  for (int i = 0; i < 6; ++i) t(i) = q(sel[i], i);
  const auto r = backward(net, x, std::span<const int>(sel), t);
  CHECK(r.loss == 0.0);
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    CHECK(r.grads.weights[k].isZero());
    CHECK(r.grads.biases[k].isZero());
  }
}

TEST_CASE("only the selected outputs receive gradient") {
  Rng rng(8);
  const Net net = Net::init({4, 8, 3}, 9);
  const auto x = random_batch(4, 2, rng);
  const std::vector<int> sel{1, 1};
  Eigen::VectorXd t(2);
  t << 5.0, -5.0;
  const auto r = backward(net, x, std::span<const int>(sel), t);
  CHECK(r.grads.weights[1].row(0).isZero());
  CHECK(r.grads.weights[1].row(2).isZero());
  CHECK(r.grads.biases[1](0) == 0.0);
  CHECK(r.grads.biases[1](1) != 0.0);
  CHECK(r.loss > 0.0);
}

TEST_CASE("finite differences on a small net") {
  Rng rng(10);
  const Net net = with_random_biases(Net::init({4, 8, 3}, 11), rng);
  const auto x = random_batch(4, 5, rng);
  std::vector<int> sel;
  for (int i = 0; i < 5; ++i) sel.push_back(static_cast<int>(rng.below(3)));
  Eigen::VectorXd t(5);
  for (int i = 0; i < 5; ++i) t(i) = rng.normal();
  const auto r = backward(net, x, std::span<const int>(sel), t);
  CHECK(r.loss == doctest::Approx(oracle::loss(net, x, sel, t)).epsilon(1e-12));
  const auto check = oracle::finite_difference_check(net, x, sel, t, r.grads);
  CHECK(check.checked == net.parameter_count());
  CHECK(check.max_rel_error < 1e-5);
}

TEST_CASE("backward rejects malformed batches") {
  const Net net({2, 2});
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(2, 2);
  std::vector<int> sel{0};
  Eigen::VectorXd t = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(backward(net, x, std::span<const int>(sel), t), std::invalid_argument);
  sel = {0, 5};
  CHECK_THROWS_AS(backward(net, x, std::span<const int>(sel), t), std::out_of_range);
}

TEST_CASE("adam first step moves each parameter by about lr against the gradient") {
  Net net = Net::init({3, 4, 2}, 12);
  const Net before = net;
  auto g = GradientSet<double>::zeros_like(net);
  Rng rng(13);
  for (auto& w : g.weights)
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.normal();
  Adam<double> adam(net);
  const double lr = 1e-3;
  adam.apply(net, g, lr);
  CHECK(adam.step_count() == 1);
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    const Eigen::MatrixXd delta = net.weight(k) - before.weight(k);
    for (Eigen::Index i = 0; i < delta.size(); ++i) {
      const double gi = g.weights[k].data()[i];
      const double expect = -lr * (gi > 0 ? 1.0 : -1.0);
      CHECK(std::abs(delta.data()[i] - expect) < 1e-7 * (1.0 + 1.0 / std::abs(gi)));
    }
    CHECK(net.bias(k) == before.bias(k));
  }
}

TEST_CASE("adam with zero gradient only decays moments") {
  Net net = Net::init({3, 4, 2}, 14);
  Adam<double> adam(net);
  auto g = GradientSet<double>::zeros_like(net);
  g.weights[0](0, 0) = 1.0;
  adam.apply(net, g, 1e-3);
  const Net after_first = net;
  const double m = adam.first_moment().weights[0](0, 0);
  adam.apply(net, GradientSet<double>::zeros_like(net), 1e-3);
  CHECK(adam.first_moment().weights[0](0, 0) == doctest::Approx(0.9 * m));
  for (std::size_t k = 0; k < net.layer_count(); ++k) CHECK(net.bias(k) == after_first.bias(k));
  CHECK(net.weight(0)(1, 1) == after_first.weight(0)(1, 1));

  Net other({2, 2});
  CHECK_THROWS_AS(adam.apply(other, GradientSet<double>::zeros_like(other), 1e-3),
                  std::invalid_argument);
}

TEST_CASE("identical optimisation runs agree bitwise") {
  auto train = [] {
    Net net = Net::init({4, 8, 2}, 15);
    Adam<double> adam(net);
    Rng rng(16);
    const auto x = random_batch(4, 8, rng);
    const std::vector<int> sel{0, 1, 0, 1, 0, 1, 0, 1};
    Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(8, -1, 1);
    for (int i = 0; i < 20; ++i) adam.apply(net, backward(net, x, std::span<const int>(sel), t).grads, 1e-2);
    return net;
  };
  CHECK(train() == train());
}

TEST_CASE("weight file round-trip is bitwise") {
  Rng rng(17);
  const Net net = with_random_biases(Net::init({8, 32, 32, 4}, 18), rng);
  std::stringstream ss;
  save_mlp(ss, net);
  CHECK(ss.str().rfind("mlp dims=8,32,32,4\n", 0) == 0);
  CHECK(load_mlp<double>(ss) == net);

  const Mlp<float> small = Mlp<float>::init({2, 3, 1}, 19);
  std::stringstream sf;
  save_mlp(sf, small);
  CHECK(load_mlp<float>(sf) == small);
}

TEST_CASE("weight file errors") {
  const Net net = Net::init({2, 3, 1}, 20);
  std::stringstream ss;
  save_mlp(ss, net);
  const std::string text = ss.str();

  std::istringstream truncated(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(load_mlp<double>(truncated), ParseError);

  std::string mismatch = text;
  mismatch.replace(0, mismatch.find('\n'), "mlp dims=2,4,1");
  std::istringstream is(mismatch);
  try {
    load_mlp<double>(is);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("layer 0") != std::string::npos);
  }

  std::istringstream garbage("not a weight file\n");
  CHECK_THROWS_AS(load_mlp<double>(garbage), ParseError);
}

}  // TEST_SUITE
