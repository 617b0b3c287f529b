#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "lunar/dqn.hpp"
#include "oracles.hpp"

using namespace lunar;

namespace {

Transition tagged(double id) {
  Transition t;
  t.reward = id;
  t.state(0) = id;
  return t;
}

// Network whose outputs are exactly its output-layer biases.
QNetwork constant_net(double a, double b, double c, double d) {
  QNetwork net({8, 4, 4});
  net.bias(1) << a, b, c, d;
  return net;
}

DqnConfig tiny_config() {
  DqnConfig cfg;
  cfg.hidden_width = 16;
  cfg.batch_size = 8;
  cfg.capacity = 500;
  cfg.target_sync_interval = 50;
  cfg.episodes = 4;
  return cfg;
}

}  // namespace

TEST_SUITE("dqn") {

TEST_CASE("epsilon decay") {
  const DqnConfig cfg;
  CHECK(epsilon_after(0, cfg) == 1.0);
  CHECK(epsilon_after(1, cfg) == 0.996);
  CHECK(epsilon_after(2000, cfg) == 0.01);
  double prev = 1.0;
  for (int k = 0; k < 3000; ++k) {
    const double e = epsilon_after(k, cfg);
    CHECK(std::abs(e - std::max(0.01, std::pow(0.996, k))) < 1e-12);
    CHECK(e <= prev);
    CHECK(e >= cfg.epsilon_min);
    prev = e;
  }
}

TEST_CASE("ring eviction") {
  ReplayBuffer buf(2);
  buf.push(tagged(1));
  buf.push(tagged(2));
  buf.push(tagged(3));
  REQUIRE(buf.size() == 2);
  CHECK(buf.at(0).reward == 2);
  CHECK(buf.at(1).reward == 3);
  CHECK_THROWS_AS(buf.at(2), std::out_of_range);
  CHECK_THROWS_AS(ReplayBuffer(0), std::invalid_argument);
}

TEST_CASE("sampling with replacement and the under-filled guard") {
  ReplayBuffer buf(10);
  buf.push(tagged(7));
  Rng rng(1);
  CHECK_THROWS_AS(buf.sample(5, rng), std::logic_error);
  const auto five = buf.sample(5, rng, true);
  REQUIRE(five.size() == 5);
  for (const auto& t : five) CHECK(t.reward == 7);
  CHECK_THROWS_AS(ReplayBuffer(3).sample(1, rng, true), std::logic_error);
}

TEST_CASE("sampling is uniform over contents") {
  ReplayBuffer buf(10);
  for (int i = 0; i < 25; ++i) buf.push(tagged(i));  // holds 15..24
  Rng rng(2);
  std::array<std::uint64_t, 10> counts{};
  std::vector<Transition> draws;
  for (int i = 0; i < 10000; ++i) {
    const auto batch = buf.sample(10, rng);
    draws.insert(draws.end(), batch.begin(), batch.end());
  }
  for (const auto& t : draws) {
    const int id = static_cast<int>(t.reward);
    REQUIRE(id >= 15);
    ++counts[static_cast<std::size_t>(id - 15)];
  }
  for (auto c : counts) {
    CHECK(c / 1e5 >= 0.09);
    CHECK(c / 1e5 <= 0.11);
  }
  CHECK(oracle::chi_square(counts) < oracle::kChiSquare9At001);
}

TEST_CASE("target examples") {
  const QNetwork target = constant_net(0, 2, 1, -1);
  std::vector<Transition> batch(3);
  batch[0].terminal = true;
  batch[0].reward = -100;
  batch[1].reward = 1;
  batch[2].reward = -0.5;
  const auto y = compute_targets(batch, target, 0.99);
  CHECK(y(0) == -100.0);
  CHECK(std::abs(y(1) - 2.98) < 1e-12);
  CHECK(std::abs(y(2) - (-0.5 + 1.98)) < 1e-12);
  const auto y0 = compute_targets(batch, target, 0.0);
  for (int i = 0; i < 3; ++i) CHECK(y0(i) == batch[static_cast<std::size_t>(i)].reward);
}

TEST_CASE("greedy action ties go low") {
  CHECK(greedy_action(constant_net(0, 2, 1, -1), Observation::Zero()) == Action::FireLeft);
  CHECK(greedy_action(constant_net(3, 3, 3, 3), Observation::Zero()) == Action::Noop);
  CHECK(greedy_action(constant_net(0, 1, 4, 4), Observation::Zero()) == Action::FireMain);
}

TEST_CASE("a batch already on target leaves the loss at zero") {
  DqnConfig cfg;
  QNetwork online = QNetwork::init(cfg.layer_dims(), 3);
  const QNetwork target = online;
  std::vector<Transition> batch(4);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    batch[i].terminal = true;
    batch[i].action = action_from_index(static_cast<int>(i));
    batch[i].reward = online.forward(batch[i].state)(static_cast<Eigen::Index>(i));
  }
  Optimizer opt(online, OptimizerKind::Adam);
  const QNetwork before = online;
  CHECK(train_on_batch(online, target, batch, cfg, opt) == 0.0);
  CHECK(online == before);
}

TEST_CASE("repeated steps on one transition reach its target") {
  DqnConfig cfg;
  cfg.hidden_width = 16;
  QNetwork online = QNetwork::init(cfg.layer_dims(), 4);
  const QNetwork target = QNetwork::init(cfg.layer_dims(), 5);
  const QNetwork target_copy = target;
  Transition t;
  t.state << 0.1, 0.9, -0.2, -0.3, 0.05, 0.0, 0, 0;
  t.next_state << 0.1, 0.85, -0.2, -0.35, 0.05, 0.0, 0, 0;
  t.action = Action::FireMain;
  t.reward = 3.5;
  const std::vector<Transition> batch{t};
  const double y = compute_targets(batch, target, cfg.gamma)(0);
  Optimizer opt(online, OptimizerKind::Adam);
  for (int i = 0; i < 3000; ++i) train_on_batch(online, target, batch, cfg, opt);
  CHECK(std::abs(online.forward(t.state)(2) - y) < 1e-3);
  CHECK(target == target_copy);
}

TEST_CASE("train_step leaves the target alone") {
  DqnConfig cfg = tiny_config();
  QNetwork online = QNetwork::init(cfg.layer_dims(), 6);
  const QNetwork target = QNetwork::init(cfg.layer_dims(), 7);
  const QNetwork copy = target;
  ReplayBuffer buf(100);
  Rng rng(8);
  for (int i = 0; i < 20; ++i) {
    Transition t = tagged(rng.normal());
    t.action = action_from_index(static_cast<int>(rng.below(4)));
    t.next_state(1) = rng.normal();
    buf.push(t);
  }
  Optimizer opt(online, OptimizerKind::Sgd);
  for (int i = 0; i < 10; ++i) train_step(online, target, buf, cfg, opt, rng);
  CHECK(target == copy);
  CHECK_FALSE(online == QNetwork::init(cfg.layer_dims(), 6));
}

TEST_CASE("sync copies, is idempotent and detaches") {
  QNetwork online = QNetwork::init({8, 16, 4}, 9);
  QNetwork target = QNetwork::init({8, 16, 4}, 10);
  sync_target(online, target);
  CHECK(target == online);
  Observation s = Observation::Constant(0.3);
  CHECK(online.forward(s) == target.forward(s));
  sync_target(online, target);
  CHECK(target == online);
  const QNetwork snapshot = target;
  online.weight(0)(0, 0) += 1.0;
  CHECK(target == snapshot);
  QNetwork wrong({8, 8, 4});
  CHECK_THROWS_AS(sync_target(online, wrong), std::invalid_argument);
}

TEST_CASE("zero episodes and determinism") {
  DqnConfig cfg = tiny_config();
  cfg.episodes = 0;
  CHECK(train_dqn(PhysicsParams{}, UncertaintySpec{}, cfg, 1).log.empty());

  cfg = tiny_config();
  const auto a = train_dqn(PhysicsParams{}, UncertaintySpec{}, cfg, 11);
  const auto b = train_dqn(PhysicsParams{}, UncertaintySpec{}, cfg, 11);
  REQUIRE(a.log.size() == 4);
  CHECK(a.net == b.net);
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].reward == b.log[i].reward);
    CHECK(a.log[i].epsilon == epsilon_after(static_cast<int>(i), cfg));
  }
  const auto e1 = evaluate_dqn(a.net, PhysicsParams{}, UncertaintySpec{}, 2, 5);
  const auto e2 = evaluate_dqn(a.net, PhysicsParams{}, UncertaintySpec{}, 2, 5);
  for (std::size_t i = 0; i < e1.size(); ++i) CHECK(e1[i].reward == e2[i].reward);
}

TEST_CASE("config validation") {
  DqnConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.epsilon_decay = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

}  // TEST_SUITE
