#include <gtest/gtest.h>

#include <filesystem>

#include "r3l/agent.hpp"

using namespace r3l;
using namespace r3l::agent;

namespace {

raeb::ShapedReward reward_of(double total) {
  raeb::ShapedReward r;
  r.extrinsic = total;
  r.total = total;
  return r;
}

// Greedy table for delivery: push in the direction of motion, unload once
// the car is past the goal line.
QTable scripted_delivery_table(const Discretizer& d, const EnvConfig& env) {
  QTable q(d.cell_count(), d.action_count());
  const auto& b = d.config();
  const double width = (env.physics.max_position - env.physics.min_position) / double(b.position_bins);
  for (std::size_t pb = 0; pb < b.position_bins; ++pb) {
    const double lo = env.physics.min_position + width * double(pb);
    for (std::size_t vb = 0; vb < b.velocity_bins; ++vb) {
      const bool forward = vb >= b.velocity_bins / 2;
      const bool unload = lo >= env.physics.goal_position + 0.01;
      const std::size_t a = (forward ? 4 : 0) + (unload ? 5 : 0);
      for (std::size_t rb = 0; rb < b.resource_bins; ++rb) {
        q.at((pb * b.velocity_bins + vb) * b.resource_bins + rb, a) = 1.0;
      }
    }
  }
  return q;
}

}  // namespace

TEST(Discretizer, ActionGrid) {
  EnvConfig env;
  env.variant = Variant::Delivery;
  Discretizer d(env);
  EXPECT_EQ(d.action_count(), 10u);
  EXPECT_EQ(d.action(0), (std::vector<double>{-1.0, 0.0}));
  EXPECT_EQ(d.action(8), (std::vector<double>{0.5, 1.0}));
  EXPECT_EQ(d.action(2), (std::vector<double>{0.0, 0.0}));
  EXPECT_THROW(d.action(10), ContractViolation);
  env.variant = Variant::Electric;
  EXPECT_EQ(Discretizer(env).action_count(), 5u);
}

TEST(Discretizer, EveryStateMapsToOneCellAndEdgesClamp) {
  EnvConfig env;
  env.variant = Variant::ElectricDelivery;
  Discretizer d(env);
  EXPECT_EQ(d.cell_count(), 32u * 32u * 8u * 8u);
  RandomStream rng = seeded_rng(0);
  for (int i = 0; i < 10000; ++i) {
    R3LState s{{rng.uniform(-3, 3), rng.uniform(-1, 1)}, {rng.uniform(0, 12), rng.uniform(0, 10)}};
    ASSERT_LT(d.cell(s), d.cell_count());
  }
  EXPECT_EQ(Discretizer::bin(-9.0, -1.2, 0.6, 32), 0u);
  EXPECT_EQ(Discretizer::bin(0.6, -1.2, 0.6, 32), 31u);
  EXPECT_EQ(d.resource_bin(0.0, 10.0), 0u);
  EXPECT_EQ(d.resource_bin(1e-9, 10.0), 1u);
  EXPECT_EQ(d.resource_bin(10.0, 10.0), 7u);
}

TEST(Act, GreedyAndTieBreak) {
  RandomStream rng = seeded_rng(1);
  QTable q(2, 4);
  EXPECT_EQ(act(q, 0, 0.0, rng), 0u);
  q.at(1, 2) = 3.0;
  EXPECT_EQ(act(q, 1, 0.0, rng), 2u);
  EXPECT_THROW(act(q, 2, 0.0, rng), ContractViolation);
}

TEST(Act, UniformUnderFullExploration) {
  RandomStream rng = seeded_rng(2);
  QTable q(1, 10);
  q.at(0, 3) = 5.0;
  const std::size_t n = 100000;
  std::vector<double> counts(10);
  for (std::size_t i = 0; i < n; ++i) counts[act(q, 0, 1.0, rng)] += 1;
  const double p = 0.1, se = std::sqrt(n * p * (1 - p));
  for (double c : counts) EXPECT_NEAR(c, n * p, 3 * se);
}

TEST(Learn, TerminalFullOverwrite) {
  AgentConfig cfg;
  cfg.learning_rate = 1.0;
  QTable q(2, 2, 7.0);
  learn(q, 0, 1, 1, true, reward_of(2.5), cfg);
  EXPECT_EQ(q.at(0, 1), 2.5);
  learn(q, 0, 0, 1, false, reward_of(2.5), cfg);
  EXPECT_EQ(q.at(0, 0), 2.5 + 0.99 * 7.0);
}

TEST(Learn, ZeroRewardKeepsZeroTable) {
  AgentConfig cfg;
  QTable q(3, 2);
  for (int i = 0; i < 100; ++i) learn(q, i % 3, i % 2, (i + 1) % 3, i % 5 == 0, reward_of(0.0), cfg);
  for (double v : q.values) EXPECT_EQ(v, 0.0);
}

TEST(Learn, TwoCellChainConvergesToDiscountedValues) {
  AgentConfig cfg;
  cfg.learning_rate = 0.5;
  // cell 0 -> cell 1 -> terminal with reward 1.
  QTable q(3, 1);
  for (int sweep = 0; sweep < 10000; ++sweep) {
    learn(q, 0, 0, 1, false, reward_of(0.0), cfg);
    learn(q, 1, 0, 2, true, reward_of(1.0), cfg);
  }
  EXPECT_NEAR(q.at(1, 0), 1.0, 1e-6);
  EXPECT_NEAR(q.at(0, 0), 0.99, 1e-6);
}

TEST(Epsilon, LinearScheduleOverFirstFifth) {
  AgentConfig cfg;
  EXPECT_EQ(cfg.epsilon(0, 1000), 1.0);
  EXPECT_NEAR(cfg.epsilon(100, 1000), 0.525, 1e-12);
  EXPECT_EQ(cfg.epsilon(200, 1000), 0.05);
  EXPECT_EQ(cfg.epsilon(900, 1000), 0.05);
}

TEST(Config, Validation) {
  AgentConfig cfg;
  cfg.gamma = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.initial_q = std::nan("");
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Evaluate, UntrainedTableEarnsNothing) {
  EnvConfig env;
  env.variant = Variant::Delivery;
  Discretizer d(env);
  QTable q(d.cell_count(), d.action_count());
  const auto r = evaluate(q, d, env, 5, 0);
  EXPECT_EQ(r.mean_return, 0.0);
  EXPECT_EQ(r.returns.size(), 5u);
}

TEST(Evaluate, ScriptedPolicyDeliversEverything) {
  EnvConfig env;
  env.variant = Variant::Delivery;
  Discretizer d(env);
  const auto q = scripted_delivery_table(d, env);
  const auto r = evaluate(q, d, env, 10, 4);
  for (double x : r.returns) EXPECT_EQ(x, 1000.0);
  EXPECT_EQ(r.std_return, 0.0);
}

TEST(Evaluate, PureAndDeterministic) {
  EnvConfig env;
  env.variant = Variant::Delivery;
  Discretizer d(env);
  auto q = scripted_delivery_table(d, env);
  RandomStream rng = seeded_rng(5);
  for (double& v : q.values) v += 0.01 * rng.uniform();
  const auto before = q.checksum();
  const auto a = evaluate(q, d, env, 5, 11);
  const auto b = evaluate(q, d, env, 5, 11);
  EXPECT_EQ(q.checksum(), before);
  EXPECT_EQ(a.returns, b.returns);
}

TEST(QAgent, ObserveUpdatesTheVisitedCell) {
  EnvConfig env;
  env.variant = Variant::Delivery;
  AgentConfig cfg;
  cfg.learning_rate = 1.0;
  QAgent agent(env, cfg);
  RandomStream rng = seeded_rng(6);
  MountainCar car(env);
  const auto s = car.reset(rng);
  const auto a = agent.select(s, 0.0, rng);
  auto tr = car.step(car.project_action(agent.action(a)));
  tr.terminal = true;
  agent.observe(s, a, tr, reward_of(4.0));
  EXPECT_EQ(agent.table().at(agent.discretizer().cell(s), a), 4.0);
}

TEST(Checkpoint, QTableRoundTrip) {
  QTable q(5, 3);
  RandomStream rng = seeded_rng(7);
  for (double& v : q.values) v = rng.normal() * 100;
  const auto path = std::filesystem::temp_directory_path() / "r3l_qtable_roundtrip.txt";
  save_qtable(q, path.string());
  EXPECT_EQ(load_qtable(path.string()), q);
  std::filesystem::remove(path);
}
