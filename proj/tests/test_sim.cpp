#include <gtest/gtest.h>

#include <sstream>

#include "nrhc/config.hpp"
#include "nrhc/errors.hpp"
#include "nrhc/sim.hpp"
#include "independent_cost.hpp"
#include "test_util.hpp"

using namespace nrhc;
using namespace nrhc::sim;
using nrhc::fixture::vec3;

namespace {

SimConfig short_preset(const std::string& name, double t_end, std::optional<double> delay = std::nullopt) {
  return config::preset(name, t_end, delay);
}

std::string csv(const TrajectoryLog& log) {
  std::ostringstream out;
  config::write_trajectory_csv(out, log);
  return out.str();
}

}  // namespace

TEST(DelayBuffer, PrefillAndLookback) {
  const std::vector<Vector> init{vec3(0, 0, 0), vec3(1, 1, 1)};
  DelayBuffer buf(init, 20);
  for (int k = 1; k <= 25; ++k) {
    buf.push({vec3(k, 0, 0), vec3(0, k, 0)});
    if (k <= 20) {
      EXPECT_EQ(buf.delayed(1), init[1]);
    } else {
      EXPECT_EQ(buf.delayed(0), vec3(k - 20, 0, 0));
      EXPECT_EQ(buf.delayed(1), vec3(0, k - 20, 0));
    }
  }
  EXPECT_THROW(buf.delayed(2), ArgumentError);
}

TEST(DelayBuffer, ZeroDelayIsCurrent) {
  DelayBuffer buf({vec3(0, 0, 0)}, 0);
  buf.push({vec3(3, 2, 1)});
  EXPECT_EQ(buf.delayed(0), vec3(3, 2, 1));
}

TEST(Snapshot, DelayedWorldLooksTwentySamplesBack) {
  World world(short_preset("example3", 1.0, 0.2));
  std::vector<std::vector<Vector>> history{world.states()};
  const graph::Topology topo = graph::delay_example_topology();
  for (int k = 0; k < 30; ++k) {
    const auto nb = world.snapshot(1, topo);
    const std::size_t back = world.sample() >= 20 ? world.sample() - 20 : 0;
    ASSERT_EQ(nb.entries.size(), 2u);
    EXPECT_EQ(nb.entries[0].index, 0u);
    EXPECT_EQ(nb.entries[0].state, history[back][0]);
    EXPECT_EQ(nb.entries[1].state, history[back][2]);
    world.step();
    history.push_back(world.states());
  }
}

TEST(Snapshot, NoDelayUsesCurrentStates) {
  World world(short_preset("example1", 1.0));
  for (int k = 0; k < 5; ++k) world.step();
  const auto nb = world.snapshot(0, graph::example_topologies()[0]);
  ASSERT_EQ(nb.entries.size(), 1u);
  EXPECT_EQ(nb.entries[0].state, world.states()[1]);
}

TEST(ConsensusError, Examples) {
  const std::vector<Vector> same(3, vec3(1, 2, 3));
  const auto z = consensus_error(same);
  EXPECT_TRUE(z.stacked.isZero(0.0));
  EXPECT_EQ(z.stacked.size(), 6);
  EXPECT_EQ(z.max_norm, 0.0);
  EXPECT_DOUBLE_EQ(consensus_error(std::vector<Vector>{vec3(1, 1, 1), vec3(4, 5, 1)}).max_norm, 5.0);

  const std::vector<Vector> a{vec3(0, 0, 0), vec3(1, 0, 0), vec3(0, 3, 0), vec3(0, 0, 2)};
  const std::vector<Vector> b{a[0], a[3], a[1], a[2]};
  EXPECT_EQ(consensus_error(a).max_norm, consensus_error(b).max_norm);
  EXPECT_EQ(consensus_error(b).stacked.head(3), vec3(0, 0, 2));
}

TEST(Run, ZeroEndTimeLogsInitialRecordOnly) {
  const auto log = run(short_preset("example1", 0.0));
  ASSERT_EQ(log.samples.size(), 1u);
  EXPECT_EQ(log.samples[0].t, 0.0);
  EXPECT_EQ(log.samples[0].x, config::preset("example1").initial_states);
}

TEST(Run, SampleTimesAreMultiplesOfTs) {
  const auto log = run(short_preset("example1", 0.5));
  ASSERT_EQ(log.samples.size(), 51u);
  for (std::size_t k = 0; k < log.samples.size(); ++k) {
    EXPECT_EQ(log.samples[k].t, static_cast<double>(k) * 0.01);
  }
}

TEST(Run, Deterministic) {
  const SimConfig cfg = short_preset("example2", 1.0);
  EXPECT_EQ(csv(run(cfg)), csv(run(cfg)));
}

TEST(Run, ParallelWorkersMatchSerial) {
  const SimConfig cfg = short_preset("example1", 1.0);
  EXPECT_EQ(csv(run(cfg, {1, true})), csv(run(cfg, {4, true})));
}

TEST(Run, DelayCodePathWithZeroLengthBuffer) {
  const SimConfig cfg = short_preset("example1", 3.0);
  EXPECT_EQ(csv(run(cfg, {1, true})), csv(run(cfg, {1, false})));
}

TEST(Run, IdenticalStatesStayAtConsensus) {
  for (const std::string name : {"example1", "example2"}) {
    SimConfig cfg = short_preset(name, 3.0);
    cfg.initial_states.assign(4, vec3(-1, 10, 2));
    const auto log = run(cfg);
    for (const auto& s : log.samples) ASSERT_LT(s.consensus_err, 1e-12) << name << " t=" << s.t;
  }
}

TEST(Run, SingleAgent) {
  SimConfig cfg = short_preset("example1", 1.0);
  cfg.initial_states.resize(1);
  cfg.weights.erase(cfg.weights.begin() + 1, cfg.weights.end());
  cfg.schedule = graph::SwitchingSchedule::fixed({graph::Topology::empty(1)}, {{0.0, 0}});
  const auto log = run(cfg);
  ASSERT_EQ(log.samples.size(), 101u);
  for (const auto& s : log.samples) {
    EXPECT_TRUE(s.u[0].isZero(0.0));
    EXPECT_EQ(s.cost[0], 0.0);
    EXPECT_EQ(s.consensus_err, 0.0);
  }
}

TEST(Run, DivergenceCarriesAgentAndPartialLog) {
  SimConfig cfg = short_preset("example1", 1.0);
  cfg.initial_states[2] = vec3(1e120, -1e120, 1e120);
  try {
    run(cfg);
    FAIL() << "expected divergence";
  } catch (const RunDiverged& e) {
    ASSERT_TRUE(e.agent().has_value());
    EXPECT_LT(e.partial_log().samples.size(), 101u);
  }
}

TEST(SelectTopology, TrivialCases) {
  World world(short_preset("example2", 1.0));
  world.step();
  const std::vector<graph::Topology> one{graph::example_topologies()[1]};
  EXPECT_EQ(select_topology(world, one), 0u);
  const std::vector<graph::Topology> dup(3, graph::example_topologies()[2]);
  EXPECT_EQ(select_topology(world, dup), 0u);
  EXPECT_THROW(select_topology(world, std::vector<graph::Topology>{}), ArgumentError);
  EXPECT_EQ(argmin_cost(std::vector<double>{3.0, 1.0, 1.0}), 1u);
}

TEST(SelectTopology, EmptyVersusConnectedMatchesIndependentEvaluation) {
  World world(short_preset("example2", 1.0));
  for (int k = 0; k < 20; ++k) world.step();
  const std::vector<graph::Topology> pair{graph::Topology::empty(4), graph::example_topologies()[0]};
  const double c0 = fixture::independent_cost(world, world.states(), pair[0]);
  const double c1 = fixture::independent_cost(world, world.states(), pair[1]);
  EXPECT_NEAR(network_cost(world, pair[0]), c0, 1e-9 * std::max(1.0, c0));
  EXPECT_NEAR(network_cost(world, pair[1]), c1, 1e-9 * std::max(1.0, c1));
  EXPECT_EQ(select_topology(world, pair), c0 <= c1 ? 0u : 1u);
}

TEST(SelectTopology, DecisionsAreArgminOfIndependentEvaluation) {
  World world(short_preset("example2", 2.0));
  for (int k = 0; k < 200; ++k) {
    const std::vector<Vector> received = fixture::received_states(world);
    world.step();
    const auto& d = world.log().decisions.back();
    const auto& family = world.config().schedule.topologies();
    std::vector<double> again;
    for (const auto& t : family) again.push_back(fixture::independent_cost(world, received, t));
    std::size_t best = 0;
    for (std::size_t c = 1; c < again.size(); ++c)
      if (again[c] < again[best]) best = c;
    ASSERT_EQ(d.chosen, best) << "t=" << d.t;
    EXPECT_EQ(world.active_sigma(), d.chosen);
  }
}

TEST(SimConfig, ValidationNamesField) {
  SimConfig cfg = short_preset("example1", 1.0);
  cfg.delay = 0.015;
  try {
    cfg.validate();
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "delay");
  }
  cfg = short_preset("example1", 1.0);
  cfg.As = Matrix::Identity(3, 3);
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = short_preset("example1", 1.0);
  cfg.weights.pop_back();
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = short_preset("example1", 1.0);
  cfg.model = "nope";
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = short_preset("example1", 1.0);
  cfg.initial_states.push_back(vec3(0, 0, 0));
  cfg.weights.push_back(ocp::CostWeights::identity(3));
  EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(World, SwitchEventsFollowRoundRobin) {
  const auto log = run(short_preset("example1", 8.0));
  ASSERT_EQ(log.switches.size(), 4u);
  for (std::size_t k = 0; k < log.switches.size(); ++k) {
    EXPECT_NEAR(log.switches[k].time, 2.5 * static_cast<double>(k), 1e-9);
    EXPECT_EQ(log.switches[k].index, k % 3);
  }
}
