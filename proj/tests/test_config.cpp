#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "nrhc/config.hpp"
#include "nrhc/errors.hpp"
#include "test_util.hpp"

using namespace nrhc;
using namespace nrhc::config;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nrhc_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string field_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ValidationError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(Preset, Example1Constants) {
  const auto cfg = preset("example1");
  ASSERT_EQ(cfg.agent_count(), 4u);
  EXPECT_EQ(cfg.model, "lorenz");
  EXPECT_EQ(cfg.initial_states[0], fixture::vec3(-1, 10, 2));
  EXPECT_EQ(cfg.initial_states[1], fixture::vec3(2, -1, 5));
  EXPECT_EQ(cfg.initial_states[2], fixture::vec3(-10, 20, 8));
  EXPECT_EQ(cfg.initial_states[3], fixture::vec3(9, -10, -2));
  for (const auto& w : cfg.weights) EXPECT_EQ(w, ocp::CostWeights::identity(3));
  EXPECT_EQ(cfg.As, -50.0 * Matrix::Identity(3, 3));
  EXPECT_EQ(cfg.horizon, ocp::HorizonSchedule(1.0, 0.01));
  EXPECT_EQ(cfg.ts, 0.01);
  EXPECT_EQ(cfg.tau_step, 0.005);
  EXPECT_EQ(cfg.t_end, 20.0);
  EXPECT_EQ(cfg.delay, 0.0);
  EXPECT_FALSE(cfg.schedule.is_auto());
}

TEST(Preset, Example2And3) {
  EXPECT_TRUE(preset("example2").schedule.is_auto());
  const auto e3 = preset("example3");
  EXPECT_EQ(e3.delay, 0.2);
  EXPECT_EQ(e3.delay_samples(), 20u);
  EXPECT_EQ(e3.t_end, 30.0);
  EXPECT_EQ(e3.schedule.topologies().front(), graph::delay_example_topology());
  EXPECT_EQ(preset("example3", std::nullopt, 1.0).delay_samples(), 100u);
  EXPECT_THROW(preset("example3", std::nullopt, 0.0), ValidationError);
  EXPECT_THROW(preset("example9"), ValidationError);
}

TEST(ParseConfig, RoundTripsEveryPreset) {
  for (const auto& name : preset_names()) {
    const auto cfg = preset(name);
    EXPECT_EQ(parse_config(to_json(cfg)), cfg) << name;
    EXPECT_EQ(parse_config(json::parse(to_json(cfg).dump())), cfg) << name;
  }
}

TEST(ParseConfig, NamesOffendingField) {
  json doc = to_json(preset("example1"));
  doc["weights"] = {{"Q", {1, 0, 0, 0, 1, 0, 0, 0, -1}}, {"QN", {1, 1, 1}}, {"R", {1, 1, 1}}};
  EXPECT_EQ(field_of(doc), "weights");

  doc = to_json(preset("example1"));
  doc["delay"] = 0.015;
  EXPECT_EQ(field_of(doc), "delay");

  doc = to_json(preset("example1"));
  doc.erase("ts");
  EXPECT_EQ(field_of(doc), "ts");

  doc = to_json(preset("example1"));
  doc["As"] = {1, 2};
  EXPECT_EQ(field_of(doc), "As");

  doc = to_json(preset("example1"));
  doc["switching"]["mode"] = "sometimes";
  EXPECT_EQ(field_of(doc), "switching.mode");

  doc = to_json(preset("example1"));
  doc["topologies"][0][0] = 1.0;
  EXPECT_EQ(field_of(doc), "topologies[0]");

  doc = to_json(preset("example1"));
  doc["scheme"] = "rk45";
  EXPECT_EQ(field_of(doc), "scheme");

  EXPECT_EQ(field_of(json::array()), "(root)");
}

TEST(ParseConfig, DiagonalAndFullMatrices) {
  json doc = to_json(preset("example1"));
  doc["weights"] = {{"Q", {2, 2, 2}}, {"QN", {1, 0, 0, 0, 1, 0, 0, 0, 1}}, {"R", {3, 3, 3}}};
  const auto cfg = parse_config(doc);
  EXPECT_EQ(cfg.weights[2].Q(), 2.0 * Matrix::Identity(3, 3));
  EXPECT_EQ(cfg.weights[0].R(), 3.0 * Matrix::Identity(3, 3));
}

TEST(LoadConfig, MissingFileIsIoError) {
  EXPECT_THROW(load_config("/nonexistent/path/config.json"), std::system_error);
}

TEST(LoadConfig, MalformedJsonIsValidationError) {
  const fs::path dir = scratch("bad_json");
  fs::create_directories(dir);
  std::ofstream(dir / "c.json") << "{ not json";
  EXPECT_THROW(load_config(dir / "c.json"), ValidationError);
}

TEST(FormatNumber, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -22.715633383201094, 1e-300, 2.5, 0.0, 6.02e23}) {
    const std::string s = format_number(v);
    EXPECT_EQ(std::stod(s), v) << s;
  }
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(2.0), "2");
}

TEST(RunAndEmit, HeaderAndRowCount) {
  const fs::path dir = scratch("rows");
  std::ostringstream out, err;
  ASSERT_EQ(run_and_emit(preset("example1", 0.5), dir, out, err), kOk) << err.str();
  const auto rows = lines(slurp(dir / "trajectory.csv"));
  EXPECT_EQ(rows.front(), "t,agent,x1,x2,x3,u1,u2,u3,sigma,J,P_norm,consensus_err");
  EXPECT_EQ(rows.size(), 1u + 4u * 51u);
  EXPECT_NE(out.str().find("consensus error"), std::string::npos);
}

TEST(RunAndEmit, ZeroEndTimeOneRowPerAgent) {
  const fs::path dir = scratch("t0");
  std::ostringstream out, err;
  ASSERT_EQ(run_and_emit(preset("example2", 0.0), dir, out, err), kOk);
  EXPECT_EQ(lines(slurp(dir / "trajectory.csv")).size(), 5u);
}

TEST(RunAndEmit, ByteIdenticalReruns) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  std::ostringstream out, err;
  const auto cfg = preset("example3", 1.0);
  ASSERT_EQ(run_and_emit(cfg, a, out, err), kOk);
  ASSERT_EQ(run_and_emit(cfg, b, out, err), kOk);
  EXPECT_EQ(slurp(a / "trajectory.csv"), slurp(b / "trajectory.csv"));
  EXPECT_EQ(slurp(a / "switching.csv"), slurp(b / "switching.csv"));
}

TEST(RunAndEmit, MetricsSwitchEventsMatchSwitchingCsv) {
  const fs::path dir = scratch("metrics");
  std::ostringstream out, err;
  ASSERT_EQ(run_and_emit(preset("example2", 2.0), dir, out, err), kOk);
  const json metrics = json::parse(slurp(dir / "metrics.json"));
  const auto rows = lines(slurp(dir / "switching.csv"));
  ASSERT_EQ(rows.front(), "t,sigma");
  const auto& events = metrics.at("switch_events");
  ASSERT_EQ(events.size() + 1, rows.size());
  double last = -1.0;
  for (std::size_t k = 0; k < events.size(); ++k) {
    const double t = events[k].at("t").get<double>();
    EXPECT_GT(t, last);
    last = t;
    EXPECT_EQ(rows[k + 1], format_number(t) + "," + std::to_string(events[k].at("sigma").get<std::size_t>()));
  }
}

TEST(RunAndEmit, UnwritableDirectoryIsIoError) {
  const fs::path file = scratch("blocker");
  std::ofstream(file) << "x";
  std::ostringstream out, err;
  EXPECT_EQ(run_and_emit(preset("example1", 0.0), file / "sub", out, err), kIo);
}

TEST(RunAndEmit, DivergenceFlushesPartialOutputs) {
  const fs::path dir = scratch("diverge");
  auto cfg = preset("example1", 1.0);
  cfg.initial_states[1] = fixture::vec3(1e120, 1e120, -1e120);
  std::ostringstream out, err;
  EXPECT_EQ(run_and_emit(cfg, dir, out, err), kDivergence);
  EXPECT_TRUE(fs::exists(dir / "trajectory.csv"));
  EXPECT_EQ(json::parse(slurp(dir / "metrics.json")).at("status"), "diverged");
}

TEST(RunAndEmit, InvalidConfigIsValidationExit) {
  auto cfg = preset("example1", 1.0);
  cfg.ts = -1.0;
  std::ostringstream out, err;
  EXPECT_EQ(run_and_emit(cfg, scratch("invalid"), out, err), kValidation);
}
