#include "delaykit/config.hpp"
#include "delaykit/error.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace delaykit;

namespace {

std::string message_of(std::string_view text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
    return e.what();
  }
  ADD_FAILURE() << "no error for:\n" << text;
  return {};
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("delaykit_config_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Config, MinimalShift) {
  const auto config = parse_config("kind = shift\nN = 8\ndelays = 4\n");
  EXPECT_EQ(config.kind, SystemKind::shift);
  EXPECT_EQ(config.ambient_dim, 8);
  EXPECT_EQ(config.delays, std::vector<int>{4});
  EXPECT_EQ(config.ensemble, Ensemble::rademacher);
  EXPECT_EQ(config.draws, 100u);
  EXPECT_FALSE(config.theorem.has_value());
  ASSERT_EQ(config.entries.size(), 3u);
  EXPECT_EQ(config.entries[1], (std::pair<std::string, std::string>{"N", "8"}));

  const auto samples = build_samples(config, build_flow(config));
  EXPECT_EQ(samples.states.size(), 8u);
  EXPECT_EQ(samples.period, std::optional<int>(8));
  EXPECT_EQ(samples.states[0], basis_state(8, 1));
}

TEST(Config, FullKeySet) {
  const auto config = parse_config(
      "# comment line\n"
      "kind = shift   # trailing comment\n"
      "N = 12\n"
      "origin = e3\n"
      "samples = 5\n"
      "delays = 2, 4, 8\n"
      "ensemble = gaussian\n"
      "draws = 7\n"
      "seed = 123\n"
      "outputs = results\n"
      "target_eps = 0.2, 0.4\n"
      "theorem_c = 1.5\n"
      "theorem_dim = 2\n"
      "theorem_eps = 0.3\n"
      "mi_bins = 8\n"
      "lyapunov_steps = 50\n"
      "lyapunov_perturbation = 1e-6\n"
      "series_length = 200\n",
      "/base");
  EXPECT_EQ(config.origin, basis_state(12, 3));
  EXPECT_EQ(config.sample_count, 5);
  EXPECT_EQ(config.delays, (std::vector<int>{2, 4, 8}));
  EXPECT_EQ(config.ensemble, Ensemble::gaussian);
  EXPECT_EQ(config.seed, 123u);
  EXPECT_EQ(config.outputs, std::filesystem::path("/base/results"));
  EXPECT_EQ(config.target_eps, (std::vector<double>{0.2, 0.4}));
  ASSERT_TRUE(config.theorem.has_value());
  EXPECT_EQ(config.theorem->c_user, 1.5);
  EXPECT_EQ(config.theorem->dim, 2.0);
  EXPECT_EQ(config.theorem->epsilon, std::optional<double>(0.3));
  EXPECT_EQ(config.mi_bins, 8);
  EXPECT_EQ(config.series_length, 200);

  const auto samples = build_samples(config, build_flow(config));
  ASSERT_EQ(samples.states.size(), 5u);
  EXPECT_EQ(samples.states[1], basis_state(12, 2));  // (Phi x)_i = x_{i+1}
}

TEST(Config, ZeroDelaysNamesKey) {
  EXPECT_NE(message_of("kind = shift\nN = 8\ndelays = 0\n").find("delays"), std::string::npos);
}

TEST(Config, Rejections) {
  EXPECT_NE(message_of("kind = shift\nN = 8\ndelays = 4\nensemble = bernoulli\n").find("ensemble"), std::string::npos);
  EXPECT_NE(message_of("kind = shift\nN = 8\ndelays = 4\ncolour = red\n").find("colour"), std::string::npos);
  EXPECT_NE(message_of("kind = shift\nN = 8\nN = 9\ndelays = 4\n").find("N"), std::string::npos);
  EXPECT_NE(message_of("kind = shift\nN = 8\n").find("delays"), std::string::npos);
  EXPECT_NE(message_of("kind = shift\nN = 0\ndelays = 4\n").find("N"), std::string::npos);
  EXPECT_NE(message_of("kind = shift\nN = 8\ndelays = 4, 2\n").find("delays"), std::string::npos);
  EXPECT_NE(message_of("kind = shift\nN = 8\ndelays = 4\ndraws = -3\n").find("draws"), std::string::npos);
  EXPECT_NE(message_of("kind = shift\nN = 8\ndelays = 4\norigin = e9\n").find("origin"), std::string::npos);
  EXPECT_NE(message_of("kind = shift\nN = 8\ndelays = 4\ntheorem_dim = 2\n").find("theorem_c"), std::string::npos);
  EXPECT_NE(message_of("kind = linear\nN = 2\ndelays = 1\n").find("matrix"), std::string::npos);
}

TEST(Config, ParseErrorHasLineNumber) {
  EXPECT_NE(message_of("kind = shift\nN = 8\nthis line has no equals\n").find("line 3"), std::string::npos);
}

TEST(Config, MissingFile) {
  try {
    load_config("/nonexistent/delaykit.cfg");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
    EXPECT_NE(std::string(e.what()).find("delaykit.cfg"), std::string::npos);
  }
}

TEST(Config, LinearSystemFromFiles) {
  const auto dir = temp_dir("linear");
  std::ofstream(dir / "rotation.txt") << "0 -1\n1 0\n";
  std::ofstream(dir / "states.txt") << "1 0\n0 1\n-1 0\n";
  std::ofstream(dir / "run.cfg") << "kind = linear\nN = 2\nmatrix = rotation.txt\nstates = states.txt\ndelays = 2\n";
  const auto config = load_config(dir / "run.cfg");
  const FlowSpec flow = build_flow(config);
  EXPECT_EQ(flow.kind(), FlowKind::linear);
  EXPECT_DOUBLE_EQ(flow.step(Eigen::Vector2d(1, 0))(1), 1.0);
  const auto samples = build_samples(config, flow);
  ASSERT_EQ(samples.states.size(), 3u);
  EXPECT_EQ(samples.states[2], Eigen::Vector2d(-1, 0));
  EXPECT_FALSE(samples.period.has_value());
}

TEST(Config, BadMatrixFile) {
  const auto dir = temp_dir("badmatrix");
  std::ofstream(dir / "m.txt") << "1 2\n3\n";
  std::ofstream(dir / "run.cfg") << "kind = linear\nN = 2\nmatrix = m.txt\ndelays = 1\n";
  EXPECT_THROW(build_flow(load_config(dir / "run.cfg")), Error);
}
