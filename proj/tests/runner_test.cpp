#include "delaykit/error.hpp"
#include "delaykit/runner.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace delaykit;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("delaykit_runner_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json read_json(const fs::path& path) { return nlohmann::json::parse(slurp(path)); }

int run_cli(const std::string& args) {
  const std::string command = std::string(DELAYKIT_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void check_manifest(const RunResult& result) {
  const auto manifest = read_json(result.manifest);
  EXPECT_EQ(manifest["version"], std::string(kVersion));
  EXPECT_EQ(manifest["exit_code"], result.exit_code);
  EXPECT_EQ(manifest["outputs"].size(), result.data_files.size());
  for (std::size_t k = 0; k < result.data_files.size(); ++k) {
    const auto& entry = manifest["outputs"][k];
    const std::string bytes = slurp(result.data_files[k]);
    EXPECT_EQ(entry["file"], result.data_files[k].filename().string());
    EXPECT_EQ(entry["sha256"], sha256_hex(bytes));
    EXPECT_EQ(entry["bytes"], bytes.size());
  }
}

}  // namespace

TEST(Sha256, KnownDigest) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Runner, LemmaCheck) {
  const auto dir = fresh_dir("lemma");
  const auto config = parse_config("kind = shift\nN = 12\ndelays = 3, 6, 12\n");
  RunOptions options;
  options.out_dir = dir;
  options.threads = 2;
  const auto result = run_lemma_check(config, options);
  EXPECT_EQ(result.exit_code, kExitOk);
  check_manifest(result);
  const auto summary = read_json(dir / "lemma_summary.json");
  EXPECT_EQ(summary["all_satisfied"], true);
  std::istringstream csv(slurp(dir / "lemma_pairs.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "M,i,j,d,soft_rank,oracle_value,oracle_abs_diff,bound_M_over_2,satisfied");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 3 * 66);
}

TEST(Runner, LemmaCheckPreconditions) {
  RunOptions options;
  options.out_dir = fresh_dir("lemma_bad");
  EXPECT_THROW(run_lemma_check(parse_config("kind = shift\nN = 8\ndelays = 9\n"), options), Error);
}

TEST(Runner, ScalingStudy) {
  const auto dir = fresh_dir("scaling");
  const auto config = parse_config("kind = shift\nN = 32\ndelays = 4, 8, 16\ndraws = 30\nseed = 9\n");
  RunOptions options;
  options.out_dir = dir;
  const auto result = run_scaling_study(config, options);
  check_manifest(result);
  const auto study = read_json(dir / "scaling.json");
  EXPECT_EQ(study["rows"].size(), 3u);
  EXPECT_TRUE(study["fit"].contains("slope"));
  EXPECT_THROW(run_scaling_study(parse_config("kind = shift\nN = 32\ndelays = 4, 8\n"), options), Error);
}

TEST(Runner, ReportWithoutTheorem) {
  const auto dir = fresh_dir("report");
  const auto config = parse_config("kind = shift\nN = 16\ndelays = 6\ndraws = 20\nensemble = gaussian\n");
  RunOptions options;
  options.out_dir = dir;
  options.seed = 77;
  const auto result = run_full_report(config, options);
  EXPECT_EQ(result.exit_code, kExitOk);
  check_manifest(result);
  EXPECT_FALSE(fs::exists(dir / "theorem_check.json"));
  const auto report = read_json(dir / "embedding_report.json");
  EXPECT_EQ(report["ensemble"], "gaussian");
  EXPECT_EQ(report["base_seed"], 77u);
  EXPECT_EQ(report["per_draw"].size(), 20u);
  const auto manifest = read_json(result.manifest);
  EXPECT_EQ(manifest["overrides"]["seed"], 77u);
  const auto geometry = read_json(dir / "geometry.json");
  EXPECT_EQ(geometry["trajectory_manifold"]["status"], "ok");
  EXPECT_EQ(geometry["delay_selection"]["status"], "ok");
}

TEST(Runner, ReportWithTheorem) {
  const auto dir = fresh_dir("report_theorem");
  const auto config = parse_config("kind = shift\nN = 16\ndelays = 8\ndraws = 10\ntheorem_c = 1\n");
  RunOptions options;
  options.out_dir = dir;
  run_full_report(config, options);
  const auto check = read_json(dir / "theorem_check.json");
  EXPECT_EQ(check["epsilon_source"], "measured median");
  EXPECT_TRUE(check.contains("satisfied"));
  EXPECT_THROW(run_full_report(parse_config("kind = shift\nN = 16\ndelays = 4, 8\n"), options), Error);
}

TEST(Runner, DataFilesIndependentOfThreads) {
  const auto config = parse_config("kind = shift\nN = 24\ndelays = 5\ndraws = 25\nseed = 3\n");
  RunOptions one;
  one.out_dir = fresh_dir("threads1");
  one.threads = 1;
  RunOptions many = one;
  many.out_dir = fresh_dir("threads4");
  many.threads = 4;
  const auto a = run_full_report(config, one);
  const auto b = run_full_report(config, many);
  ASSERT_EQ(a.data_files.size(), b.data_files.size());
  for (std::size_t k = 0; k < a.data_files.size(); ++k) {
    EXPECT_EQ(slurp(a.data_files[k]), slurp(b.data_files[k])) << a.data_files[k].filename();
  }
}

TEST(Cli, ExitCodes) {
  const auto dir = fresh_dir("cli");
  std::ofstream(dir / "ok.cfg") << "kind = shift\nN = 8\ndelays = 2, 4, 8\ndraws = 5\n";
  std::ofstream(dir / "bad.cfg") << "kind = shift\nN = 8\ndelays = 0\n";
  const std::string out = " --out " + (dir / "out").string();
  EXPECT_EQ(run_cli("lemma-check --config " + (dir / "ok.cfg").string() + out), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "manifest.json"));
  EXPECT_EQ(run_cli("scaling --config " + (dir / "ok.cfg").string() + out + " --seed 4 --threads 2"), 0);
  EXPECT_EQ(run_cli("lemma-check --config " + (dir / "bad.cfg").string() + out), 1);
  EXPECT_EQ(run_cli("lemma-check --config " + (dir / "missing.cfg").string()), 1);
  EXPECT_EQ(run_cli("report --config " + (dir / "ok.cfg").string() + out), 1);  // needs one M
  EXPECT_EQ(run_cli("frobnicate"), 1);
  EXPECT_EQ(run_cli("--version"), 0);
}
