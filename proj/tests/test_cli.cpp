#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "abmal/active.hpp"
#include "abmal/cli.hpp"
#include "abmal/data.hpp"
#include "abmal/model_io.hpp"
#include "abmal/serve.hpp"

using namespace abmal;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run(const std::string& args) {
  const std::string cmd = std::string(ABMAL_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  CliRun r;
  char buf[4096];
  while (std::size_t k = std::fread(buf, 1, sizeof buf, p)) r.out.append(buf, k);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("abmal_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenSynthWritesDatasetAndManifest) {
  const CliRun r = run("gen-synth --n 8 --d 6 --count 200 --seed 1 --out " + path("a.jsonl"));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(count_lines(slurp(path("a.jsonl"))), 200u);
  const Dataset ds = load_dataset(path("a.jsonl"));
  EXPECT_EQ(ds.instances, gen_synthetic(8, 6, 200, 1, 0.0).instances);

  const auto man = nlohmann::json::parse(slurp(path("a.jsonl.manifest.json")));
  EXPECT_EQ(man["command"], "gen-synth");
  EXPECT_EQ(man["seed"], 1);
  EXPECT_EQ(man["config"]["n"], 8);
  EXPECT_EQ(man["dataset_sha256"], sha256_file(path("a.jsonl")));
  EXPECT_EQ(man["dataset_sha256"].get<std::string>().size(), 64u);

  ASSERT_EQ(run("gen-synth --n 8 --d 6 --count 200 --seed 1 --out " + path("b.jsonl")).code, 0);
  EXPECT_EQ(slurp(path("a.jsonl")), slurp(path("b.jsonl")));
}

TEST_F(Cli, Sha256KnownVector) {
  std::ofstream(path("abc.txt"), std::ios::binary) << "abc";
  EXPECT_EQ(sha256_file(path("abc.txt")), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_F(Cli, FlagErrorsExitTwo) {
  EXPECT_EQ(run("gen-synth --n 8 --d 6 --count 20").code, 2);
  EXPECT_EQ(run("gen-synth --n 1 --out " + path("x.jsonl")).code, 2);
  EXPECT_EQ(run("no-such-command").code, 2);
  EXPECT_EQ(run("--help").code, 0);
  ASSERT_EQ(run("gen-synth --n 3 --d 2 --count 10 --out " + path("d.jsonl")).code, 0);
  EXPECT_EQ(run("train --data " + path("d.jsonl") + " --epochs 0 --out " + path("m.json")).code, 2);
  EXPECT_EQ(run("train --data " + path("d.jsonl") + " --model crf --out " + path("m.json")).code, 2);
}

TEST_F(Cli, RuntimeErrorsExitOne) {
  EXPECT_EQ(run("train --data " + path("missing.jsonl") + " --out " + path("m.json")).code, 1);
  std::ofstream(path("bad.jsonl")) << "{broken\n";
  EXPECT_EQ(run("train --data " + path("bad.jsonl") + " --out " + path("m.json")).code, 1);
}

TEST_F(Cli, TrainEvalMatchesLibrary) {
  ASSERT_EQ(run("gen-synth --n 4 --d 3 --count 20 --seed 2 --out " + path("d.jsonl")).code, 0);
  for (const std::string model : {"abm", "ssvm"}) {
    const std::string m = path(model + ".json");
    ASSERT_EQ(run("train --data " + path("d.jsonl") + " --model " + model + " --epochs 3 --seed 4 --out " + m).code, 0);
    const std::string first = slurp(m);
    ASSERT_EQ(run("train --data " + path("d.jsonl") + " --model " + model + " --epochs 3 --seed 4 --out " + m).code, 0);
    EXPECT_EQ(slurp(m), first);
    const auto man = nlohmann::json::parse(slurp(m + ".manifest.json"));
    EXPECT_EQ(man["command"], "train");
    EXPECT_EQ(man["dataset_sha256"], sha256_file(path("d.jsonl")));
    EXPECT_EQ(man["config"]["epochs"], 3);

    const Dataset ds = load_dataset(path("d.jsonl"));
    std::vector<std::size_t> ids(ds.size());
    std::iota(ids.begin(), ids.end(), 0);
    const EvalSummary s = evaluate_hamming(load_model(m), ds, ids);
    const CliRun e = run("eval --model " + m + " --data " + path("d.jsonl"));
    ASSERT_EQ(e.code, 0);
    char expect[128];
    std::snprintf(expect, sizeof expect, "hamming_rate %.6f\nmean_support_size %.6f\n", s.hamming_rate,
                  s.mean_support_size);
    EXPECT_EQ(e.out, expect);
  }
}

TEST_F(Cli, EvalPerfectModelPrintsZero) {
  ASSERT_EQ(run("gen-synth --n 5 --d 3 --count 10 --seed 3 --noise 0 --out " + path("d.jsonl")).code, 0);
  ModelParams m;
  m.theta = 1000.0 * *load_dataset(path("d.jsonl")).planted_theta();
  save_model(m, path("m.json"));
  const CliRun e = run("eval --model " + path("m.json") + " --data " + path("d.jsonl") + " --out " + path("r.json"));
  ASSERT_EQ(e.code, 0);
  EXPECT_EQ(e.out.substr(0, e.out.find('\n')), "hamming_rate 0.000000");
  EXPECT_EQ(nlohmann::json::parse(slurp(path("r.json")))["hamming_rate"], 0.0);
  EXPECT_TRUE(fs::exists(path("r.json.manifest.json")));
}

TEST_F(Cli, EvalDimensionMismatchExitsOne) {
  ASSERT_EQ(run("gen-synth --n 3 --d 2 --count 5 --out " + path("d.jsonl")).code, 0);
  ModelParams m;
  m.theta = Eigen::VectorXd::Ones(4);
  save_model(m, path("m.json"));
  EXPECT_EQ(run("eval --model " + path("m.json") + " --data " + path("d.jsonl")).code, 1);
}

TEST_F(Cli, ActiveSimRowCountsAndDeterminism) {
  ASSERT_EQ(run("gen-synth --n 3 --d 2 --count 150 --seed 5 --out " + path("d.jsonl")).code, 0);
  const std::string args = "active-sim --data " + path("d.jsonl") +
                           " --strategy random --rounds 100 --splits 30 --seed 7 --epochs 1 --out ";
  const CliRun r = run(args + path("a.csv"));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("random auc ", 0), 0u);
  const std::string csv = slurp(path("a.csv"));
  EXPECT_EQ(count_lines(csv), 1 + 30u * 101u);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kCurveCsvHeader);
  ASSERT_EQ(run(args + path("b.csv")).code, 0);
  EXPECT_EQ(slurp(path("b.csv")), csv);
  const auto man = nlohmann::json::parse(slurp(path("a.csv.manifest.json")));
  EXPECT_EQ(man["command"], "active-sim");
  EXPECT_EQ(man["config"]["splits"], 30);
  EXPECT_EQ(man["dataset_sha256"], sha256_file(path("d.jsonl")));
}

TEST_F(Cli, ActiveSimMatchesLibraryAndTruncates) {
  ASSERT_EQ(run("gen-synth --n 3 --d 2 --count 20 --seed 6 --out " + path("d.jsonl")).code, 0);
  const CliRun r = run("active-sim --data " + path("d.jsonl") +
                    " --strategy all --rounds 30 --splits 2 --seed 3 --epochs 2 --out " + path("c.csv"));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(count_lines(r.out), 3u);

  const Dataset ds = load_dataset(path("d.jsonl"));
  std::vector<CurveRecord> all;
  for (Strategy st : {Strategy::AbmMi, Strategy::SsvmEntropy, Strategy::Random}) {
    ActiveConfig cfg;
    cfg.strategy = st;
    cfg.rounds = 30;
    cfg.train.epochs = 2;
    const MultiSplitResult m = run_active_splits(ds, cfg, 3, 2);
    EXPECT_EQ(m.truncated_splits, 2u);
    all.insert(all.end(), m.records.begin(), m.records.end());
  }
  EXPECT_EQ(slurp(path("c.csv")), curve_csv(all));
}

TEST_F(Cli, IngestMotDoublesNodes) {
  std::ofstream(path("gt.txt")) << "1,1,10,10,20,40,1,-1,-1,-1\n"
                                   "1,2,100,10,20,40,1,-1,-1,-1\n"
                                   "1,3,200,10,20,40,1,-1,-1,-1\n"
                                   "2,1,12,10,20,40,1,-1,-1,-1\n"
                                   "2,3,203,10,20,40,1,-1,-1,-1\n";
  const CliRun r = run("ingest-mot --gt " + path("gt.txt") + " --out " + path("m.jsonl"));
  ASSERT_EQ(r.code, 0);
  const Dataset ds = load_dataset(path("m.jsonl"));
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].n, 6u);
  EXPECT_EQ(ds[0].d, 8u);
  const auto man = nlohmann::json::parse(slurp(path("m.jsonl.manifest.json")));
  EXPECT_EQ(man["command"], "ingest-mot");
  EXPECT_EQ(man["dataset_sha256"], sha256_file(path("m.jsonl")));

  std::ofstream(path("bad.txt")) << "1,1,a,10,20,40\n";
  EXPECT_EQ(run("ingest-mot --gt " + path("bad.txt") + " --out " + path("x.jsonl")).code, 1);
}

TEST_F(Cli, ServePortBusyExitsOne) {
  ASSERT_EQ(run("gen-synth --n 3 --d 2 --count 20 --out " + path("d.jsonl")).code, 0);
  ActiveConfig cfg;
  cfg.rounds = 1;
  cfg.train.epochs = 1;
  ServeApp app(load_dataset(path("d.jsonl")), cfg, 1);
  HttpServer holder(app);
  const int port = holder.bind("127.0.0.1", 0);
  EXPECT_EQ(run("serve --data " + path("d.jsonl") + " --epochs 1 --port " + std::to_string(port)).code, 1);
}
