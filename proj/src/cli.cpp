#include "abmal/cli.hpp"

#include <openssl/evp.h>
#include <fmt/core.h>

#include <CLI11.hpp>
#include <csignal>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <numeric>

#include "abmal/active.hpp"
#include "abmal/data.hpp"
#include "abmal/errors.hpp"
#include "abmal/model_io.hpp"
#include "abmal/serve.hpp"

namespace abmal {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct TrainFlags {
  std::size_t epochs;
  double lr;
  double reg;
  double decay_steps;
  std::string regularizer = "squared";

  explicit TrainFlags(const TrainConfig& d)
      : epochs(d.epochs), lr(d.learning_rate), reg(d.reg_lambda), decay_steps(d.decay_steps) {}

  void add(CLI::App& sub) {
    sub.add_option("--epochs", epochs, "SGD epochs per training run")
        ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()))
        ->capture_default_str();
    sub.add_option("--lr", lr, "initial step size")->check(CLI::PositiveNumber)->capture_default_str();
    sub.add_option("--reg", reg, "regularization weight")->check(CLI::NonNegativeNumber)->capture_default_str();
    sub.add_option("--decay-steps", decay_steps, "step decay horizon (0: one epoch)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub.add_option("--regularizer", regularizer, "squared or norm")
        ->check(CLI::IsMember({"squared", "norm"}))
        ->capture_default_str();
  }

  TrainConfig config(std::uint64_t seed) const {
    TrainConfig c;
    c.epochs = epochs;
    c.learning_rate = lr;
    c.reg_lambda = reg;
    c.decay_steps = decay_steps;
    c.regularizer = regularizer == "norm" ? Regularizer::Norm : Regularizer::Squared;
    c.seed = seed;
    return c;
  }

  json echo() const {
    return json{{"epochs", epochs}, {"lr", lr}, {"reg", reg}, {"decay_steps", decay_steps},
                {"regularizer", regularizer}};
  }
};

fs::path manifest_path(const fs::path& out) { return fs::path(out.string() + ".manifest.json"); }

void write_manifest(const fs::path& out, const std::string& command, json config, const fs::path& dataset,
                    std::uint64_t seed, const std::vector<std::string>& artifacts) {
  json m{{"command", command},
         {"config", std::move(config)},
         {"dataset", dataset.string()},
         {"dataset_sha256", sha256_file(dataset)},
         {"seed", seed},
         {"artifacts", artifacts}};
  std::ofstream f(manifest_path(out), std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + manifest_path(out).string());
  f << m.dump(2) << '\n';
}

std::vector<Strategy> strategies_from(const std::string& name) {
  if (name == "all") return {Strategy::AbmMi, Strategy::SsvmEntropy, Strategy::Random};
  return {parse_strategy(name)};
}

HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Active learning for bipartite matching with adversarial models"};
  app.require_subcommand(1);
  const TrainConfig defaults;

  // gen-synth
  auto* gen = app.add_subcommand("gen-synth", "generate a planted-model synthetic dataset");
  std::size_t g_n = 8, g_d = 6, g_count = 200;
  std::uint64_t g_seed = 1;
  double g_noise = 0.0;
  std::string g_out;
  gen->add_option("--n", g_n, "nodes per side")->check(CLI::Range(2, 64))->capture_default_str();
  gen->add_option("--d", g_d, "feature dimension")->check(CLI::Range(2, 4096))->capture_default_str();
  gen->add_option("--count", g_count, "instances")->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--seed", g_seed, "generator seed")->capture_default_str();
  gen->add_option("--noise", g_noise, "feature noise scale")->check(CLI::NonNegativeNumber)->capture_default_str();
  gen->add_option("--out", g_out, "output JSONL")->required();

  // train
  auto* train = app.add_subcommand("train", "train an ABM or SSVM model");
  std::string t_data, t_model = "abm", t_out;
  std::uint64_t t_seed = defaults.seed;
  TrainFlags t_flags(defaults);
  train->add_option("--data", t_data, "training JSONL")->required();
  train->add_option("--model", t_model, "abm or ssvm")->check(CLI::IsMember({"abm", "ssvm"}))->capture_default_str();
  train->add_option("--seed", t_seed, "shuffle seed")->capture_default_str();
  train->add_option("--out", t_out, "model file")->required();
  t_flags.add(*train);

  // active-sim
  auto* sim = app.add_subcommand("active-sim", "pool-based active-learning simulation");
  std::string s_data, s_strategy = "abm-mi", s_out;
  std::size_t s_rounds = 100, s_splits = 1;
  std::uint64_t s_seed = 1;
  bool s_no_self = false;
  TrainFlags s_flags(defaults);
  sim->add_option("--data", s_data, "dataset JSONL")->required();
  sim->add_option("--strategy", s_strategy, "abm-mi, ssvm-entropy, random or all")
      ->check(CLI::IsMember({"abm-mi", "ssvm-entropy", "random", "all"}))
      ->capture_default_str();
  sim->add_option("--rounds", s_rounds, "solicitation rounds")->capture_default_str();
  sim->add_option("--splits", s_splits, "random splits")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--seed", s_seed, "first split seed")->capture_default_str();
  sim->add_flag("--no-self-information", s_no_self, "drop the H(Y_j) term from V_j");
  sim->add_option("--out", s_out, "curve CSV")->required();
  s_flags.add(*sim);

  // eval
  auto* eval = app.add_subcommand("eval", "Hamming rate of a model on a dataset");
  std::string e_model, e_data, e_out;
  eval->add_option("--model", e_model, "model file")->required();
  eval->add_option("--data", e_data, "dataset JSONL")->required();
  eval->add_option("--out", e_out, "optional JSON report");

  // ingest-mot
  auto* mot = app.add_subcommand("ingest-mot", "convert MOT ground truth to a matching dataset");
  std::string m_gt, m_out;
  std::size_t m_max_frames = 0;
  double m_diagonal = kDefaultFrameDiagonal;
  mot->add_option("--gt", m_gt, "gt.txt")->required();
  mot->add_option("--max-frames", m_max_frames, "frame cap (0: all)")->capture_default_str();
  mot->add_option("--diagonal", m_diagonal, "frame diagonal in pixels")->check(CLI::PositiveNumber)->capture_default_str();
  mot->add_option("--out", m_out, "output JSONL")->required();

  // serve
  auto* serve = app.add_subcommand("serve", "HTTP API for live annotation");
  std::string v_data, v_strategy = "abm-mi", v_host = "127.0.0.1";
  int v_port = 8080;
  std::size_t v_rounds = 100;
  std::uint64_t v_seed = 1;
  TrainFlags v_flags(defaults);
  serve->add_option("--data", v_data, "dataset JSONL")->required();
  serve->add_option("--strategy", v_strategy, "abm-mi, ssvm-entropy or random")
      ->check(CLI::IsMember({"abm-mi", "ssvm-entropy", "random"}))
      ->capture_default_str();
  serve->add_option("--host", v_host, "bind address")->capture_default_str();
  serve->add_option("--port", v_port, "port (0: any free port)")->check(CLI::Range(0, 65535))->capture_default_str();
  serve->add_option("--rounds", v_rounds, "solicitation rounds")->capture_default_str();
  serve->add_option("--seed", v_seed, "split seed")->capture_default_str();
  v_flags.add(*serve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      const Dataset ds = gen_synthetic(g_n, g_d, g_count, g_seed, g_noise);
      save_dataset(ds, g_out);
      write_manifest(g_out, "gen-synth",
                     json{{"n", g_n}, {"d", g_d}, {"count", g_count}, {"noise", g_noise}}, g_out, g_seed,
                     {g_out});
      fmt::print("wrote {} instances to {}\n", ds.size(), g_out);
    } else if (*train) {
      const Dataset ds = load_dataset(t_data);
      std::vector<std::size_t> ids(ds.size());
      std::iota(ids.begin(), ids.end(), std::size_t{0});
      const ModelParams m = train_learner(parse_model_kind(t_model), ds, ids, t_flags.config(t_seed));
      save_model(m, t_out);
      json cfg = t_flags.echo();
      cfg["model"] = t_model;
      write_manifest(t_out, "train", std::move(cfg), t_data, t_seed, {t_out});
      fmt::print("trained {} on {} instances, wrote {}\n", t_model, ds.size(), t_out);
    } else if (*sim) {
      const Dataset ds = load_dataset(s_data);
      std::vector<CurveRecord> records;
      for (Strategy st : strategies_from(s_strategy)) {
        ActiveConfig cfg;
        cfg.strategy = st;
        cfg.rounds = s_rounds;
        cfg.train = s_flags.config(s_seed);
        cfg.include_self_information = !s_no_self;
        const MultiSplitResult r = run_active_splits(ds, cfg, s_seed, s_splits);
        if (r.truncated_splits > 0) {
          fmt::print(stderr, "warning: {}: pool exhausted before {} rounds in {} of {} splits\n",
                     to_string(st), s_rounds, r.truncated_splits, s_splits);
        }
        records.insert(records.end(), r.records.begin(), r.records.end());
      }
      {
        std::ofstream f(s_out, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + s_out);
        write_curve_csv(records, f);
      }
      json cfg = s_flags.echo();
      cfg["strategy"] = s_strategy;
      cfg["rounds"] = s_rounds;
      cfg["splits"] = s_splits;
      cfg["self_information"] = !s_no_self;
      write_manifest(s_out, "active-sim", std::move(cfg), s_data, s_seed, {s_out});
      for (const StrategySummary& s : summarize_curves(records)) {
        fmt::print("{} auc {:.6f} final {:.6f}\n", s.strategy, s.auc, s.rounds.back().mean);
      }
    } else if (*eval) {
      const ModelParams m = load_model(e_model);
      const Dataset ds = load_dataset(e_data);
      if (m.d() != ds.d) {
        throw InvalidInput(fmt::format("model has d={} but dataset has d={}", m.d(), ds.d));
      }
      std::vector<std::size_t> ids(ds.size());
      std::iota(ids.begin(), ids.end(), std::size_t{0});
      const EvalSummary s = evaluate_hamming(m, ds, ids);
      fmt::print("hamming_rate {:.6f}\nmean_support_size {:.6f}\n", s.hamming_rate, s.mean_support_size);
      if (!e_out.empty()) {
        {
          std::ofstream f(e_out, std::ios::binary);
          if (!f) throw std::runtime_error("cannot write " + e_out);
          f << json{{"hamming_rate", s.hamming_rate}, {"mean_support_size", s.mean_support_size}}.dump(2)
            << '\n';
        }
        write_manifest(e_out, "eval", json{{"model", e_model}}, e_data, 0, {e_out});
      }
    } else if (*mot) {
      const MotIngestResult r = ingest_mot(fs::path(m_gt), m_max_frames, m_diagonal);
      save_dataset(r.dataset, m_out);
      write_manifest(m_out, "ingest-mot",
                     json{{"gt", m_gt}, {"max_frames", m_max_frames}, {"diagonal", m_diagonal}}, m_out, 0,
                     {m_out});
      fmt::print("wrote {} instances (n={}, {} frame pairs skipped) to {}\n", r.dataset.size(),
                 2 * r.max_objects, r.skipped_pairs, m_out);
    } else if (*serve) {
      const Dataset ds = load_dataset(v_data);
      ActiveConfig cfg;
      cfg.strategy = parse_strategy(v_strategy);
      cfg.rounds = v_rounds;
      cfg.train = v_flags.config(v_seed);
      ServeApp server_app(ds, cfg, v_seed);
      HttpServer server(server_app);
      int port = 0;
      try {
        port = server.bind(v_host, v_port);
      } catch (const InvalidState& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
      }
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      fmt::print("listening on http://{}:{}\n", v_host, port);
      std::fflush(stdout);
      server.listen();
      g_server = nullptr;
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}

}  // namespace abmal
