#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abmal/data.hpp"
#include "abmal/kernels.hpp"
#include "abmal/model.hpp"

namespace abmal {

enum class Strategy { AbmMi, SsvmEntropy, Random };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view text);

struct ActiveConfig {
  Strategy strategy = Strategy::AbmMi;
  std::size_t rounds = 100;
  SplitFractions fractions;
  TrainConfig train;
  /// Learner paired with random solicitation.
  ModelKind random_learner = ModelKind::Abm;
  /// Include the H(Y_j) self term in V_j.
  bool include_self_information = true;
  /// Start each round's training from the previous round's theta instead of zero.
  bool warm_start_theta = false;
  Execution execution = Execution::Parallel;

  ModelKind learner() const;
};

struct HistoryEntry {
  std::size_t round = 0;
  std::size_t id = 0;
  double score = 0.0;
};

struct PoolState {
  std::vector<std::size_t> labeled;    ///< D_l, ascending
  std::vector<std::size_t> unlabeled;  ///< D_u, ascending
  std::vector<HistoryEntry> history;
  std::uint64_t rng_seed = 0;
};

struct CurveRecord {
  std::string strategy;
  std::uint64_t split_seed = 0;
  std::size_t round = 0;
  std::size_t n_labeled = 0;
  double hamming_rate = 0.0;
  double mean_support_size = 0.0;

  friend bool operator==(const CurveRecord&, const CurveRecord&) = default;
};

/// Solicitation score per pool id (same order as `pool`). `seed` drives the
/// random strategy only. Throws InvalidInput on a model kind the strategy cannot use.
std::vector<double> score_pool(Strategy strategy, const ModelParams& model, const Dataset& ds,
                               std::span<const std::size_t> pool, std::uint64_t seed,
                               const GameConfig& game = {}, Execution exec = Execution::Parallel,
                               bool include_self = true);

/// Argmax of scores; ties go to the smallest id. Throws PoolExhausted if empty.
std::size_t select_sample(std::span<const std::size_t> ids, std::span<const double> scores);

enum class OracleMode { FullSample, SingleNode };

/// Simulated annotator reading the ground truth. FullSample returns the whole
/// permutation, SingleNode returns {truth[node]}. Throws InvalidInput if the id
/// is already labeled or not in the pool.
std::vector<int> oracle_answer(const PoolState& state, const Dataset& ds, std::size_t id,
                               OracleMode mode, std::size_t node = 0);

/// Collects single-node answers until the permutation is complete.
class LabelAccumulator {
 public:
  explicit LabelAccumulator(std::size_t n) : partner_(n, -1) {}
  void add(std::size_t node, int partner);
  bool complete() const;
  Permutation result() const;

 private:
  std::vector<int> partner_;
};

struct EvalSummary {
  double hamming_rate = 0.0;
  double mean_support_size = 0.0;
};

/// Mean over instances of Hamming(prediction, truth) / n.
EvalSummary evaluate_hamming(const ModelParams& model, const Dataset& ds, std::span<const std::size_t> ids,
                             const GameConfig& game = {}, Execution exec = Execution::Parallel);

/// Shuffle seed used for every round's training in a split.
std::uint64_t training_seed(std::uint64_t split_seed);

/// Trains the strategy's learner on ds[ids] (and fits Platt for SSVM).
ModelParams train_learner(ModelKind kind, const Dataset& ds, std::span<const std::size_t> ids,
                          const TrainConfig& cfg);

/// One pool-based active-learning run whose oracle answers arrive from outside.
/// After construction the initial model is trained and round 0 is evaluated.
class ActiveSession {
 public:
  struct Query {
    std::size_t id = 0;
    double score = 0.0;
  };

  ActiveSession(const Dataset& ds, ActiveConfig cfg, std::uint64_t split_seed);

  std::size_t round() const { return state_.history.size(); }
  bool finished() const { return round() >= cfg_.rounds || state_.unlabeled.empty(); }
  bool truncated() const { return state_.unlabeled.empty() && round() < cfg_.rounds; }
  const PoolState& state() const { return state_; }
  const ModelParams& model() const { return model_; }
  const Dataset& data() const { return data_; }
  const ActiveConfig& config() const { return cfg_; }
  const std::vector<CurveRecord>& records() const { return records_; }
  std::uint64_t split_seed() const { return split_seed_; }
  const std::vector<std::size_t>& test_ids() const { return test_; }

  /// Selected instance for the next round; computed once per round. Throws
  /// PoolExhausted when the session is finished.
  const Query& pending();
  /// Accepts the label of the pending instance, moves it from D_u to D_l,
  /// retrains and evaluates. Throws InvalidInput if id is not the pending one.
  void submit(std::size_t id, const Permutation& label);

 private:
  void retrain();
  void record_round();

  Dataset data_;
  ActiveConfig cfg_;
  std::uint64_t split_seed_;
  std::vector<std::size_t> test_;
  PoolState state_;
  ModelParams model_;
  std::vector<CurveRecord> records_;
  std::optional<Query> pending_;
};

struct LoopResult {
  std::vector<CurveRecord> records;
  PoolState state;
  ModelParams final_model;
  bool truncated = false;
};

/// Algorithm loop with the simulated full-sample oracle.
LoopResult run_active_loop(const Dataset& ds, const ActiveConfig& cfg, std::uint64_t split_seed);

/// Split seeds are seed, seed + 1, ..., seed + splits - 1.
struct MultiSplitResult {
  std::vector<CurveRecord> records;
  std::size_t truncated_splits = 0;
};
MultiSplitResult run_active_splits(const Dataset& ds, const ActiveConfig& cfg, std::uint64_t seed,
                                   std::size_t splits);

struct RoundSummary {
  std::size_t round = 0;
  std::size_t count = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double mean_support_size = 0.0;
};

struct StrategySummary {
  std::string strategy;
  std::vector<RoundSummary> rounds;
  /// Trapezoid-rule area under the mean Hamming-rate curve over rounds.
  double auc = 0.0;
};

/// Per-round mean and standard error per strategy, sorted by strategy name.
std::vector<StrategySummary> summarize_curves(std::span<const CurveRecord> records);

inline constexpr std::string_view kCurveCsvHeader =
    "strategy,split_seed,round,n_labeled,hamming_rate,mean_support_size";

/// CSV with rows ordered by (strategy, split_seed, round); reals at 10 significant digits.
void write_curve_csv(std::span<const CurveRecord> records, std::ostream& out);
std::string curve_csv(std::span<const CurveRecord> records);

}  // namespace abmal
