#include "abmal/active.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

#include "abmal/abm.hpp"
#include "abmal/errors.hpp"
#include "abmal/information.hpp"
#include "abmal/random.hpp"
#include "abmal/ssvm.hpp"

namespace abmal {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::AbmMi: return "abm-mi";
    case Strategy::SsvmEntropy: return "ssvm-entropy";
    case Strategy::Random: return "random";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view text) {
  if (text == "abm-mi") return Strategy::AbmMi;
  if (text == "ssvm-entropy") return Strategy::SsvmEntropy;
  if (text == "random") return Strategy::Random;
  throw InvalidInput("unknown strategy '" + std::string(text) + "'");
}

ModelKind ActiveConfig::learner() const {
  switch (strategy) {
    case Strategy::AbmMi: return ModelKind::Abm;
    case Strategy::SsvmEntropy: return ModelKind::Ssvm;
    case Strategy::Random: return random_learner;
  }
  return ModelKind::Abm;
}

std::vector<double> score_pool(Strategy strategy, const ModelParams& model, const Dataset& ds,
                               std::span<const std::size_t> pool, std::uint64_t seed,
                               const GameConfig& game, Execution exec, bool include_self) {
  const bool parallel = exec == Execution::Parallel;
  switch (strategy) {
    case Strategy::AbmMi:
      if (model.kind != ModelKind::Abm) throw InvalidInput("abm-mi scoring needs an ABM model");
      return parallel ? kernels::parallel::abm_mi_scores(model, ds, pool, game, include_self)
                      : kernels::serial::abm_mi_scores(model, ds, pool, game, include_self);
    case Strategy::SsvmEntropy:
      if (model.kind != ModelKind::Ssvm) throw InvalidInput("ssvm-entropy scoring needs an SSVM model");
      if (!model.platt) throw InvalidInput("ssvm-entropy scoring needs fitted Platt parameters");
      return parallel ? kernels::parallel::ssvm_entropy_scores(model, ds, pool)
                      : kernels::serial::ssvm_entropy_scores(model, ds, pool);
    case Strategy::Random: {
      auto rng = substream(seed, "random-strategy");
      std::uniform_real_distribution<double> u(0.0, 1.0);
      std::vector<double> out(pool.size());
      for (double& v : out) v = u(rng);
      return out;
    }
  }
  return {};
}

std::size_t select_sample(std::span<const std::size_t> ids, std::span<const double> scores) {
  if (ids.empty()) throw PoolExhausted("select_sample: no unlabeled instances remain");
  if (ids.size() != scores.size()) throw InvalidInput("select_sample: ids and scores differ in length");
  std::size_t best = 0;
  for (std::size_t k = 1; k < ids.size(); ++k) {
    if (scores[k] > scores[best] || (scores[k] == scores[best] && ids[k] < ids[best])) best = k;
  }
  return ids[best];
}

std::vector<int> oracle_answer(const PoolState& state, const Dataset& ds, std::size_t id,
                               OracleMode mode, std::size_t node) {
  if (std::binary_search(state.labeled.begin(), state.labeled.end(), id)) {
    throw InvalidInput("oracle_answer: instance " + std::to_string(id) + " is already labeled");
  }
  if (!std::binary_search(state.unlabeled.begin(), state.unlabeled.end(), id)) {
    throw InvalidInput("oracle_answer: instance " + std::to_string(id) + " is not in the pool");
  }
  const Permutation& truth = ds[id].truth;
  if (mode == OracleMode::FullSample) return truth.assignment();
  if (node >= truth.size()) throw InvalidInput("oracle_answer: node index out of range");
  return {truth[node]};
}

void LabelAccumulator::add(std::size_t node, int partner) {
  if (node >= partner_.size() || partner < 0 || static_cast<std::size_t>(partner) >= partner_.size()) {
    throw InvalidInput("LabelAccumulator: index out of range");
  }
  if (partner_[node] == partner) return;
  if (partner_[node] >= 0) throw InvalidInput("LabelAccumulator: node already answered differently");
  if (std::find(partner_.begin(), partner_.end(), partner) != partner_.end()) {
    throw InvalidInput("LabelAccumulator: partner already assigned to another node");
  }
  partner_[node] = partner;
}

bool LabelAccumulator::complete() const {
  return std::none_of(partner_.begin(), partner_.end(), [](int p) { return p < 0; });
}

Permutation LabelAccumulator::result() const {
  if (!complete()) throw InvalidState("LabelAccumulator: labeling is incomplete");
  return Permutation(partner_);
}

EvalSummary evaluate_hamming(const ModelParams& model, const Dataset& ds, std::span<const std::size_t> ids,
                             const GameConfig& game, Execution exec) {
  if (ids.empty()) throw InvalidInput("evaluate_hamming: empty test set");
  const std::vector<InstanceEval> evals = exec == Execution::Parallel
                                              ? kernels::parallel::evaluate(model, ds, ids, game)
                                              : kernels::serial::evaluate(model, ds, ids, game);
  EvalSummary s;
  for (const InstanceEval& e : evals) {
    s.hamming_rate += static_cast<double>(e.hamming) / static_cast<double>(e.n);
    s.mean_support_size += static_cast<double>(e.support_size);
  }
  s.hamming_rate /= static_cast<double>(evals.size());
  s.mean_support_size /= static_cast<double>(evals.size());
  return s;
}

std::uint64_t training_seed(std::uint64_t split_seed) { return derive_seed(split_seed, "shuffle"); }

ModelParams train_learner(ModelKind kind, const Dataset& ds, std::span<const std::size_t> ids,
                          const TrainConfig& cfg) {
  if (kind == ModelKind::Abm) return train_abm(ds, ids, cfg).params;
  ModelParams m = train_ssvm(ds, ids, cfg).params;
  m.platt = fit_platt_on_edges(m, ds, ids);
  return m;
}

ActiveSession::ActiveSession(const Dataset& ds, ActiveConfig cfg, std::uint64_t split_seed)
    : data_(ds), cfg_(std::move(cfg)), split_seed_(split_seed) {
  const DataSplit parts = split(data_.size(), split_seed_, cfg_.fractions);
  state_.labeled = parts.initial;
  state_.unlabeled = parts.pool;
  state_.rng_seed = split_seed_;
  test_ = parts.test;
  cfg_.train.seed = training_seed(split_seed_);
  retrain();
  record_round();
}

const ActiveSession::Query& ActiveSession::pending() {
  if (finished()) throw PoolExhausted("active session is finished");
  if (!pending_) {
    const std::size_t next_round = round() + 1;
    const std::vector<double> scores =
        score_pool(cfg_.strategy, model_, data_, state_.unlabeled,
                   derive_seed(split_seed_, "random-strategy", next_round), cfg_.train.game, cfg_.execution,
                   cfg_.include_self_information);
    const std::size_t id = select_sample(state_.unlabeled, scores);
    const auto pos = std::lower_bound(state_.unlabeled.begin(), state_.unlabeled.end(), id) - state_.unlabeled.begin();
    pending_ = Query{id, scores[static_cast<std::size_t>(pos)]};
  }
  return *pending_;
}

void ActiveSession::submit(std::size_t id, const Permutation& label) {
  const Query q = pending();
  if (id != q.id) {
    throw InvalidInput("submit: instance " + std::to_string(id) + " is not the pending query " +
                       std::to_string(q.id));
  }
  if (label.size() != data_[id].n) throw InvalidInput("submit: label length differs from instance size");
  data_.instances[id].truth = label;
  state_.unlabeled.erase(std::find(state_.unlabeled.begin(), state_.unlabeled.end(), id));
  state_.labeled.insert(std::upper_bound(state_.labeled.begin(), state_.labeled.end(), id), id);
  state_.history.push_back({round() + 1, id, q.score});
  pending_.reset();
  retrain();
  record_round();
}

void ActiveSession::retrain() {
  TrainConfig tc = cfg_.train;
  if (cfg_.warm_start_theta && model_.theta.size() > 0) tc.init_theta = model_.theta;
  model_ = train_learner(cfg_.learner(), data_, state_.labeled, tc);
  model_.trained_rounds = round() + 1;
}

void ActiveSession::record_round() {
  const EvalSummary e = evaluate_hamming(model_, data_, test_, cfg_.train.game, cfg_.execution);
  records_.push_back({std::string(to_string(cfg_.strategy)), split_seed_, round(), state_.labeled.size(),
                      e.hamming_rate, e.mean_support_size});
}

LoopResult run_active_loop(const Dataset& ds, const ActiveConfig& cfg, std::uint64_t split_seed) {
  ActiveSession session(ds, cfg, split_seed);
  while (!session.finished()) {
    const std::size_t id = session.pending().id;
    const std::vector<int> answer = oracle_answer(session.state(), ds, id, OracleMode::FullSample);
    session.submit(id, Permutation(answer));
  }
  return {session.records(), session.state(), session.model(), session.truncated()};
}

MultiSplitResult run_active_splits(const Dataset& ds, const ActiveConfig& cfg, std::uint64_t seed,
                                   std::size_t splits) {
  std::vector<LoopResult> runs(splits);
  ActiveConfig inner = cfg;
  if (cfg.execution == Execution::Parallel) {
    std::exception_ptr error;
    const auto total = static_cast<std::ptrdiff_t>(splits);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t s = 0; s < total; ++s) {
      try {
        runs[static_cast<std::size_t>(s)] = run_active_loop(ds, inner, seed + static_cast<std::uint64_t>(s));
      } catch (...) {
#pragma omp critical(abmal_split_error)
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
  } else {
    for (std::size_t s = 0; s < splits; ++s) runs[s] = run_active_loop(ds, inner, seed + s);
  }
  MultiSplitResult out;
  for (LoopResult& r : runs) {
    out.records.insert(out.records.end(), r.records.begin(), r.records.end());
    out.truncated_splits += r.truncated ? 1 : 0;
  }
  return out;
}

std::vector<StrategySummary> summarize_curves(std::span<const CurveRecord> records) {
  std::map<std::string, std::map<std::size_t, std::vector<const CurveRecord*>>> grouped;
  for (const CurveRecord& r : records) grouped[r.strategy][r.round].push_back(&r);
  std::vector<StrategySummary> out;
  for (const auto& [name, by_round] : grouped) {
    StrategySummary s;
    s.strategy = name;
    for (const auto& [round, recs] : by_round) {
      RoundSummary rs;
      rs.round = round;
      rs.count = recs.size();
      for (const CurveRecord* r : recs) {
        rs.mean += r->hamming_rate;
        rs.mean_support_size += r->mean_support_size;
      }
      rs.mean /= static_cast<double>(rs.count);
      rs.mean_support_size /= static_cast<double>(rs.count);
      if (rs.count > 1) {
        double ss = 0.0;
        for (const CurveRecord* r : recs) ss += (r->hamming_rate - rs.mean) * (r->hamming_rate - rs.mean);
        rs.std_error = std::sqrt(ss / static_cast<double>(rs.count - 1)) / std::sqrt(static_cast<double>(rs.count));
      }
      s.rounds.push_back(rs);
    }
    for (std::size_t k = 1; k < s.rounds.size(); ++k) {
      const double width = static_cast<double>(s.rounds[k].round - s.rounds[k - 1].round);
      s.auc += 0.5 * width * (s.rounds[k].mean + s.rounds[k - 1].mean);
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_curve_csv(std::span<const CurveRecord> records, std::ostream& out) {
  std::vector<const CurveRecord*> rows;
  for (const CurveRecord& r : records) rows.push_back(&r);
  std::stable_sort(rows.begin(), rows.end(), [](const CurveRecord* a, const CurveRecord* b) {
    return std::tie(a->strategy, a->split_seed, a->round) < std::tie(b->strategy, b->split_seed, b->round);
  });
  out << kCurveCsvHeader << '\n';
  for (const CurveRecord* r : rows) {
    out << fmt::format("{},{},{},{},{:.10g},{:.10g}\n", r->strategy, r->split_seed, r->round, r->n_labeled,
                       r->hamming_rate, r->mean_support_size);
  }
}

std::string curve_csv(std::span<const CurveRecord> records) {
  std::ostringstream out;
  write_curve_csv(records, out);
  return out.str();
}

}  // namespace abmal
