#include "abmal/kernels.hpp"

#include <omp.h>

#include <exception>

#include "abmal/abm.hpp"
#include "abmal/information.hpp"
#include "abmal/ssvm.hpp"

namespace abmal {
namespace {

double abm_mi_score_one(const ModelParams& m, const MatchingInstance& x, const GameConfig& game,
                        bool include_self) {
  return sample_value(predict(m, x, game).equilibrium, include_self);
}

InstanceEval evaluate_one(const ModelParams& m, const MatchingInstance& x, const GameConfig& game) {
  InstanceEval e;
  e.n = x.n;
  if (m.kind == ModelKind::Abm) {
    const Prediction p = predict(m, x, game);
    e.hamming = hamming_distance(p.permutation, x.truth);
    e.support_size = p.equilibrium.support_size;
  } else {
    e.hamming = hamming_distance(ssvm_predict(m, x), x.truth);
  }
  return e;
}

// Runs body(k) for k in [0, count) across OpenMP threads; the first exception
// thrown by any iteration is rethrown on the calling thread.
template <typename Body>
void parallel_for(std::size_t count, Body&& body) {
  std::exception_ptr error;
  const auto total = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t k = 0; k < total; ++k) {
    try {
      body(static_cast<std::size_t>(k));
    } catch (...) {
#pragma omp critical(abmal_kernel_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

namespace kernels::serial {

std::vector<double> abm_mi_scores(const ModelParams& m, const Dataset& ds,
                                  std::span<const std::size_t> ids, const GameConfig& game,
                                  bool include_self) {
  std::vector<double> out(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) out[k] = abm_mi_score_one(m, ds[ids[k]], game, include_self);
  return out;
}

std::vector<double> ssvm_entropy_scores(const ModelParams& m, const Dataset& ds,
                                        std::span<const std::size_t> ids) {
  std::vector<double> out(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) out[k] = ssvm_uncertainty(m, ds[ids[k]]).sample_score;
  return out;
}

std::vector<InstanceEval> evaluate(const ModelParams& m, const Dataset& ds,
                                   std::span<const std::size_t> ids, const GameConfig& game) {
  std::vector<InstanceEval> out(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) out[k] = evaluate_one(m, ds[ids[k]], game);
  return out;
}

}  // namespace kernels::serial

namespace kernels::parallel {

std::vector<double> abm_mi_scores(const ModelParams& m, const Dataset& ds,
                                  std::span<const std::size_t> ids, const GameConfig& game,
                                  bool include_self) {
  std::vector<double> out(ids.size());
  parallel_for(ids.size(), [&](std::size_t k) { out[k] = abm_mi_score_one(m, ds[ids[k]], game, include_self); });
  return out;
}

std::vector<double> ssvm_entropy_scores(const ModelParams& m, const Dataset& ds,
                                        std::span<const std::size_t> ids) {
  std::vector<double> out(ids.size());
  parallel_for(ids.size(), [&](std::size_t k) { out[k] = ssvm_uncertainty(m, ds[ids[k]]).sample_score; });
  return out;
}

std::vector<InstanceEval> evaluate(const ModelParams& m, const Dataset& ds,
                                   std::span<const std::size_t> ids, const GameConfig& game) {
  std::vector<InstanceEval> out(ids.size());
  parallel_for(ids.size(), [&](std::size_t k) { out[k] = evaluate_one(m, ds[ids[k]], game); });
  return out;
}

}  // namespace kernels::parallel

}  // namespace abmal
