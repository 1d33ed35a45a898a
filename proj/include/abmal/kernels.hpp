#pragma once
// Per-instance batch kernels. Each kernel exists as a plain serial loop and as
// an OpenMP loop over instances; both produce bit-identical output.

#include <cstddef>
#include <span>
#include <vector>

#include "abmal/data.hpp"
#include "abmal/game.hpp"
#include "abmal/model.hpp"

namespace abmal {

enum class Execution { Serial, Parallel };

struct InstanceEval {
  std::size_t hamming = 0;
  std::size_t n = 0;
  std::size_t support_size = 1;
};

namespace kernels::serial {

/// Sum over nodes of V_j from each instance's adversary equilibrium.
std::vector<double> abm_mi_scores(const ModelParams& m, const Dataset& ds,
                                  std::span<const std::size_t> ids, const GameConfig& game,
                                  bool include_self = true);
/// ssvm_uncertainty sample score per instance.
std::vector<double> ssvm_entropy_scores(const ModelParams& m, const Dataset& ds,
                                        std::span<const std::size_t> ids);
/// Prediction error per instance (ABM: game decoding, SSVM: single matching).
std::vector<InstanceEval> evaluate(const ModelParams& m, const Dataset& ds,
                                   std::span<const std::size_t> ids, const GameConfig& game);

}  // namespace kernels::serial

namespace kernels::parallel {

std::vector<double> abm_mi_scores(const ModelParams& m, const Dataset& ds,
                                  std::span<const std::size_t> ids, const GameConfig& game,
                                  bool include_self = true);
std::vector<double> ssvm_entropy_scores(const ModelParams& m, const Dataset& ds,
                                        std::span<const std::size_t> ids);
std::vector<InstanceEval> evaluate(const ModelParams& m, const Dataset& ds,
                                   std::span<const std::size_t> ids, const GameConfig& game);

}  // namespace kernels::parallel

}  // namespace abmal
