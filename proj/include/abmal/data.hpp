#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "abmal/matching.hpp"

namespace abmal {

/// One bipartite matching example. Features are stored as an (n*n) x d matrix
/// whose row i*n + j holds the feature vector of assigning left i to right j.
struct MatchingInstance {
  std::string id;
  std::size_t n = 0;
  std::size_t d = 0;
  Eigen::MatrixXd features;
  Permutation truth;
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();

  double feature(std::size_t i, std::size_t j, std::size_t k) const {
    return features(static_cast<Eigen::Index>(i * n + j), static_cast<Eigen::Index>(k));
  }
  auto edge(std::size_t i, std::size_t j) const {
    return features.row(static_cast<Eigen::Index>(i * n + j));
  }
  /// Throws InvalidInput on any violated invariant.
  void validate() const;

  friend bool operator==(const MatchingInstance&, const MatchingInstance&);
};

struct Dataset {
  std::string name;
  std::size_t d = 0;
  std::vector<MatchingInstance> instances;

  std::size_t size() const { return instances.size(); }
  const MatchingInstance& operator[](std::size_t k) const { return instances[k]; }
  /// Planted weight vector of a synthetic dataset, read from instance meta.
  std::optional<Eigen::VectorXd> planted_theta() const;
  /// Throws SchemaError on non-uniform d or duplicate ids.
  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&);
};

// JSONL interchange: one object per line with fields id, n, d, features, truth, meta.
void write_dataset(const Dataset& ds, std::ostream& out);
Dataset read_dataset(std::istream& in, std::string name = "dataset");
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// Axis-aligned bounding box in pixel coordinates.
struct Box {
  double left = 0.0;
  double top = 0.0;
  double width = 0.0;
  double height = 0.0;
};

inline constexpr std::size_t kMotFeatureDim = 8;
inline constexpr double kDefaultFrameDiagonal = 1000.0;

/// Pairwise features for 2*slots nodes per side. Nodes [0, boxes.size()) are
/// real objects; all other nodes are invisible. Per pair:
/// [IoU, exp(-center distance / diagonal), min/max area ratio,
///  exp(-|log aspect ratio ratio|), bias, real->invisible, invisible->real,
///  invisible->invisible].
Eigen::MatrixXd extract_features(std::span<const Box> boxes_t, std::span<const Box> boxes_t1,
                                 std::size_t slots, double diagonal = kDefaultFrameDiagonal);

struct MotIngestResult {
  Dataset dataset;
  std::size_t skipped_pairs = 0;  ///< frame pairs dropped because of a frame gap
  std::size_t max_objects = 0;    ///< N*
};

/// Parses a MOT ground-truth CSV (frame,id,left,top,width,height,...) and
/// builds one instance per consecutive frame pair with n = 2 N*. max_frames = 0
/// ingests every frame.
MotIngestResult ingest_mot(std::istream& in, std::size_t max_frames = 0,
                           double diagonal = kDefaultFrameDiagonal, std::string name = "mot");
MotIngestResult ingest_mot(const std::filesystem::path& gt_path, std::size_t max_frames = 0,
                           double diagonal = kDefaultFrameDiagonal);

/// Synthetic benchmark with a planted weight vector. Truth is the max-weight
/// matching of the clean planted potentials; stored features are perturbed by
/// Gaussian noise of scale `noise`.
Dataset gen_synthetic(std::size_t n, std::size_t d, std::size_t count, std::uint64_t seed,
                      double noise);

struct SplitFractions {
  double initial = 0.05;
  double pool = 0.70;
  double test = 0.25;
};

struct DataSplit {
  std::vector<std::size_t> initial;
  std::vector<std::size_t> pool;
  std::vector<std::size_t> test;
};

/// Seeded shuffle of {0..size-1} cut into three disjoint parts, each stored in
/// ascending order.
DataSplit split(std::size_t size, std::uint64_t seed, const SplitFractions& fractions = {});

}  // namespace abmal
