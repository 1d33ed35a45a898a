#include "abmal/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "abmal/errors.hpp"
#include "abmal/random.hpp"

namespace abmal {

using Json = nlohmann::ordered_json;

void MatchingInstance::validate() const {
  if (n < 1 || d < 1) throw InvalidInput("instance " + id + ": n and d must be >= 1");
  if (features.rows() != static_cast<Eigen::Index>(n * n) ||
      features.cols() != static_cast<Eigen::Index>(d)) {
    throw InvalidInput("instance " + id + ": feature tensor shape mismatch");
  }
  if (!features.allFinite()) throw InvalidInput("instance " + id + ": non-finite features");
  if (truth.size() != n) throw InvalidInput("instance " + id + ": truth length differs from n");
}

bool operator==(const MatchingInstance& a, const MatchingInstance& b) {
  return a.id == b.id && a.n == b.n && a.d == b.d && a.features == b.features &&
         a.truth == b.truth && a.meta == b.meta;
}

std::optional<Eigen::VectorXd> Dataset::planted_theta() const {
  if (instances.empty() || !instances.front().meta.contains("planted_theta")) return std::nullopt;
  const auto v = instances.front().meta.at("planted_theta").get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void Dataset::validate() const {
  std::set<std::string> ids;
  for (const MatchingInstance& x : instances) {
    if (x.d != d) {
      throw SchemaError("dataset " + name + ": instance " + x.id + " has d=" + std::to_string(x.d) +
                        ", expected " + std::to_string(d));
    }
    if (!ids.insert(x.id).second) throw SchemaError("dataset " + name + ": duplicate id " + x.id);
  }
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.d == b.d && a.instances == b.instances;
}

namespace {

Json instance_to_json(const MatchingInstance& x) {
  Json features = Json::array();
  for (std::size_t i = 0; i < x.n; ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < x.n; ++j) {
      Json vec = Json::array();
      for (std::size_t k = 0; k < x.d; ++k) vec.push_back(x.feature(i, j, k));
      row.push_back(std::move(vec));
    }
    features.push_back(std::move(row));
  }
  Json obj = Json::object();
  obj["id"] = x.id;
  obj["n"] = x.n;
  obj["d"] = x.d;
  obj["features"] = std::move(features);
  obj["truth"] = x.truth.assignment();
  obj["meta"] = x.meta;
  return obj;
}

MatchingInstance instance_from_json(const Json& obj, std::size_t line) {
  auto fail = [line](const std::string& what) { throw ParseError(what, line); };
  if (!obj.is_object()) fail("record is not a JSON object");
  for (const char* key : {"id", "n", "d", "features", "truth"}) {
    if (!obj.contains(key)) fail(std::string("missing field '") + key + "'");
  }
  MatchingInstance x;
  try {
    x.id = obj.at("id").get<std::string>();
    x.n = obj.at("n").get<std::size_t>();
    x.d = obj.at("d").get<std::size_t>();
    if (x.n < 1 || x.d < 1) fail("n and d must be >= 1");
    const Json& f = obj.at("features");
    if (!f.is_array() || f.size() != x.n) fail("features must have n rows");
    x.features.resize(static_cast<Eigen::Index>(x.n * x.n), static_cast<Eigen::Index>(x.d));
    for (std::size_t i = 0; i < x.n; ++i) {
      if (!f[i].is_array() || f[i].size() != x.n) fail("features row " + std::to_string(i) + " must have n entries");
      for (std::size_t j = 0; j < x.n; ++j) {
        const Json& v = f[i][j];
        if (!v.is_array() || v.size() != x.d) fail("feature vector must have d entries");
        for (std::size_t k = 0; k < x.d; ++k) {
          x.features(static_cast<Eigen::Index>(i * x.n + j), static_cast<Eigen::Index>(k)) = v[k].get<double>();
        }
      }
    }
    const auto truth = obj.at("truth").get<std::vector<int>>();
    if (truth.size() != x.n) fail("truth must have n entries");
    if (!is_permutation(truth)) fail("truth is not a permutation of {0..n-1}");
    x.truth = Permutation(truth);
    if (obj.contains("meta")) x.meta = obj.at("meta");
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("bad field type: ") + e.what());
  }
  try {
    x.validate();
  } catch (const InvalidInput& e) {
    fail(e.what());
  }
  return x;
}

}  // namespace

void write_dataset(const Dataset& ds, std::ostream& out) {
  for (const MatchingInstance& x : ds.instances) out << instance_to_json(x).dump() << '\n';
}

Dataset read_dataset(std::istream& in, std::string name) {
  Dataset ds;
  ds.name = std::move(name);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json obj;
    try {
      obj = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), lineno);
    }
    MatchingInstance x = instance_from_json(obj, lineno);
    if (ds.instances.empty()) {
      ds.d = x.d;
    } else if (x.d != ds.d) {
      throw SchemaError("line " + std::to_string(lineno) + ": inconsistent feature dimension " +
                        std::to_string(x.d) + " (expected " + std::to_string(ds.d) + ")");
    }
    ds.instances.push_back(std::move(x));
  }
  ds.validate();
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_dataset(ds, out);
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_dataset(in, path.stem().string());
}

namespace {

double iou(const Box& a, const Box& b) {
  const double x0 = std::max(a.left, b.left);
  const double y0 = std::max(a.top, b.top);
  const double x1 = std::min(a.left + a.width, b.left + b.width);
  const double y1 = std::min(a.top + a.height, b.top + b.height);
  const double inter = std::max(0.0, x1 - x0) * std::max(0.0, y1 - y0);
  const double uni = a.width * a.height + b.width * b.height - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

void check_box(const Box& b) {
  if (!(b.width > 0.0) || !(b.height > 0.0)) {
    throw InvalidInput("bounding box must have positive width and height");
  }
}

}  // namespace

Eigen::MatrixXd extract_features(std::span<const Box> boxes_t, std::span<const Box> boxes_t1,
                                 std::size_t slots, double diagonal) {
  if (boxes_t.size() > slots || boxes_t1.size() > slots) {
    throw InvalidInput("extract_features: more boxes than object slots");
  }
  if (!(diagonal > 0.0)) throw InvalidInput("extract_features: diagonal must be positive");
  for (const Box& b : boxes_t) check_box(b);
  for (const Box& b : boxes_t1) check_box(b);
  const std::size_t n = 2 * slots;
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n * n), kMotFeatureDim);
  for (std::size_t i = 0; i < n; ++i) {
    const bool real_i = i < boxes_t.size();
    for (std::size_t j = 0; j < n; ++j) {
      const bool real_j = j < boxes_t1.size();
      auto row = f.row(static_cast<Eigen::Index>(i * n + j));
      row(4) = 1.0;
      if (real_i && real_j) {
        const Box& a = boxes_t[i];
        const Box& b = boxes_t1[j];
        const double dx = (a.left + a.width / 2) - (b.left + b.width / 2);
        const double dy = (a.top + a.height / 2) - (b.top + b.height / 2);
        const double area_a = a.width * a.height;
        const double area_b = b.width * b.height;
        row(0) = iou(a, b);
        row(1) = std::exp(-std::hypot(dx, dy) / diagonal);
        row(2) = std::min(area_a, area_b) / std::max(area_a, area_b);
        row(3) = std::exp(-std::abs(std::log((a.width / a.height) / (b.width / b.height))));
      } else if (real_i) {
        row(5) = 1.0;
      } else if (real_j) {
        row(6) = 1.0;
      } else {
        row(7) = 1.0;
      }
    }
  }
  return f;
}

namespace {

struct Detection {
  int id;
  Box box;
};

Json boxes_json(const std::vector<Detection>& dets) {
  Json arr = Json::array();
  for (const Detection& d : dets) arr.push_back({d.box.left, d.box.top, d.box.width, d.box.height});
  return arr;
}

}  // namespace

MotIngestResult ingest_mot(std::istream& in, std::size_t max_frames, double diagonal,
                           std::string name) {
  std::map<int, std::vector<Detection>> frames;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ParseError("unreadable MOT field '" + cell + "'", lineno);
      }
    }
    if (values.size() < 6) throw ParseError("MOT row needs at least 6 fields", lineno);
    Detection det{static_cast<int>(values[1]), {values[2], values[3], values[4], values[5]}};
    if (!(det.box.width > 0.0) || !(det.box.height > 0.0)) {
      throw ParseError("nonpositive box dimensions", lineno);
    }
    auto& list = frames[static_cast<int>(values[0])];
    for (const Detection& other : list) {
      if (other.id == det.id) throw ParseError("duplicate object id within a frame", lineno);
    }
    list.push_back(det);
  }

  std::vector<int> frame_ids;
  for (auto& [frame, dets] : frames) {
    std::sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) { return a.id < b.id; });
    frame_ids.push_back(frame);
  }
  if (max_frames > 0 && frame_ids.size() > max_frames) frame_ids.resize(max_frames);

  MotIngestResult result;
  result.dataset.name = std::move(name);
  result.dataset.d = kMotFeatureDim;
  for (int f : frame_ids) result.max_objects = std::max(result.max_objects, frames[f].size());
  const std::size_t slots = result.max_objects;
  const std::size_t n = 2 * slots;

  for (std::size_t k = 0; k + 1 < frame_ids.size(); ++k) {
    const int ft = frame_ids[k];
    const int ft1 = frame_ids[k + 1];
    if (ft1 != ft + 1) {
      ++result.skipped_pairs;
      continue;
    }
    const auto& a = frames[ft];
    const auto& b = frames[ft1];
    std::vector<int> assign(n, -1);
    std::vector<char> right_used(n, 0);
    std::vector<char> entering(b.size(), 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) {
        if (a[i].id == b[j].id) {
          assign[i] = static_cast<int>(j);
          entering[j] = 0;
        }
      }
      if (assign[i] < 0) assign[i] = static_cast<int>(slots + i);  // leaves
      right_used[assign[i]] = 1;
    }
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (entering[j]) {
        assign[slots + j] = static_cast<int>(j);
        right_used[j] = 1;
      }
    }
    std::size_t next_right = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (assign[i] >= 0) continue;
      while (right_used[next_right]) ++next_right;
      assign[i] = static_cast<int>(next_right);
      right_used[next_right] = 1;
    }

    std::vector<Box> boxes_a, boxes_b;
    for (const Detection& d : a) boxes_a.push_back(d.box);
    for (const Detection& d : b) boxes_b.push_back(d.box);

    MatchingInstance x;
    x.id = result.dataset.name + ":" + std::to_string(ft) + "-" + std::to_string(ft1);
    x.n = n;
    x.d = kMotFeatureDim;
    x.features = extract_features(boxes_a, boxes_b, slots, diagonal);
    x.truth = Permutation(std::move(assign));
    Json ids_a = Json::array(), ids_b = Json::array();
    for (const Detection& d : a) ids_a.push_back(d.id);
    for (const Detection& d : b) ids_b.push_back(d.id);
    x.meta["frame_t"] = ft;
    x.meta["frame_t1"] = ft1;
    x.meta["ids_t"] = std::move(ids_a);
    x.meta["ids_t1"] = std::move(ids_b);
    x.meta["boxes_t"] = boxes_json(a);
    x.meta["boxes_t1"] = boxes_json(b);
    x.meta["max_objects"] = slots;
    x.meta["max_frames"] = max_frames;
    x.meta["diagonal"] = diagonal;
    result.dataset.instances.push_back(std::move(x));
  }
  result.dataset.validate();
  return result;
}

MotIngestResult ingest_mot(const std::filesystem::path& gt_path, std::size_t max_frames, double diagonal) {
  std::ifstream in(gt_path);
  if (!in) throw std::runtime_error("cannot open " + gt_path.string());
  return ingest_mot(in, max_frames, diagonal, gt_path.stem().string());
}

Dataset gen_synthetic(std::size_t n, std::size_t d, std::size_t count, std::uint64_t seed, double noise) {
  if (n < 2 || d < 2) throw InvalidInput("gen_synthetic: require n >= 2 and d >= 2");
  if (!(noise >= 0.0)) throw InvalidInput("gen_synthetic: noise must be nonnegative");
  auto rng = substream(seed, "synthetic");
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::VectorXd planted(static_cast<Eigen::Index>(d));
  for (Eigen::Index k = 0; k < planted.size(); ++k) planted(k) = normal(rng);
  planted.normalize();
  const std::vector<double> planted_vec(planted.data(), planted.data() + planted.size());

  Dataset ds;
  ds.name = "synthetic";
  ds.d = d;
  const auto edges = static_cast<Eigen::Index>(n * n);
  for (std::size_t c = 0; c < count; ++c) {
    Eigen::MatrixXd clean(edges, static_cast<Eigen::Index>(d));
    for (Eigen::Index r = 0; r < edges; ++r)
      for (Eigen::Index k = 0; k < clean.cols(); ++k) clean(r, k) = normal(rng);
    const Eigen::VectorXd psi_flat = clean * planted;
    const WeightMatrix psi =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            psi_flat.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    MatchingInstance x;
    char id[32];
    std::snprintf(id, sizeof(id), "syn-%05zu", c);
    x.id = id;
    x.n = n;
    x.d = d;
    x.truth = max_weight_matching(psi);
    x.features = clean;
    if (noise > 0.0) {
      for (Eigen::Index r = 0; r < edges; ++r)
        for (Eigen::Index k = 0; k < clean.cols(); ++k) x.features(r, k) += noise * normal(rng);
    }
    x.meta["generator"] = "synthetic";
    x.meta["seed"] = seed;
    x.meta["noise"] = noise;
    x.meta["planted_theta"] = planted_vec;
    ds.instances.push_back(std::move(x));
  }
  return ds;
}

DataSplit split(std::size_t size, std::uint64_t seed, const SplitFractions& fractions) {
  const double total = fractions.initial + fractions.pool + fractions.test;
  if (!(fractions.initial > 0.0) || !(fractions.pool > 0.0) || !(fractions.test > 0.0) ||
      std::abs(total - 1.0) > 1e-9) {
    throw InvalidInput("split: fractions must be positive and sum to 1");
  }
  const auto n_init = static_cast<std::size_t>(std::llround(fractions.initial * static_cast<double>(size)));
  const auto n_pool = static_cast<std::size_t>(std::llround(fractions.pool * static_cast<double>(size)));
  if (n_init == 0 || n_pool == 0 || n_init + n_pool >= size) {
    throw InvalidInput("split: fractions leave an empty part for " + std::to_string(size) + " instances");
  }
  std::vector<std::size_t> order(size);
  for (std::size_t k = 0; k < size; ++k) order[k] = k;
  auto rng = substream(seed, "split");
  std::shuffle(order.begin(), order.end(), rng);
  DataSplit out;
  out.initial.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_init));
  out.pool.assign(order.begin() + static_cast<std::ptrdiff_t>(n_init),
                  order.begin() + static_cast<std::ptrdiff_t>(n_init + n_pool));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_init + n_pool), order.end());
  std::sort(out.initial.begin(), out.initial.end());
  std::sort(out.pool.begin(), out.pool.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

}  // namespace abmal
