#include "abmal/model_io.hpp"

#include <fmt/format.h>

#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "abmal/errors.hpp"

namespace abmal {

namespace {

std::string number(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

void write_model(const ModelParams& m, std::ostream& out) {
  // Written by hand so every real has exactly 17 significant digits.
  out << "{\n";
  out << "  \"format_version\": " << kModelFormatVersion << ",\n";
  out << "  \"model_kind\": \"" << to_string(m.kind) << "\",\n";
  out << "  \"d\": " << m.d() << ",\n";
  out << "  \"theta\": [";
  for (Eigen::Index k = 0; k < m.theta.size(); ++k) out << (k ? ", " : "") << number(m.theta(k));
  out << "],\n";
  out << "  \"reg_lambda\": " << number(m.reg_lambda) << ",\n";
  out << "  \"trained_rounds\": " << m.trained_rounds;
  if (m.platt) {
    out << ",\n  \"platt\": {\"a\": " << number(m.platt->a) << ", \"b\": " << number(m.platt->b) << "}";
  }
  out << "\n}\n";
}

ModelParams read_model(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("model file: malformed JSON: ") + e.what());
  }
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw SchemaError("model file: unsupported format_version " + std::to_string(version));
    }
    ModelParams m;
    m.kind = parse_model_kind(doc.value("model_kind", std::string("abm")));
    const auto theta = doc.at("theta").get<std::vector<double>>();
    if (doc.at("d").get<std::size_t>() != theta.size()) throw SchemaError("model file: d differs from theta length");
    m.theta = Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
    if (!m.theta.allFinite()) throw SchemaError("model file: non-finite theta");
    m.reg_lambda = doc.at("reg_lambda").get<double>();
    m.trained_rounds = doc.at("trained_rounds").get<std::size_t>();
    if (doc.contains("platt")) {
      m.platt = PlattParams{doc["platt"].at("a").get<double>(), doc["platt"].at("b").get<double>()};
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("model file: ") + e.what());
  } catch (const InvalidInput& e) {
    throw SchemaError(std::string("model file: ") + e.what());
  }
}

void save_model(const ModelParams& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_model(m, out);
}

ModelParams load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_model(in);
}

}  // namespace abmal
