#include "manifest.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <iterator>
#include <sstream>

#include "finsler/error.hpp"

namespace finsler::cli {

namespace {

std::string knn_name(KnnAlgorithm k) {
  switch (k) {
    case KnnAlgorithm::Exact: return "exact";
    case KnnAlgorithm::Descent: return "descent";
    case KnnAlgorithm::Auto: break;
  }
  return "auto";
}

KnnAlgorithm parse_knn(const std::string& s) {
  if (s == "exact") return KnnAlgorithm::Exact;
  if (s == "descent") return KnnAlgorithm::Descent;
  require(s == "auto", ErrorCode::InvalidArgument, "unknown knn algorithm '" + s + "'");
  return KnnAlgorithm::Auto;
}

template <class T>
void read_optional(const nlohmann::json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j[key].is_null()) out = j[key].get<T>();
}

template <class T>
void read_value(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key) && !j[key].is_null()) out = j[key].get<T>();
}

}  // namespace

std::string git_blob_sha1(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::ParseError, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string header = "blob " + std::to_string(bytes.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  const bool ok = ctx && EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) &&
                  EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) && EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  require(ok, ErrorCode::NumericalFailure, "sha1 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

nlohmann::json config_to_json(const PipelineConfig& c, bool extended) {
  nlohmann::json j;
  j["method"] = (extended ? "extended-" : "") + std::string(method_name(c.method));
  j["dim"] = c.dim;
  j["omega"] = c.omega ? nlohmann::json(*c.omega) : nlohmann::json();
  j["same_dimension"] = c.same_dimension;
  j["k"] = c.k;
  j["perplexity"] = c.perplexity;
  j["min_dist"] = c.min_dist;
  j["spread"] = c.spread;
  j["epochs"] = c.epochs ? nlohmann::json(*c.epochs) : nlohmann::json();
  j["learning_rate"] = c.learning_rate ? nlohmann::json(*c.learning_rate) : nlohmann::json();
  j["geodesic"] = c.geodesic;
  j["k_plus"] = c.k_plus ? nlohmann::json(*c.k_plus) : nlohmann::json();
  j["knn"] = knn_name(c.knn);
  j["seed"] = c.seed;
  j["symmetric_updates"] = c.symmetric_updates;
  j["plain_gd"] = c.plain_gd;
  j["smacof_iterations"] = c.smacof_iterations;
  j["threads"] = c.threads;
  return j;
}

PipelineConfig config_from_json(const nlohmann::json& j, bool* extended) {
  require(j.is_object(), ErrorCode::ParseError, "config must be a JSON object");
  PipelineConfig c;
  bool ext = false;
  c.method = parse_method(j.at("method").get<std::string>(), &ext);
  if (extended) *extended = ext;
  read_value(j, "dim", c.dim);
  read_optional(j, "omega", c.omega);
  read_value(j, "same_dimension", c.same_dimension);
  read_value(j, "k", c.k);
  read_value(j, "perplexity", c.perplexity);
  read_value(j, "min_dist", c.min_dist);
  read_value(j, "spread", c.spread);
  read_optional(j, "epochs", c.epochs);
  read_optional(j, "learning_rate", c.learning_rate);
  read_value(j, "geodesic", c.geodesic);
  read_optional(j, "k_plus", c.k_plus);
  if (j.contains("knn")) c.knn = parse_knn(j["knn"].get<std::string>());
  read_value(j, "seed", c.seed);
  read_value(j, "symmetric_updates", c.symmetric_updates);
  read_value(j, "plain_gd", c.plain_gd);
  read_value(j, "smacof_iterations", c.smacof_iterations);
  read_value(j, "threads", c.threads);
  if (ext) c.geodesic = true;
  return c;
}

nlohmann::json manifest_to_json(const Manifest& m, const Pipeline& pipeline, double seconds) {
  nlohmann::json j;
  j["input"] = {{"path", m.input.string()}, {"sha1", m.input_sha1}};
  j["config"] = config_to_json(m.config, m.extended);
  j["space"] = {{"dim", pipeline.space().dim()},
                {"omega", std::vector<double>(pipeline.space().omega().begin(), pipeline.space().omega().end())}};
  j["stages"] = pipeline.stages();
  j["resolved"] = {{"epochs", resolved_epochs(pipeline.config())},
                   {"learning_rate", resolved_learning_rate(pipeline.config())}};
  j["outputs"] = {{"embedding", m.embedding.string()}, {"trace", m.trace.string()}};
  j["seconds"] = seconds;
  return j;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::ParseError, "cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, "manifest " + path.string() + ": " + e.what());
  }
  Manifest m;
  try {
    m.input = j.at("input").at("path").get<std::string>();
    m.input_sha1 = j.at("input").at("sha1").get<std::string>();
    m.config = config_from_json(j.at("config"), &m.extended);
    m.embedding = j.at("outputs").at("embedding").get<std::string>();
    m.trace = j.at("outputs").at("trace").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, "manifest " + path.string() + ": " + e.what());
  }
  return m;
}

}  // namespace finsler::cli
