#include "finsler/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "finsler/error.hpp"

namespace finsler {

DataMatrix gen_disk(Index n) {
  require(n >= 20 && n % 20 == 0, ErrorCode::InvalidArgument,
          "disk size must be a positive multiple of 20, got " + std::to_string(n));
  constexpr Index kAngles = 20;
  const Index radii = n / kAngles;
  RowMatrix x(n, 2);
  Index row = 0;
  for (Index r = 1; r <= radii; ++r) {
    const double rho = static_cast<double>(r) / static_cast<double>(radii);
    for (Index a = 0; a < kAngles; ++a) {
      const double theta = 2.0 * std::numbers::pi * static_cast<double>(a) / kAngles;
      x(row, 0) = rho * std::cos(theta);
      x(row, 1) = rho * std::sin(theta);
      ++row;
    }
  }
  return DataMatrix(std::move(x));
}

SwissRoll gen_swiss_roll(Index n_target) {
  require(n_target >= 25, ErrorCode::InvalidArgument, "swiss roll needs n_target >= 25");
  const double root = std::sqrt(static_cast<double>(n_target));
  const auto nu = static_cast<Index>(std::floor(2.5 * root));
  const auto nv = static_cast<Index>(std::floor(0.4 * root));
  const Index n = nu * nv;
  RowMatrix x(n, 3);
  RowMatrix uv(n, 2);
  Index row = 0;
  for (Index a = 0; a < nu; ++a) {
    const double u = nu > 1 ? static_cast<double>(a) / static_cast<double>(nu - 1) : 0.0;
    const double ut = 3.0 * std::numbers::pi * (u + 0.5);
    for (Index b = 0; b < nv; ++b) {
      const double v = nv > 1 ? static_cast<double>(b) / static_cast<double>(nv - 1) : 0.0;
      x(row, 0) = ut * std::cos(ut);
      x(row, 1) = 20.0 * v;
      x(row, 2) = ut * std::sin(ut);
      uv(row, 0) = u;
      uv(row, 1) = v;
      ++row;
    }
  }
  return {DataMatrix(std::move(x)), std::move(uv)};
}

double exponential_quantile(double p, double lambda) {
  require(p > 0.0 && p < 1.0 && lambda > 0.0, ErrorCode::InvalidArgument,
          "quantile needs 0 < p < 1 and lambda > 0");
  return -std::log(1.0 - p) / lambda;
}

PersistenceData gen_persistence(const PersistenceOptions& options) {
  require(options.classes >= 2, ErrorCode::InvalidArgument, "need at least two classes");
  require(options.n >= 1 && options.dims >= 1, ErrorCode::InvalidArgument, "empty persistence data");
  require(options.eig_scale > 0.0 && options.eps > 0.0, ErrorCode::InvalidArgument,
          "eigenvalue scale and eps must be positive");
  const double q = exponential_quantile(options.p_exp, options.lambda_exp);
  const int c = options.classes;
  const Index n = options.n;
  const Index dims = options.dims;
  std::mt19937_64 rng(options.seed);

  PersistenceData out;
  std::exponential_distribution<double> soft(options.lambda_exp);
  out.labels.resize(static_cast<std::size_t>(n));
  for (auto& label : out.labels) {
    const double raw = std::floor(static_cast<double>(c) * soft(rng) / q);
    label = static_cast<int>(std::clamp(raw, 0.0, static_cast<double>(c - 1)));
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  out.means.resize(c, dims);
  for (Index k = 0; k < c; ++k) {
    for (Index d = 0; d < dims; ++d) out.means(k, d) = unit(rng);
  }
  std::vector<Eigen::MatrixXd> factors;
  for (int k = 0; k < c; ++k) {
    Eigen::MatrixXd a(dims, dims);
    for (Index r = 0; r < dims; ++r) {
      for (Index s = 0; s < dims; ++s) a(r, s) = unit(rng);
    }
    const Eigen::MatrixXd raw = a * a.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(raw);
    const Vector squashed =
        eig.eigenvalues().unaryExpr([&](double l) { return options.eig_scale / (1.0 + std::exp(-l)); });
    Eigen::MatrixXd cov = eig.eigenvectors() * squashed.asDiagonal() * eig.eigenvectors().transpose();
    cov = 0.5 * (cov + cov.transpose()).eval();
    cov.diagonal().array() += options.eps;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    require(llt.info() == Eigen::Success, ErrorCode::NumericalFailure, "covariance is not positive definite");
    factors.push_back(llt.matrixL());
    out.covariances.emplace_back(cov);
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  RowMatrix x(n, dims);
  Vector z(dims);
  for (Index i = 0; i < n; ++i) {
    const int k = out.labels[static_cast<std::size_t>(i)];
    for (Index d = 0; d < dims; ++d) z(d) = gauss(rng);
    x.row(i) = out.means.row(k) + (factors[static_cast<std::size_t>(k)] * z).transpose();
  }
  out.points = DataMatrix(std::move(x));
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_number(const std::string& cell, double& value) {
  if (cell.empty()) return false;
  const char* first = cell.data();
  if (*first == '+') ++first;
  const char* last = cell.data() + cell.size();
  auto res = std::from_chars(first, last, value);
  return res.ec == std::errc() && res.ptr == last && std::isfinite(value);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::ParseError, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

DataMatrix parse_points_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  std::vector<double> values;
  Index rows = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    std::vector<double> parsed(cells.size());
    bool numeric = true;
    for (std::size_t c = 0; c < cells.size(); ++c) numeric = numeric && parse_number(cells[c], parsed[c]);
    if (first_content) {
      first_content = false;
      width = cells.size();
      if (!numeric) continue;  // header
    }
    if (cells.size() != width) {
      fail(ErrorCode::ParseError,
           "line " + std::to_string(line_no) + ": expected " + std::to_string(width) + " fields, got " +
               std::to_string(cells.size()),
           static_cast<double>(line_no));
    }
    if (!numeric) {
      fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": non-numeric cell",
           static_cast<double>(line_no));
    }
    values.insert(values.end(), parsed.begin(), parsed.end());
    ++rows;
  }
  require(rows > 0, ErrorCode::ParseError, "no data rows");
  RowMatrix x(rows, static_cast<Index>(width));
  std::copy(values.begin(), values.end(), x.data());
  return DataMatrix(std::move(x));
}

DataMatrix load_points_csv(const std::filesystem::path& path) { return parse_points_csv(read_file(path)); }

LabelColumn parse_labels(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> cells;
  while (std::getline(in, line)) {
    const std::string cell = trim(line);
    if (!cell.empty()) cells.push_back(cell);
  }
  require(!cells.empty(), ErrorCode::ParseError, "no labels");
  auto as_int = [](const std::string& s, int& value) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto res = std::from_chars(first, last, value);
    return res.ec == std::errc() && res.ptr == last;
  };
  int dummy = 0;
  bool integral = true;
  for (std::size_t i = 1; i < cells.size(); ++i) integral = integral && as_int(cells[i], dummy);
  LabelColumn out;
  if (integral) {
    std::size_t start = as_int(cells[0], dummy) ? 0 : 1;  // non-integer first line is a header
    if (cells.size() == 1 && start == 1) integral = false;
    if (integral) {
      for (std::size_t i = start; i < cells.size(); ++i) {
        int v = 0;
        as_int(cells[i], v);
        out.labels.push_back(v);
      }
      return out;
    }
  }
  std::map<std::string, int> ids;
  for (const auto& cell : cells) {
    auto [it, inserted] = ids.emplace(cell, static_cast<int>(out.categories.size()));
    if (inserted) out.categories.push_back(cell);
    out.labels.push_back(it->second);
  }
  return out;
}

LabelColumn load_labels_csv(const std::filesystem::path& path) { return parse_labels(read_file(path)); }

}  // namespace finsler
