#include "io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace drdoo {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return cells;
}

double parse_cell(const std::string& cell, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size())
    throw InvalidArgument("sample CSV line " + std::to_string(line) + ": bad number '" + cell + "'");
  return v;
}

EmpiricalSample build_sample(const std::vector<std::vector<double>>& points, const std::vector<double>& weights) {
  if (points.empty()) throw InvalidArgument("sample: no points");
  const auto dim = static_cast<Index>(points.front().size());
  Matrix m(dim, static_cast<Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (static_cast<Index>(points[i].size()) != dim) throw InvalidArgument("sample: ragged points");
    for (Index r = 0; r < dim; ++r) m(r, static_cast<Index>(i)) = points[i][static_cast<std::size_t>(r)];
  }
  if (weights.empty()) return EmpiricalSample::uniform(std::move(m));
  return EmpiricalSample(std::move(m), Eigen::Map<const Vector>(weights.data(), static_cast<Index>(weights.size())));
}

}  // namespace

EmpiricalSample read_sample_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read sample '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("sample CSV '" + path + "' is empty");
  const auto header = split_csv(line);
  const bool weighted = !header.empty() && header.back() == "weight";
  const std::size_t dim = header.size() - (weighted ? 1 : 0);
  if (dim == 0) throw InvalidArgument("sample CSV: no outcome columns");
  for (std::size_t i = 0; i < dim; ++i)
    if (header[i] != "y_" + std::to_string(i + 1))
      throw InvalidArgument("sample CSV: expected column 'y_" + std::to_string(i + 1) + "', got '" + header[i] + "'");
  std::vector<std::vector<double>> points;
  std::vector<double> weights;
  for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw InvalidArgument("sample CSV line " + std::to_string(lineno) + ": expected " +
                            std::to_string(header.size()) + " columns");
    std::vector<double> y;
    for (std::size_t i = 0; i < dim; ++i) y.push_back(parse_cell(cells[i], lineno));
    points.push_back(std::move(y));
    if (weighted) weights.push_back(parse_cell(cells.back(), lineno));
  }
  return build_sample(points, weights);
}

std::string sample_to_csv(const EmpiricalSample& s) {
  std::string out;
  for (Index r = 0; r < s.outcome_dim(); ++r) out += "y_" + std::to_string(r + 1) + ",";
  out += "weight\n";
  for (Index i = 0; i < s.size(); ++i) {
    for (Index r = 0; r < s.outcome_dim(); ++r) out += format_number(s.point(i)[r]) + ",";
    out += format_number(s.weight(i)) + "\n";
  }
  return out;
}

EmpiricalSample sample_from_json(const nlohmann::json& j) {
  try {
    std::vector<std::vector<double>> points;
    for (const auto& p : j.at("points")) {
      if (p.is_number()) points.push_back({p.get<double>()});
      else points.push_back(p.get<std::vector<double>>());
    }
    std::vector<double> weights;
    if (j.contains("weights")) weights = j.at("weights").get<std::vector<double>>();
    return build_sample(points, weights);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("sample JSON: ") + e.what());
  }
}

nlohmann::json sample_to_json(const EmpiricalSample& s) {
  nlohmann::json points = nlohmann::json::array();
  for (Index i = 0; i < s.size(); ++i) points.push_back(to_json(Vector(s.point(i))));
  return {{"points", points}, {"weights", to_json(s.weights())}};
}

EmpiricalSample read_sample(const std::string& path) {
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read sample '" + path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument(std::string("sample JSON: ") + e.what());
    }
    return sample_from_json(j);
  }
  return read_sample_csv(path);
}

nlohmann::json to_json(const Vector& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

nlohmann::json to_json(const Matrix& m) {
  nlohmann::json a = nlohmann::json::array();
  for (Index r = 0; r < m.rows(); ++r) a.push_back(to_json(Vector(m.row(r).transpose())));
  return a;
}

nlohmann::json to_json(const SolveResult& r) {
  return {{"delta", r.delta},
          {"x", to_json(r.x)},
          {"c", r.c},
          {"objective", r.objective},
          {"q", to_json(r.q.weights())},
          {"iterations", r.iterations},
          {"residual_norm", r.residual_norm},
          {"method", r.method}};
}

nlohmann::json to_json(const ExpansionSummary& s) {
  return {{"pi", to_json(s.pi)},
          {"beta", to_json(s.beta)},
          {"hessian_mean", to_json(s.hessian_mean)},
          {"cov_grad_reward", to_json(s.cov_grad_reward)},
          {"phi_dd", s.phi_dd}};
}

nlohmann::json to_json(const SandwichCovariance& s) {
  return {{"A", to_json(s.A)}, {"B", to_json(s.B)}, {"V", to_json(s.V)},
          {"xi", to_json(s.xi)}, {"kappa", to_json(s.kappa)}, {"eta", s.eta}};
}

nlohmann::json to_json(const SensitivityReport& r) {
  return {{"sensitivity", r.sensitivity}, {"mean_reward", r.mean_reward}, {"delta", r.delta}};
}

}  // namespace drdoo
