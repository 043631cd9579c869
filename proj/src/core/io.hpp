#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "asymptotics.hpp"
#include "sensitivity.hpp"

namespace drdoo {

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

/// Comma-separated table with a header row. Throws IoError if unwritable.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Sample CSV: a header `y_1,...,y_l[,weight]` and one row per outcome.
/// Without a weight column the sample is uniform.
EmpiricalSample read_sample_csv(const std::string& path);
std::string sample_to_csv(const EmpiricalSample& sample);

/// {"points": [[...], ...], "weights": [...]}; weights optional.
EmpiricalSample sample_from_json(const nlohmann::json& j);
nlohmann::json sample_to_json(const EmpiricalSample& sample);

/// Dispatches on the extension: .json, otherwise CSV.
EmpiricalSample read_sample(const std::string& path);

nlohmann::json to_json(const SolveResult& r);
nlohmann::json to_json(const ExpansionSummary& s);
nlohmann::json to_json(const SandwichCovariance& s);
nlohmann::json to_json(const SensitivityReport& r);
nlohmann::json to_json(const Vector& v);
nlohmann::json to_json(const Matrix& m);

}  // namespace drdoo
