#pragma once

#include <string>

#include <json.hpp>

#include "molqr/certainty_equivalence.hpp"
#include "molqr/sensitivity.hpp"

namespace molqr::io {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Problem document:
///   { "A": [[...], ...], "B": [[...], ...],
///     "objectives": [ {"label": "...", "Q": [[...]], "R": [[...]]}, ... ],
///     "normalize": false }
/// Matrices are lists of rows. Throws Error(kParse) on malformed input.
MultiObjectiveProblem parse_problem(const Json& doc);
MultiObjectiveProblem load_problem(const std::string& path);
Json problem_to_json(const MultiObjectiveProblem& problem);

Json matrix_to_json(const Matrix& M);
Matrix matrix_from_json(const Json& j, const char* name);

/// Front CSV, one row per solved weight:
///   w_1..w_m, K_r_c (row-major), loss_1..loss_m, scalarized_loss, dare_residual
std::string front_to_csv(const ParetoFrontApprox& front);
Json front_to_json(const ParetoFrontApprox& front);

Json point_to_json(const ParetoPoint& point);
Json margins_to_json(const StabilityMargins& margins);
Json constants_to_json(const SensitivityConstants& constants);
Json sensitivity_report_to_json(const PerturbationReport& report);
Json ce_report_to_json(const CEReport& report);

/// Deterministic text form (two-space indent, trailing newline).
std::string dump(const Json& doc);

/// %.17g
std::string format_double(double v);

void write_text(const std::string& path, const std::string& text);

}  // namespace molqr::io
