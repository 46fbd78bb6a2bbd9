#include "molqr/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace molqr::io {
namespace {

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

template <typename T>
Json list_to_json(const std::vector<T>& values) {
  Json out = Json::array();
  for (const auto& v : values) out.push_back(static_cast<T>(v));
  return out;
}

}  // namespace

Json matrix_to_json(const Matrix& M) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, const char* name) {
  if (!j.is_array() || j.empty()) {
    throw Error(ErrorCode::kParse, std::string(name) + " must be a non-empty list of rows");
  }
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) {
    throw Error(ErrorCode::kParse, std::string(name) + " rows must be non-empty lists");
  }
  const std::size_t cols = j[0].size();
  Matrix M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw Error(ErrorCode::kParse, std::string(name) + " is ragged");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) {
        throw Error(ErrorCode::kParse, std::string(name) + " has a non-numeric entry");
      }
      M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return M;
}

MultiObjectiveProblem parse_problem(const Json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::kParse, "problem document must be an object");
  for (const char* key : {"A", "B", "objectives"}) {
    if (!doc.contains(key)) throw Error(ErrorCode::kParse, std::string("missing field '") + key + "'");
  }
  const bool normalize = doc.value("normalize", false);
  Matrix A = matrix_from_json(doc["A"], "A");
  Matrix B = matrix_from_json(doc["B"], "B");
  const Json& objs = doc["objectives"];
  if (!objs.is_array() || objs.empty()) {
    throw Error(ErrorCode::kParse, "'objectives' must be a non-empty list");
  }
  std::vector<CostObjective> objectives;
  for (std::size_t i = 0; i < objs.size(); ++i) {
    const Json& o = objs[i];
    if (!o.is_object() || !o.contains("Q") || !o.contains("R")) {
      throw Error(ErrorCode::kParse, "objective " + std::to_string(i) + " needs Q and R");
    }
    std::string label = o.value("label", "objective_" + std::to_string(i + 1));
    objectives.push_back(CostObjective::make(matrix_from_json(o["Q"], "Q"),
                                             matrix_from_json(o["R"], "R"), std::move(label),
                                             normalize));
  }
  return MultiObjectiveProblem(DynamicsModel(std::move(A), std::move(B)), std::move(objectives));
}

MultiObjectiveProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParse, "cannot open problem file '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, "invalid JSON in '" + path + "': " + e.what());
  }
  return parse_problem(doc);
}

Json problem_to_json(const MultiObjectiveProblem& problem) {
  Json doc;
  doc["A"] = matrix_to_json(problem.dynamics().A());
  doc["B"] = matrix_to_json(problem.dynamics().B());
  Json objs = Json::array();
  for (const auto& o : problem.objectives()) {
    objs.push_back({{"label", o.label}, {"Q", matrix_to_json(o.Q)}, {"R", matrix_to_json(o.R)}});
  }
  doc["objectives"] = std::move(objs);
  doc["normalize"] = false;
  return doc;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string front_to_csv(const ParetoFrontApprox& front) {
  std::ostringstream os;
  const std::size_t m = front.net.m;
  const ParetoPoint* first = nullptr;
  for (const auto& e : front.points) {
    if (e) {
      first = &*e;
      break;
    }
  }
  for (std::size_t i = 0; i < m; ++i) os << "w_" << i + 1 << ',';
  if (first) {
    for (Eigen::Index r = 0; r < first->K.rows(); ++r) {
      for (Eigen::Index c = 0; c < first->K.cols(); ++c) os << "K_" << r + 1 << '_' << c + 1 << ',';
    }
  }
  for (std::size_t i = 0; i < m; ++i) os << "loss_" << i + 1 << ',';
  os << "scalarized_loss,dare_residual\n";
  for (const auto& e : front.points) {
    if (!e) continue;
    for (Eigen::Index i = 0; i < e->w.values().size(); ++i) os << format_double(e->w.values()(i)) << ',';
    for (Eigen::Index r = 0; r < e->K.rows(); ++r) {
      for (Eigen::Index c = 0; c < e->K.cols(); ++c) os << format_double(e->K(r, c)) << ',';
    }
    for (Eigen::Index i = 0; i < e->losses.size(); ++i) os << format_double(e->losses(i)) << ',';
    os << format_double(e->scalarized_loss()) << ',' << format_double(e->dare.residual_norm) << '\n';
  }
  return os.str();
}

Json point_to_json(const ParetoPoint& point) {
  return {{"w", vector_to_json(point.w.values())},
          {"K", matrix_to_json(point.K)},
          {"P", matrix_to_json(point.dare.P)},
          {"losses", vector_to_json(point.losses)},
          {"scalarized_loss", point.scalarized_loss()},
          {"dare_residual", point.dare.residual_norm},
          {"dare_iterations", point.dare.iterations}};
}

Json front_to_json(const ParetoFrontApprox& front) {
  Json doc;
  doc["schema"] = kSchemaVersion;
  doc["problem_digest"] = front.problem_digest;
  doc["net"] = {{"epsilon", front.epsilon},
                {"m", front.net.m},
                {"resolution", front.net.resolution},
                {"size", front.net.points.size()}};
  Json points = Json::array();
  for (const auto& e : front.points) {
    if (e) points.push_back(point_to_json(*e));
  }
  doc["points"] = std::move(points);
  Json failures = Json::array();
  for (const auto& f : front.failures) {
    failures.push_back({{"index", f.index},
                        {"w", vector_to_json(front.net.points[f.index].values())},
                        {"error", std::string(to_string(f.code))},
                        {"message", f.message}});
  }
  doc["failures"] = std::move(failures);
  doc["complete"] = front.complete();
  return doc;
}

Json margins_to_json(const StabilityMargins& margins) {
  return {{"gamma_bar", margins.gamma_bar},
          {"tau_bar", margins.tau_bar},
          {"max_spectral_radius", margins.max_spectral_radius},
          {"rho_slack", margins.rho_slack},
          {"sampled_weights", margins.sampled_weights},
          {"certified", margins.certified},
          {"note", "sampled at net resolution"}};
}

Json constants_to_json(const SensitivityConstants& c) {
  auto contraction = [](const ContractionConstants& k) {
    return Json{{"c1", k.c1}, {"c2", k.c2}, {"c3", k.c3}, {"c4", k.c4}, {"tau", k.tau}};
  };
  return {{"p_max", c.p_max},
          {"k_max", c.k_max},
          {"gamma", c.gamma_cap},
          {"r_bar", c.r_bar},
          {"degenerate_b", c.degenerate_b},
          {"reference",
           {{"index", c.reference.index},
            {"w", vector_to_json(c.reference.w)},
            {"norm_a", c.reference.norm_a},
            {"norm_b", c.reference.norm_b},
            {"norm_p", c.reference.norm_p},
            {"norm_l", c.reference.norm_l},
            {"norm_s", c.reference.norm_s},
            {"sigma_min_p", c.reference.sigma_min_p}}},
          {"at_reference", contraction(c.at_reference)},
          {"worst_case_over_net", contraction(c.worst_case)}};
}

Json sensitivity_report_to_json(const PerturbationReport& report) {
  Json doc;
  doc["margins"] = margins_to_json(report.margins);
  doc["constants"] = constants_to_json(report.constants);
  doc["epsilons"] = list_to_json(report.epsilons);
  doc["empirical_dP"] = list_to_json(report.empirical_dP);
  doc["theoretical_bound"] = list_to_json(report.theoretical_bound);
  doc["slope"] = report.slope_loglog;
  doc["universal_c"] = report.universal_c;
  doc["validity_threshold"] = report.validity_threshold;
  doc["inside_validity"] = list_to_json(report.inside_validity);
  doc["skipped"] = list_to_json(report.skipped);
  doc["bound_label"] = "up to universal constant";
  return doc;
}

Json ce_report_to_json(const CEReport& report) {
  Json doc;
  doc["epsilon_dyn"] = report.epsilon_dyn;
  doc["provenance"] = std::string(to_string(report.provenance));
  Json rows = Json::array();
  for (const auto& r : report.per_weight) {
    rows.push_back({{"w", vector_to_json(r.w)},
                    {"stable_true", r.stable_true},
                    {"weighted_err", r.weighted_err},
                    {"uniform_err", r.uniform_err}});
  }
  doc["per_weight"] = std::move(rows);
  doc["sup_weighted"] = report.sup_weighted;
  doc["sup_uniform"] = report.sup_uniform;
  doc["stable_fraction"] = report.stable_fraction;
  return doc;
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kParse, "cannot write '" + path + "'");
  out << text;
}

}  // namespace molqr::io
