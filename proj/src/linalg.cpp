#include "molqr/linalg.hpp"

#include <algorithm>

#include "molqr/error.hpp"

namespace molqr {

double op_norm(const Eigen::Ref<const Matrix>& M) {
  if (M.size() == 0) return 0.0;
  if (M.rows() == 1 || M.cols() == 1) return M.norm();
  Eigen::JacobiSVD<Matrix> svd(M);
  return svd.singularValues()(0);
}

double min_eigenvalue_sym(const Eigen::Ref<const Matrix>& M) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eigenvalue_sym(const Eigen::Ref<const Matrix>& M) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double min_singular_value(const Eigen::Ref<const Matrix>& M) {
  Eigen::JacobiSVD<Matrix> svd(M);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 0.0;
  return std::min(M.rows(), M.cols()) == s.size() ? s(s.size() - 1) : 0.0;
}

bool is_symmetric(const Eigen::Ref<const Matrix>& M, double rel_tol) {
  if (M.rows() != M.cols()) return false;
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  return (M - M.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBadInput: return "BadInput";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kUnstable: return "Unstable";
    case ErrorCode::kSingularInnerMatrix: return "SingularInnerMatrix";
    case ErrorCode::kDiverging: return "Diverging";
    case ErrorCode::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::kNotStabilizable: return "NotStabilizable";
    case ErrorCode::kInvalidWeight: return "InvalidWeight";
    case ErrorCode::kTooFine: return "TooFine";
    case ErrorCode::kEmptyGrid: return "EmptyGrid";
    case ErrorCode::kUnstablePoint: return "UnstablePoint";
    case ErrorCode::kDegenerateB: return "DegenerateB";
    case ErrorCode::kPerturbedUnstabilizable: return "PerturbedUnstabilizable";
    case ErrorCode::kCannotStabilize: return "CannotStabilize";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kNetMismatch: return "NetMismatch";
    case ErrorCode::kParse: return "Parse";
  }
  return "Unknown";
}

}  // namespace molqr
