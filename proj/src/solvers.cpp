#include "molqr/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "molqr/error.hpp"

namespace molqr {
namespace {

void require_square(const Eigen::Ref<const Matrix>& M, Eigen::Index n, const char* name) {
  if (M.rows() != n || M.cols() != n) {
    std::ostringstream os;
    os << name << " must be " << n << "x" << n << ", got " << M.rows() << "x" << M.cols();
    throw Error(ErrorCode::kDimensionMismatch, os.str());
  }
}

void require_spd(const Eigen::Ref<const Matrix>& M, const char* name) {
  if (!is_symmetric(M)) {
    throw Error(ErrorCode::kBadInput, std::string(name) + " is not symmetric");
  }
  Eigen::LLT<Matrix> llt(symmetrize(M));
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kBadInput, std::string(name) + " is not positive definite");
  }
}

bool all_finite(const Matrix& M) { return M.allFinite(); }

// One application of the Riccati map X ↦ AᵀXA − AᵀXB(R + BᵀXB)⁻¹BᵀXA + Q.
Matrix riccati_map(const Matrix& X, const Eigen::Ref<const Matrix>& A,
                   const Eigen::Ref<const Matrix>& B, const Eigen::Ref<const Matrix>& Q,
                   const Eigen::Ref<const Matrix>& R) {
  const Matrix XA = X * A;
  const Matrix BtX = B.transpose() * X;
  const Matrix inner = symmetrize(R + BtX * B);
  Eigen::LDLT<Matrix> ldlt(inner);
  const Matrix BtXA = BtX * A;
  return A.transpose() * XA - BtXA.transpose() * ldlt.solve(BtXA) + Q;
}

// Structured doubling: H_k → P quadratically under stabilizability.
// Returns an empty matrix if the iteration breaks down.
Matrix doubling(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B,
                const Eigen::Ref<const Matrix>& Q, const Eigen::Ref<const Matrix>& R,
                int& iterations) {
  const Eigen::Index n = A.rows();
  const Matrix I = Matrix::Identity(n, n);
  Matrix Ak = A;
  Matrix Gk = symmetrize(B * Eigen::LLT<Matrix>(symmetrize(R)).solve(B.transpose()));
  Matrix Hk = symmetrize(Q);
  for (int k = 0; k < 64; ++k) {
    ++iterations;
    Eigen::PartialPivLU<Matrix> W(I + Gk * Hk);
    const Matrix WinvA = W.solve(Ak);
    const Matrix WinvG = W.solve(Gk);
    const Matrix Hnext = symmetrize(Hk + Ak.transpose() * Hk * WinvA);
    const Matrix Gnext = symmetrize(Gk + Ak * WinvG * Ak.transpose());
    const Matrix Anext = Ak * WinvA;
    if (!all_finite(Hnext) || !all_finite(Gnext) || !all_finite(Anext)) return {};
    const double change = (Hnext - Hk).norm();
    Hk = Hnext;
    Gk = Gnext;
    Ak = Anext;
    if (change <= 1e-15 * std::max(1.0, Hk.norm())) break;
  }
  return Hk;
}

}  // namespace

double dare_residual(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Matrix>& A,
                     const Eigen::Ref<const Matrix>& B, const Eigen::Ref<const Matrix>& Q,
                     const Eigen::Ref<const Matrix>& R) {
  const Eigen::Index n = A.rows();
  require_square(A, n, "A");
  require_square(X, n, "X");
  require_square(Q, n, "Q");
  if (B.rows() != n) throw Error(ErrorCode::kDimensionMismatch, "B must have n rows");
  require_square(R, B.cols(), "R");

  const Matrix BtX = B.transpose() * X;
  const Matrix inner = R + BtX * B;
  Eigen::FullPivLU<Matrix> lu(inner);
  if (!lu.isInvertible() || lu.rcond() < 1e-14) {
    throw Error(ErrorCode::kSingularInnerMatrix, "R + BᵀXB is singular");
  }
  const Matrix BtXA = BtX * A;
  const Matrix F = X - A.transpose() * X * A + BtXA.transpose() * lu.solve(BtXA) - Q;
  return op_norm(F);
}

DareSolution solve_dare(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B,
                        const Eigen::Ref<const Matrix>& Q, const Eigen::Ref<const Matrix>& R,
                        const DareOptions& options) {
  const Eigen::Index n = A.rows();
  require_square(A, n, "A");
  require_square(Q, n, "Q");
  if (B.rows() != n) throw Error(ErrorCode::kDimensionMismatch, "B must have n rows");
  require_square(R, B.cols(), "R");
  require_spd(Q, "Q");
  require_spd(R, "R");
  if (!A.allFinite() || !B.allFinite()) throw Error(ErrorCode::kBadInput, "non-finite A or B");

  DareSolution out;
  Matrix P;
  if (options.method == DareMethod::kDoubling) {
    P = doubling(A, B, Q, R, out.iterations);
  }
  if (P.size() == 0) P = symmetrize(Q);

  for (; out.iterations <= options.max_iter; ++out.iterations) {
    const Matrix next = riccati_map(P, A, B, Q, R);
    if (!all_finite(next)) break;
    const double residual = op_norm(P - next);
    if (residual <= options.tol * std::max(1.0, op_norm(P))) {
      out.P = P;
      out.residual_norm = residual;
      return out;
    }
    P = symmetrize(next);
  }
  std::ostringstream os;
  os << "Riccati iteration did not reach tol " << options.tol << " within " << options.max_iter
     << " iterations";
  throw Error(ErrorCode::kNonConvergence, os.str());
}

Matrix solve_dlyap(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& Q,
                   LyapunovForm form) {
  const Eigen::Index n = A.rows();
  require_square(A, n, "A");
  require_square(Q, n, "Q");
  const double rho = spectral_radius(A);
  if (!(rho < 1.0)) {
    std::ostringstream os;
    os << "spectral radius " << rho << " >= 1";
    throw Error(ErrorCode::kUnstable, os.str());
  }
  const Matrix M = form == LyapunovForm::kForward ? Matrix(A) : Matrix(A.transpose());
  // vec(M P Mᵀ) = (M ⊗ M) vec(P) in column-major storage.
  const Eigen::Index nn = n * n;
  Matrix system = Matrix::Identity(nn, nn);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      system.block(i * n, j * n, n, n) -= M(i, j) * M;
    }
  }
  const Vector rhs = Eigen::Map<const Vector>(Matrix(Q).data(), nn);
  const Vector sol = system.partialPivLu().solve(rhs);
  return symmetrize(Eigen::Map<const Matrix>(sol.data(), n, n));
}

double spectral_radius(const Eigen::Ref<const Matrix>& M) {
  if (M.rows() != M.cols()) throw Error(ErrorCode::kDimensionMismatch, "matrix not square");
  if (M.size() == 0) return 0.0;
  if (M.size() == 1) return std::abs(M(0, 0));
  Eigen::EigenSolver<Matrix> es(M, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_stabilizing(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B,
                    const Eigen::Ref<const Matrix>& K, double margin_tol) {
  if (B.rows() != A.rows() || K.rows() != B.cols() || K.cols() != A.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "A, B, K shapes are incompatible");
  }
  return spectral_radius(A + B * K) < 1.0 - margin_tol;
}

bool is_stabilizable(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B,
                     double rank_tol) {
  const Eigen::Index n = A.rows();
  require_square(A, n, "A");
  if (B.rows() != n) throw Error(ErrorCode::kDimensionMismatch, "B must have n rows");
  using CMatrix = Eigen::MatrixXcd;
  Eigen::EigenSolver<Matrix> es(A, false);
  const double scale = std::max(1.0, op_norm(A) + op_norm(B));
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::complex<double> lambda = es.eigenvalues()(i);
    if (std::abs(lambda) < 1.0) continue;
    CMatrix pbh(n, n + B.cols());
    pbh.leftCols(n) = A.cast<std::complex<double>>() - lambda * CMatrix::Identity(n, n);
    pbh.rightCols(B.cols()) = B.cast<std::complex<double>>();
    Eigen::JacobiSVD<CMatrix> svd(pbh);
    if (svd.singularValues()(n - 1) <= rank_tol * scale) return false;
  }
  return true;
}

GrowthRate growth_rate_tau(const Eigen::Ref<const Matrix>& L, double rho, int k_max) {
  if (!(rho > 0.0)) throw Error(ErrorCode::kBadInput, "rho must be positive");
  const double radius = spectral_radius(L);
  if (rho < radius * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "rho " << rho << " is below the spectral radius " << radius;
    throw Error(ErrorCode::kDiverging, os.str());
  }
  GrowthRate out;
  out.rho = rho;
  out.tau = 1.0;
  const Matrix scaled = L / rho;
  Matrix power = Matrix::Identity(L.rows(), L.cols());
  for (int k = 1; k <= k_max; ++k) {
    power = power * scaled;
    const double term = op_norm(power);
    out.k_truncation = k;
    out.tau = std::max(out.tau, term);
    if (term <= 1.0 + 1e-12) {
      out.tail_certified = true;
      break;
    }
    if (!std::isfinite(term)) break;
  }
  return out;
}

Matrix reduce_to_identity_cost(const Eigen::Ref<const Matrix>& A,
                               const Eigen::Ref<const Matrix>& B,
                               const Eigen::Ref<const Matrix>& R) {
  require_square(R, B.cols(), "R");
  if (B.rows() != A.rows()) throw Error(ErrorCode::kDimensionMismatch, "B must have n rows");
  Eigen::LLT<Matrix> llt(symmetrize(R));
  if (llt.info() != Eigen::Success || !is_symmetric(R)) {
    throw Error(ErrorCode::kNotPositiveDefinite, "Cholesky factorization of R failed");
  }
  // B L⁻ᵀ = (L⁻¹ Bᵀ)ᵀ
  const Matrix Lfactor = llt.matrixL();
  return Lfactor.triangularView<Eigen::Lower>().solve(B.transpose()).transpose();
}

}  // namespace molqr
