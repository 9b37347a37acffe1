#include "ihgp/linalg.hpp"

#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

#include "ihgp/errors.hpp"

namespace ihgp {

Matrix expm(const Matrix& a) {
  const Eigen::Index n = a.rows();
  // theta_13 from Higham's scaling bound for the (13,13) approximant.
  constexpr double kTheta13 = 5.371920351148152;
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();

  int squarings = 0;
  Matrix as = a;
  if (norm1 > kTheta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
    as /= std::ldexp(1.0, squarings);
  }

  static const double b[] = {64764752532480000.0, 32382376266240000.0,
                             7771770303897600.0,  1187353796428800.0,
                             129060195264000.0,   10559470521600.0,
                             670442572800.0,      33522128640.0,
                             1323241920.0,        40840800.0,
                             960960.0,            16380.0,
                             182.0,               1.0};

  const Matrix ident = Matrix::Identity(n, n);
  const Matrix a2 = as * as;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const Matrix u =
      as * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 +
            b[5] * a4 + b[3] * a2 + b[1] * ident);
  const Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 +
                   b[4] * a4 + b[2] * a2 + b[0] * ident;

  Matrix r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

double max_real_eigenvalue(const Matrix& a) {
  Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff();
}

double spectral_radius(const Matrix& a) {
  Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix solve_lyapunov(const Matrix& f, const Matrix& w) {
  const Eigen::Index n = f.rows();
  const double scale = std::max(1.0, f.cwiseAbs().maxCoeff());
  if (max_real_eigenvalue(f) > -1e-12 * scale) {
    throw StabilityError("solve_lyapunov: F is not Hurwitz");
  }

  using ComplexMatrix = Eigen::MatrixXcd;
  Eigen::ComplexSchur<Matrix> schur(f);
  const ComplexMatrix t = schur.matrixT();
  const ComplexMatrix u = schur.matrixU();

  // Transformed equation T Y + Y T^H = C, solved by back-substitution over
  // the upper-triangular T.
  const ComplexMatrix c = -(u.adjoint() * w * u);
  ComplexMatrix y = ComplexMatrix::Zero(n, n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    for (Eigen::Index j = n - 1; j >= 0; --j) {
      std::complex<double> acc = c(i, j);
      for (Eigen::Index k = i + 1; k < n; ++k) acc -= t(i, k) * y(k, j);
      for (Eigen::Index k = j + 1; k < n; ++k) acc -= y(i, k) * std::conj(t(j, k));
      y(i, j) = acc / (t(i, i) + std::conj(t(j, j)));
    }
  }
  return symmetrized((u * y * u.adjoint()).real());
}

Matrix solve_discrete_lyapunov(const Matrix& g, const Matrix& c) {
  Matrix x = symmetrized(c);
  Matrix gk = g;
  constexpr int kMaxIters = 200;
  for (int it = 0; it < kMaxIters; ++it) {
    const Matrix term = gk * x * gk.transpose();
    x = symmetrized(x + term);
    const double term_norm = term.stableNorm();
    const double x_norm = x.stableNorm();
    if (!x.allFinite() || !std::isfinite(term_norm) || !std::isfinite(x_norm)) {
      throw ConvergenceError(
          "solve_discrete_lyapunov: iteration diverged (rho(G) >= 1?)");
    }
    if (term_norm <= 1e-16 * std::max(1.0, x_norm)) return x;
    gk = gk * gk;
  }
  throw ConvergenceError("solve_discrete_lyapunov: no convergence in 200 doublings");
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    out.segment(i * b.size(), b.size()) = a(i) * b;
  }
  return out;
}

Matrix project_psd(const Matrix& p) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(p));
  Vector d = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

double min_eigenvalue_sym(const Matrix& p) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(p),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace ihgp
