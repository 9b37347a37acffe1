#pragma once

#include <Eigen/Dense>

namespace ihgp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// Matrix exponential by scaling-and-squaring with a degree-13 Pade approximant.
Matrix expm(const Matrix& a);

/// Unique symmetric solution of F X + X F^T + W = 0 for Hurwitz F.
/// Throws StabilityError if F has an eigenvalue with non-negative real part.
Matrix solve_lyapunov(const Matrix& f, const Matrix& w);

/// Solution of X = G X G^T + C for rho(G) < 1 by squared Smith iteration.
/// Throws ConvergenceError when the iteration fails to contract.
Matrix solve_discrete_lyapunov(const Matrix& g, const Matrix& c);

Matrix kron(const Matrix& a, const Matrix& b);
Vector kron(const Vector& a, const Vector& b);

double spectral_radius(const Matrix& a);
double max_real_eigenvalue(const Matrix& a);

/// Clip negative eigenvalues of a symmetric matrix to zero.
Matrix project_psd(const Matrix& p);

double min_eigenvalue_sym(const Matrix& p);

}  // namespace ihgp
