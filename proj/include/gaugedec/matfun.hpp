// Dense matrix exponential and logarithm for small transport matrices.
// exp: scaling-and-squaring with a fixed degree-6 Pade approximant (edge
// arguments are O(h), far below the approximant's accuracy floor).
// log: inverse scaling by principal square roots, then the Mercator series.
#pragma once

#include <stdexcept>

#include <Eigen/Dense>

namespace gaugedec {

inline Eigen::MatrixXd expm(const Eigen::MatrixXd& A) {
  const int m = static_cast<int>(A.rows());
  double nrm = A.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  double scale = 1.0;
  while (nrm * scale > 0.5) {
    scale *= 0.5;
    ++squarings;
  }
  Eigen::MatrixXd As = A * scale;
  // diagonal [6/6] Pade of exp: c_k = (12-k)! 6! / (12! k! (6-k)!)
  static const double c[7] = {1.0,        0.5,         5.0 / 44,    1.0 / 66,
                              1.0 / 792,  1.0 / 15840, 1.0 / 665280};
  Eigen::MatrixXd X = Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd U = c[0] * X, V = Eigen::MatrixXd::Zero(m, m);
  bool odd = true;
  for (int k = 1; k <= 6; ++k) {
    X = X * As;
    if (odd)
      V += c[k] * X;
    else
      U += c[k] * X;
    odd = !odd;
  }
  Eigen::MatrixXd P = U + V, Q = U - V;
  Eigen::MatrixXd R = Q.partialPivLu().solve(P);
  for (int s = 0; s < squarings; ++s) R = R * R;
  return R;
}

// Principal square root by the Denman-Beavers iteration.
inline Eigen::MatrixXd sqrtm(const Eigen::MatrixXd& A) {
  Eigen::MatrixXd Y = A, Z = Eigen::MatrixXd::Identity(A.rows(), A.cols());
  for (int it = 0; it < 60; ++it) {
    Eigen::MatrixXd Yn = 0.5 * (Y + Z.inverse());
    Eigen::MatrixXd Zn = 0.5 * (Z + Y.inverse());
    double delta = (Yn - Y).norm();
    Y = Yn;
    Z = Zn;
    if (delta < 1e-15 * (1.0 + Y.norm())) break;
  }
  return Y;
}

// Principal logarithm of a matrix near the identity (transport loops).
inline Eigen::MatrixXd logm_near_identity(Eigen::MatrixXd A) {
  const int m = static_cast<int>(A.rows());
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);
  int doublings = 0;
  while ((A - I).norm() > 0.25) {
    A = sqrtm(A);
    if (++doublings > 40)
      throw std::invalid_argument("matrix log: argument too far from the identity");
  }
  Eigen::MatrixXd X = A - I;
  Eigen::MatrixXd term = X, L = Eigen::MatrixXd::Zero(m, m);
  for (int k = 1; k <= 24; ++k) {
    L += ((k % 2 == 1) ? 1.0 : -1.0) / k * term;
    term = term * X;
  }
  return std::ldexp(1.0, doublings) * L;
}

}  // namespace gaugedec
