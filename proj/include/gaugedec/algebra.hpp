// Matrix Lie algebra flavors carried by cochain values.  Bundles are
// trivialized, so a flavor is just a linear subspace of m x m real matrices
// closed under the commutator.  Structure is enforced by projection at
// construction time only.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gaugedec/random.hpp"

namespace gaugedec {

using Mat = Eigen::MatrixXd;

enum class Flavor { u1, so, su2, gl };

inline std::string to_string(Flavor f) {
  switch (f) {
    case Flavor::u1: return "u1";
    case Flavor::so: return "so";
    case Flavor::su2: return "su2";
    case Flavor::gl: return "gl";
  }
  return "gl";
}

inline Flavor flavor_from_string(const std::string& s) {
  if (s == "u1") return Flavor::u1;
  if (s == "so") return Flavor::so;
  if (s == "su2") return Flavor::su2;
  if (s == "gl") return Flavor::gl;
  throw std::invalid_argument("unknown algebra flavor: " + s);
}

class LieAlgebra {
public:
  LieAlgebra(int m, Flavor flavor) : m_(m), flavor_(flavor) {
    switch (flavor) {
      case Flavor::u1:
        if (m != 1) throw std::invalid_argument("u1 flavor requires m = 1");
        break;
      case Flavor::su2:
        if (m != 4) throw std::invalid_argument("su2 real representation requires m = 4");
        break;
      case Flavor::so:
      case Flavor::gl:
        if (m < 1) throw std::invalid_argument("matrix size must be positive");
        break;
    }
  }

  int m() const { return m_; }
  Flavor flavor() const { return flavor_; }

  // Basis of the flavor as a subspace of m x m matrices.
  std::vector<Mat> basis() const {
    std::vector<Mat> b;
    switch (flavor_) {
      case Flavor::u1:
        b.push_back(Mat::Identity(1, 1));
        break;
      case Flavor::so:
        for (int i = 0; i < m_; ++i)
          for (int j = i + 1; j < m_; ++j) {
            Mat e = Mat::Zero(m_, m_);
            e(i, j) = 1.0;
            e(j, i) = -1.0;
            b.push_back(e);
          }
        break;
      case Flavor::su2: {
        // left multiplication by the quaternion units i, j, k on R^4
        Mat I4 = Mat::Zero(4, 4), J4 = Mat::Zero(4, 4), K4 = Mat::Zero(4, 4);
        I4 << 0, -1, 0, 0, 1, 0, 0, 0, 0, 0, 0, -1, 0, 0, 1, 0;
        J4 << 0, 0, -1, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, -1, 0, 0;
        K4 << 0, 0, 0, -1, 0, 0, -1, 0, 0, 1, 0, 0, 1, 0, 0, 0;
        b = {I4, J4, K4};
        break;
      }
      case Flavor::gl:
        for (int i = 0; i < m_; ++i)
          for (int j = 0; j < m_; ++j) {
            Mat e = Mat::Zero(m_, m_);
            e(i, j) = 1.0;
            b.push_back(e);
          }
        break;
    }
    return b;
  }

  // Orthogonal projection onto the flavor subspace (Frobenius inner product).
  Mat project(const Mat& A) const {
    switch (flavor_) {
      case Flavor::u1:
      case Flavor::gl:
        return A;
      case Flavor::so:
        return 0.5 * (A - A.transpose());
      case Flavor::su2: {
        Mat P = Mat::Zero(4, 4);
        for (const Mat& e : basis()) P += e * (e.cwiseProduct(A).sum() / e.squaredNorm());
        return P;
      }
    }
    return A;
  }

  Mat random_element(Rng& rng, double scale = 1.0) const {
    Mat A = Mat::Zero(m_, m_);
    for (const Mat& e : basis()) A += rng.normal() * scale * e;
    return A;
  }

private:
  int m_;
  Flavor flavor_;
};

inline Mat commutator(const Mat& A, const Mat& B) { return A * B - B * A; }

}  // namespace gaugedec
