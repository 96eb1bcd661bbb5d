#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace balldyn {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr cplx kI{0.0, 1.0};

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (point outside its domain,
/// malformed parameters, mismatched dimensions).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The requested operation is outside the structured map classes.
class Unsupported : public Error {
 public:
  using Error::Error;
};

/// A checked mathematical invariant failed at run time.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

// Bilinear (not Hermitian) product sum_j a_j b_j; keeps polynomial maps holomorphic.
inline cplx dot_bilinear(const CVec& a, const CVec& b) {
  return (a.array() * b.array()).sum();
}

// Hermitian product <a, b> = sum_j a_j conj(b_j).
inline cplx herm(const CVec& a, const CVec& b) { return b.dot(a); }

// Nearest unitary (polar factor) of a square matrix.
CMat nearest_unitary(const CMat& m);

double unitarity_defect(const CMat& u);

}  // namespace balldyn
