#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hypodiff {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Errors. Everything thrown by the library derives from Error so callers
// (the CLI in particular) can map failures to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

/// An iterative routine hit its cap. Carries the last iterate and the
/// optimality gap it had reached.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, Vec last_iterate, double gap)
      : Error(what), last_iterate_(std::move(last_iterate)), gap_(gap) {}
  const Vec& last_iterate() const { return last_iterate_; }
  double gap() const { return gap_; }

 private:
  Vec last_iterate_;
  double gap_;
};

class NormalizationError : public Error {
 public:
  using Error::Error;
};

class MonotonicityError : public Error {
 public:
  using Error::Error;
};

class VertexCapError : public Error {
 public:
  using Error::Error;
};

/// Declared metadata (L, exactness, consistency) contradicted by behaviour.
class MetadataError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

bool all_finite(const Vec& v);
bool all_finite(const Mat& m);
void require_finite(const Vec& v, const char* what);
void require_dim(Eigen::Index got, Eigen::Index want, const char* what);

namespace linalg {

struct SymmetricEigen {
  Vec values;   // ascending
  Mat vectors;  // columns, matching values
  int sweeps = 0;
};

/// Cyclic Jacobi rotations for a symmetric matrix. Converges when the
/// off-diagonal Frobenius mass drops below off_tol; throws ConvergenceError
/// after max_sweeps.
SymmetricEigen jacobi_eigen(const Mat& a, double off_tol = 1e-12, int max_sweeps = 100);

/// Spectral norm by power iteration on AᵀA from a fixed pseudo-random start.
double spectral_norm(const Mat& a, int max_iters = 200, double rel_tol = 1e-12);

bool is_symmetric(const Mat& a, double tol);
double min_eigenvalue(const Mat& sym);

}  // namespace linalg

}  // namespace hypodiff
