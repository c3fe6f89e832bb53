#include "hypodiff/core.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace hypodiff {

bool all_finite(const Vec& v) { return v.allFinite(); }
bool all_finite(const Mat& m) { return m.allFinite(); }

void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw InputError(std::string(what) + ": non-finite entry");
}

void require_dim(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": dimension " + std::to_string(got) +
                         ", expected " + std::to_string(want));
  }
}

namespace linalg {

SymmetricEigen jacobi_eigen(const Mat& a_in, double off_tol, int max_sweeps) {
  if (a_in.rows() != a_in.cols()) throw DimensionError("jacobi_eigen: matrix not square");
  const Eigen::Index n = a_in.rows();
  Mat a = 0.5 * (a_in + a_in.transpose());
  Mat v = Mat::Identity(n, n);

  auto off_mass = [&]() {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  int sweep = 0;
  // relative to the matrix scale so that large entries still converge
  const double scale = std::max(1.0, a.norm());
  while (off_mass() > off_tol * scale) {
    if (sweep >= max_sweeps) {
      throw ConvergenceError("jacobi_eigen: sweep cap exceeded", a.diagonal(), off_mass());
    }
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    ++sweep;
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
    out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  out.sweeps = sweep;
  return out;
}

double spectral_norm(const Mat& a, int max_iters, double rel_tol) {
  if (a.size() == 0) return 0.0;
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  Vec x(a.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = unif(rng);
  x.normalize();
  double sigma = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Vec y = a.transpose() * (a * x);
    const double ny = y.norm();
    if (ny == 0.0) return 0.0;
    const double next = std::sqrt(ny);
    x = y / ny;
    if (std::abs(next - sigma) <= rel_tol * next) return next;
    sigma = next;
  }
  // Power iteration approaches from below; with a small spectral gap it may
  // stall short of the norm, and callers use it as an upper bound.
  const Mat ata = a.transpose() * a;
  return std::max(sigma, std::sqrt(std::max(0.0, jacobi_eigen(ata).values(ata.rows() - 1))));
}

bool is_symmetric(const Mat& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol;
}

double min_eigenvalue(const Mat& sym) {
  if (sym.size() == 0) return 0.0;
  return jacobi_eigen(sym).values(0);
}

}  // namespace linalg
}  // namespace hypodiff
