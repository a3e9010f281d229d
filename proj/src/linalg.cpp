#include "seisop/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "seisop/error.hpp"

namespace seisop {

namespace {

constexpr int kMaxJacobiSweeps = 100;

double inf_norm(const DenseMatrix& a) {
  return a.rows() == 0 ? 0.0 : a.cwiseAbs().rowwise().sum().maxCoeff();
}

void require_square(const DenseMatrix& a, const char* who) {
  if (a.rows() != a.cols()) {
    throw InvalidArgument(std::string(who) + ": matrix must be square, got " +
                          std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

}  // namespace

bool is_symmetric(const DenseMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  const DenseMatrix diff = a - a.transpose();
  return inf_norm(diff) <= tol * inf_norm(a);
}

DenseMatrix cholesky_lower(const DenseMatrix& a) {
  require_square(a, "cholesky_lower");
  const Eigen::Index n = a.rows();
  DenseMatrix l = DenseMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) {
      throw NumericError("cholesky_lower: matrix is not positive definite (leading minor of order " +
                         std::to_string(j + 1) + " has pivot " + std::to_string(d) + ")");
    }
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

GeneralizedEigen jacobi_eigen(const DenseMatrix& input) {
  require_square(input, "jacobi_eigen");
  const Eigen::Index n = input.rows();
  DenseMatrix a = 0.5 * (input + input.transpose());
  DenseMatrix v = DenseMatrix::Identity(n, n);

  const double scale = std::max(a.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  const double target = 1e-15 * scale;
  auto off_diagonal = [&] {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
    return std::sqrt(2.0 * s);
  };

  int sweep = 0;
  for (; sweep < kMaxJacobiSweeps && off_diagonal() > target; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= std::numeric_limits<double>::min()) continue;
        // Rotation angle that annihilates a(p, q) (Rutishauser's formulation).
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (off_diagonal() > target) {
    throw NumericError("jacobi_eigen: no convergence after " + std::to_string(kMaxJacobiSweeps) +
                       " sweeps, off-diagonal residual " + std::to_string(off_diagonal()));
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });

  GeneralizedEigen out{Vector(n), DenseMatrix(n, n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(j)];
    out.values(j) = a(src, src);
    out.vectors.col(j) = v.col(src);
  }
  return out;
}

GeneralizedEigen solve_sym_generalized_eig(const DenseMatrix& k, const DenseMatrix& m) {
  require_square(k, "solve_sym_generalized_eig");
  require_square(m, "solve_sym_generalized_eig");
  if (k.rows() != m.rows()) throw InvalidArgument("solve_sym_generalized_eig: K and M differ in size");
  if (!is_symmetric(k) || !is_symmetric(m)) {
    throw InvalidArgument("solve_sym_generalized_eig: K and M must be symmetric");
  }

  const DenseMatrix l = cholesky_lower(m);
  // A = L^-1 K L^-T
  DenseMatrix tmp = l.triangularView<Eigen::Lower>().solve(k);
  DenseMatrix a = l.triangularView<Eigen::Lower>().solve(tmp.transpose());
  a = 0.5 * (a + a.transpose());

  GeneralizedEigen std_eig = jacobi_eigen(a);
  // phi = L^-T y keeps phi^T M phi = y^T y = I.
  std_eig.vectors = l.transpose().triangularView<Eigen::Upper>().solve(std_eig.vectors);

  // Fix sign: largest-magnitude component of each mode positive.
  for (Eigen::Index j = 0; j < std_eig.vectors.cols(); ++j) {
    Eigen::Index imax = 0;
    std_eig.vectors.col(j).cwiseAbs().maxCoeff(&imax);
    if (std_eig.vectors(imax, j) < 0.0) std_eig.vectors.col(j) *= -1.0;
  }
  return std_eig;
}

Vector solve_linear(const DenseMatrix& a, const Vector& b) {
  require_square(a, "solve_linear");
  const Eigen::Index n = a.rows();
  if (b.size() != n) throw InvalidArgument("solve_linear: right-hand side has wrong length");

  DenseMatrix lu = a;
  Vector x = b;
  const double tiny = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * inf_norm(a);
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index piv = col;
    lu.col(col).tail(n - col).cwiseAbs().maxCoeff(&piv);
    piv += col;
    if (!(std::abs(lu(piv, col)) > tiny)) {
      throw NumericError("solve_linear: matrix is singular to working precision at pivot " +
                         std::to_string(col));
    }
    if (piv != col) {
      lu.row(piv).swap(lu.row(col));
      std::swap(x(piv), x(col));
    }
    for (Eigen::Index r = col + 1; r < n; ++r) {
      const double f = lu(r, col) / lu(col, col);
      lu(r, col) = 0.0;
      lu.row(r).tail(n - col - 1) -= f * lu.row(col).tail(n - col - 1);
      x(r) -= f * x(col);
    }
  }
  for (Eigen::Index r = n - 1; r >= 0; --r) {
    double s = x(r);
    for (Eigen::Index c = r + 1; c < n; ++c) s -= lu(r, c) * x(c);
    x(r) = s / lu(r, r);
  }
  return x;
}

}  // namespace seisop
