#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <utility>
#include <vector>

#include "irb/types.hpp"

namespace irb {

/// Validated density operator: Hermitian, unit trace, PSD within tolerance.
/// Construct through validate_density(); the stored matrix is the
/// symmetrized (rho + rho^dagger)/2 form, so its real part is exactly
/// symmetric and its imaginary part exactly antisymmetric.
template <typename Scalar>
class DensityOperator {
 public:
  using Complex = std::complex<Scalar>;
  using Matrix = MatrixXc<Scalar>;

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }

  static DensityOperator validate(const Matrix& raw);

 private:
  explicit DensityOperator(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

/// Hermitian matrix of observables (H and friends). Symmetrized on entry.
template <typename Scalar>
class HermitianObservable {
 public:
  using Complex = std::complex<Scalar>;
  using Matrix = MatrixXc<Scalar>;

  HermitianObservable() = default;

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }

  static HermitianObservable validate(const Matrix& raw) {
    if (raw.rows() != raw.cols() || raw.rows() < 1) {
      throw Error(Errc::bad_dim, "observable must be a square matrix of dim >= 1");
    }
    const Scalar asym = (raw - raw.adjoint()).cwiseAbs().maxCoeff();
    if (!(asym <= Scalar(tol::hermitian))) {
      std::ostringstream os;
      os << "observable asymmetry " << asym << " exceeds " << tol::hermitian;
      throw Error(Errc::not_hermitian, os.str());
    }
    return HermitianObservable(((raw + raw.adjoint()) / Scalar(2)).eval());
  }

  static HermitianObservable zero(Index dim) {
    return HermitianObservable(Matrix::Zero(dim, dim));
  }

 private:
  explicit HermitianObservable(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

/// Eigensystem of a real symmetric matrix, eigenvalues sorted descending,
/// columns of the orthogonal matrix matched to them, det forced to +1.
template <typename Scalar>
struct SpectralDecomposition {
  VectorX<Scalar> eigenvalues;
  MatrixX<Scalar> eigenvectors;
};

template <typename Scalar>
DensityOperator<Scalar> DensityOperator<Scalar>::validate(const Matrix& raw) {
  if (raw.rows() != raw.cols() || raw.rows() < 1) {
    throw Error(Errc::dim_mismatch, "state must be a square matrix of dim >= 1");
  }
  const Scalar asym = (raw - raw.adjoint()).cwiseAbs().maxCoeff();
  if (!(asym <= Scalar(tol::hermitian))) {
    std::ostringstream os;
    os << "max |m_ij - conj(m_ji)| = " << asym << " exceeds " << tol::hermitian;
    throw Error(Errc::not_hermitian, os.str());
  }
  Matrix m = ((raw + raw.adjoint()) / Scalar(2)).eval();

  const Scalar trace = m.real().trace();
  if (!(std::abs(trace - Scalar(1)) <= Scalar(tol::trace))) {
    std::ostringstream os;
    os << "|Tr - 1| = " << std::abs(trace - Scalar(1)) << " exceeds " << tol::trace;
    throw Error(Errc::trace_not_one, os.str());
  }

  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  const Scalar lambda_min = es.eigenvalues().minCoeff();
  if (!(lambda_min >= -Scalar(tol::psd))) {
    std::ostringstream os;
    os << "smallest eigenvalue " << lambda_min << " below -" << tol::psd;
    throw Error(Errc::not_psd, os.str());
  }
  return DensityOperator(std::move(m));
}

/// Validate a raw complex (or real) square matrix as a density operator.
template <typename Derived>
auto validate_density(const Eigen::MatrixBase<Derived>& raw) {
  using Scalar = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
  return DensityOperator<Scalar>::validate(raw.template cast<std::complex<Scalar>>().eval());
}

/// Eigendecomposition of a real symmetric matrix with the canonical
/// ordering and sign conventions: eigenvalues descending; each column's
/// first component of magnitude > 1e-12 made positive; then det forced
/// to +1 by negating the last column if needed.
template <typename Derived>
auto eig_sym(const Eigen::MatrixBase<Derived>& S_in) {
  using Scalar = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
  static_assert(!Eigen::NumTraits<typename Derived::Scalar>::IsComplex,
                "eig_sym expects a real symmetric matrix");
  const MatrixX<Scalar> S = S_in.eval();
  if (S.rows() != S.cols() || S.rows() < 1) {
    throw Error(Errc::dim_mismatch, "eig_sym expects a square matrix of dim >= 1");
  }
  const Scalar asym = (S - S.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= Scalar(tol::hermitian))) {
    std::ostringstream os;
    os << "asymmetry " << asym << " exceeds " << tol::hermitian;
    throw Error(Errc::not_symmetric, os.str());
  }

  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(((S + S.transpose()) / Scalar(2)).eval());
  if (es.info() != Eigen::Success) {
    throw Error(Errc::numerical_failure, "symmetric eigensolver did not converge");
  }

  const Index d = S.rows();
  // Eigen sorts ascending; re-sort descending, keeping the solver's
  // column order within degenerate clusters (stable tie-break).
  std::vector<Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return es.eigenvalues()[a] > es.eigenvalues()[b];
  });
  SpectralDecomposition<Scalar> out;
  out.eigenvalues.resize(d);
  out.eigenvectors.resize(d, d);
  for (Index k = 0; k < d; ++k) {
    out.eigenvalues[k] = es.eigenvalues()[order[static_cast<std::size_t>(k)]];
    out.eigenvectors.col(k) = es.eigenvectors().col(order[static_cast<std::size_t>(k)]);
  }

  for (Index k = 0; k < d; ++k) {
    for (Index r = 0; r < d; ++r) {
      if (std::abs(out.eigenvectors(r, k)) > Scalar(1e-12)) {
        if (out.eigenvectors(r, k) < Scalar(0)) out.eigenvectors.col(k) = -out.eigenvectors.col(k);
        break;
      }
    }
  }
  if (out.eigenvectors.determinant() < Scalar(0)) {
    out.eigenvectors.col(d - 1) = -out.eigenvectors.col(d - 1);
  }
  return out;
}

/// Von Neumann entropy -Tr(rho ln rho) in nats. Eigenvalues are clamped
/// to [0, 1] before the log; 0 ln 0 := 0.
template <typename Scalar>
Scalar von_neumann_entropy(const DensityOperator<Scalar>& rho) {
  Eigen::SelfAdjointEigenSolver<MatrixXc<Scalar>> es(rho.matrix(), Eigen::EigenvaluesOnly);
  Scalar s = 0;
  for (Index i = 0; i < rho.dim(); ++i) {
    const Scalar lam = std::clamp(es.eigenvalues()[i], Scalar(0), Scalar(1));
    if (lam > Scalar(0)) s -= lam * std::log(lam);
  }
  return s;
}

/// Trace distance D_tr(rho, sigma) = ||rho - sigma||_1 / 2.
template <typename Scalar>
Scalar trace_distance(const DensityOperator<Scalar>& rho, const DensityOperator<Scalar>& sigma) {
  if (rho.dim() != sigma.dim()) {
    throw Error(Errc::dim_mismatch, "trace_distance requires equal dims");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXc<Scalar>> es(
      (rho.matrix() - sigma.matrix()).eval(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum() / Scalar(2);
}

/// Ginibre random state: G has i.i.d. standard complex Gaussian entries
/// from a generator seeded with `seed`; returns G G^dagger / Tr(G G^dagger).
template <typename Scalar = double>
DensityOperator<Scalar> random_density(Index dim, std::uint64_t seed) {
  if (dim < 1) throw Error(Errc::bad_dim, "dim must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<Scalar> gauss(Scalar(0), Scalar(1));
  MatrixXc<Scalar> g(dim, dim);
  for (Index i = 0; i < dim; ++i) {
    for (Index j = 0; j < dim; ++j) {
      const Scalar re = gauss(rng);
      const Scalar im = gauss(rng);
      g(i, j) = std::complex<Scalar>(re, im);
    }
  }
  MatrixXc<Scalar> w = g * g.adjoint();
  const Scalar tr = w.real().trace();
  if (!(tr > Scalar(0))) throw Error(Errc::numerical_failure, "Ginibre sample has zero trace");
  return DensityOperator<Scalar>::validate((w / tr).eval());
}

using DensityOperatorXd = DensityOperator<double>;
using HermitianObservableXd = HermitianObservable<double>;
using SpectralDecompositionXd = SpectralDecomposition<double>;

}  // namespace irb
