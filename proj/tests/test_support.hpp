#pragma once

// Shared generators and helpers for the unit and acceptance suites.

#include <random>
#include <vector>

#include "irb/irb.hpp"

namespace irb::testing {

using Rng = std::mt19937_64;

/// Haar-ish random rotation in SO(d): QR of a Gaussian matrix, column
/// signs fixed by the R diagonal, det forced to +1.
inline MatrixX<double> random_rotation(Index dim, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatrixX<double> g(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) g(i, j) = gauss(rng);
  Eigen::HouseholderQR<MatrixX<double>> qr(g);
  MatrixX<double> q = qr.householderQ();
  MatrixX<double> r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index k = 0; k < dim; ++k) {
    if (r(k, k) < 0) q.col(k) = -q.col(k);
  }
  if (q.determinant() < 0) q.col(dim - 1) = -q.col(dim - 1);
  return q;
}

/// Convex combination of the identity and random permutation matrices;
/// `strength` keeps the mixing gentle so U_max stationarity checks pass.
inline MatrixX<double> random_doubly_stochastic(Index dim, Rng& rng, double strength = 0.1) {
  MatrixX<double> m = (1.0 - strength) * MatrixX<double>::Identity(dim, dim);
  std::vector<Index> perm(static_cast<std::size_t>(dim));
  for (Index i = 0; i < dim; ++i) perm[static_cast<std::size_t>(i)] = i;
  const int n_perms = 3;
  for (int p = 0; p < n_perms; ++p) {
    std::shuffle(perm.begin(), perm.end(), rng);
    for (Index i = 0; i < dim; ++i) m(perm[static_cast<std::size_t>(i)], i) += strength / n_perms;
  }
  return m;
}

/// Random diagonal (selective) generator expressed in the frame basis:
/// two complex-diagonal channels plus a diagonal Hamiltonian, resampled
/// until every pair is damped with Gamma_min >= 0.5 and Gamma_max <= 3,
/// which keeps 5/Gamma_min horizons and RK4 step counts moderate.
inline GKSLGenerator<double> random_selective_generator(Index dim, Rng& rng,
                                                        bool with_hamiltonian = true) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_real_distribution<double> rate(0.5, 1.5);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<Channel<double>> channels;
    for (int c = 0; c < 2; ++c) {
      MatrixXc<double> L = MatrixXc<double>::Zero(dim, dim);
      for (Index i = 0; i < dim; ++i) L(i, i) = std::complex<double>(unif(rng), unif(rng));
      channels.push_back({rate(rng), std::move(L)});
    }
    MatrixXc<double> h = MatrixXc<double>::Zero(dim, dim);
    if (with_hamiltonian) {
      for (Index i = 0; i < dim; ++i) h(i, i) = unif(rng);
    }
    GKSLGenerator<double> gen(HermitianObservable<double>::validate(h), std::move(channels));
    const RateMatrix<double> rates = dephasing_rates(gen);
    if (rates.undamped_pairs.empty() && rates.gamma_min_active >= 0.5 &&
        rates.Gamma.maxCoeff() <= 3.0) {
      return gen;
    }
  }
  throw Error(Errc::numerical_failure, "could not sample a conditioned selective generator");
}

/// Random antisymmetric N with every pair strictly inside the positivity
/// bound relative to the populations.
inline MatrixX<double> random_coherences(const VectorX<double>& a, Rng& rng,
                                         double fill = 0.9) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const Index d = a.size();
  MatrixX<double> n = MatrixX<double>::Zero(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = i + 1; j < d; ++j) {
      n(i, j) = fill * unif(rng) * std::sqrt(std::max(a[i] * a[j], 0.0));
      n(j, i) = -n(i, j);
    }
  }
  return n;
}

/// Random probability vector (flat Dirichlet via exponentials).
inline VectorX<double> random_populations(Index dim, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  VectorX<double> a(dim);
  for (Index i = 0; i < dim; ++i) a[i] = expo(rng);
  return a / a.sum();
}

/// Balanced-qubit IRB state [[1/2, in],[-in, 1/2]].
inline DensityOperator<double> qubit_state(double a, double n) {
  MatrixXc<double> m(2, 2);
  m << std::complex<double>(a, 0), std::complex<double>(0, n), std::complex<double>(0, -n),
      std::complex<double>(1.0 - a, 0);
  return validate_density(m);
}

template <typename Fn>
bool throws_code(Fn&& fn, Errc code) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code() == code;
  } catch (...) {
    return false;
  }
  return false;
}

}  // namespace irb::testing
