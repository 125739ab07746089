#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "irb/density.hpp"
#include "irb/frame.hpp"
#include "irb/types.hpp"

namespace irb {

/// Scalar functionals of an IRB-decomposed state. P_c, Dcoh and Alambda
/// are undefined (nullopt) on single-sector support (U_max < 1e-12).
template <typename Scalar>
struct DiagnosticsReport {
  Scalar Sp = 0;
  Scalar U = 0;
  Scalar Umax = 0;
  std::optional<Scalar> Pc;
  std::optional<Scalar> Dcoh;
  Scalar Crel = 0;
  Scalar hs_dist = 0;
  Scalar trace_dist_bound = 0;
  std::optional<Scalar> Alambda;
  Scalar lambda = 1;
  Index d_act = 0;
};

/// Population entropy S_p = -sum a_i ln a_i in nats, 0 ln 0 := 0.
/// Entries may carry PSD-tolerance negatives down to -1e-10.
template <typename Derived>
typename Derived::Scalar population_entropy(const Eigen::MatrixBase<Derived>& populations) {
  using Scalar = typename Derived::Scalar;
  const VectorX<Scalar> a = populations.eval();
  Scalar sum = 0;
  for (Index i = 0; i < a.size(); ++i) {
    if (a[i] < -Scalar(tol::psd)) {
      std::ostringstream os;
      os << "population " << a[i] << " below -" << tol::psd;
      throw Error(Errc::not_normalized, os.str());
    }
    sum += a[i];
  }
  if (!(std::abs(sum - Scalar(1)) <= Scalar(1e-10))) {
    std::ostringstream os;
    os << "populations sum to " << sum;
    throw Error(Errc::not_normalized, os.str());
  }
  Scalar s = 0;
  for (Index i = 0; i < a.size(); ++i) {
    const Scalar ai = std::max(a[i], Scalar(0));
    if (ai > Scalar(0)) s -= ai * std::log(ai);
  }
  return s;
}

/// Quadratic intrinsic coherence U = sum_{i<j} n_ij^2 = ||N||_F^2 / 2.
template <typename Derived>
typename Derived::Scalar coherence_U(const Eigen::MatrixBase<Derived>& N_in) {
  using Scalar = typename Derived::Scalar;
  const MatrixX<Scalar> N = N_in.eval();
  if (N.rows() != N.cols()) throw Error(Errc::dim_mismatch, "N must be square");
  const Scalar asym = (N + N.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= Scalar(tol::hermitian))) {
    std::ostringstream os;
    os << "antisymmetry defect " << asym << " exceeds " << tol::hermitian;
    throw Error(Errc::not_antisymmetric, os.str());
  }
  Scalar u = 0;
  for (Index i = 0; i < N.rows(); ++i)
    for (Index j = i + 1; j < N.cols(); ++j) u += N(i, j) * N(i, j);
  return u;
}

/// Population normalization scale U_max = sum_{i<j} a_i a_j.
template <typename Derived>
typename Derived::Scalar coherence_Umax(const Eigen::MatrixBase<Derived>& populations) {
  using Scalar = typename Derived::Scalar;
  const VectorX<Scalar> a = populations.eval();
  Scalar sum = 0;
  for (Index i = 0; i < a.size(); ++i) {
    if (a[i] < -Scalar(tol::psd)) {
      throw Error(Errc::not_normalized, "negative population beyond tolerance");
    }
    sum += a[i];
  }
  if (!(std::abs(sum - Scalar(1)) <= Scalar(1e-10))) {
    std::ostringstream os;
    os << "populations sum to " << sum;
    throw Error(Errc::not_normalized, os.str());
  }
  Scalar u = 0;
  for (Index i = 0; i < a.size(); ++i)
    for (Index j = i + 1; j < a.size(); ++j) u += a[i] * a[j];
  return u;
}

/// Cohesion index P_c = sqrt(U / U_max), clamped to [0, 1]. Throws
/// UmaxDegenerate on single-sector support; report assembly tags the
/// value as undefined instead.
template <typename Scalar>
Scalar cohesion_index(Scalar U, Scalar Umax) {
  if (U < Scalar(0)) throw Error(Errc::bad_argument, "U must be >= 0");
  if (Umax < Scalar(tol::umax_floor)) {
    std::ostringstream os;
    os << "U_max = " << Umax << " below " << tol::umax_floor << "; single-sector support";
    throw Error(Errc::umax_degenerate, os.str());
  }
  return std::clamp(std::sqrt(U / Umax), Scalar(0), Scalar(1));
}

/// Hilbert-Schmidt distance to the IRB-diagonal set: ||rho_O - A||_2 = sqrt(2U).
template <typename Scalar>
Scalar hs_distance_to_diagonal(Scalar U) {
  if (U < Scalar(0)) throw Error(Errc::bad_argument, "U must be >= 0");
  return std::sqrt(Scalar(2) * U);
}

/// Cauchy-Schwarz bound on the trace distance: sqrt(d_act / 2) sqrt(U).
template <typename Scalar>
Scalar trace_distance_bound(Scalar U, Index d_act) {
  if (U < Scalar(0)) throw Error(Errc::bad_argument, "U must be >= 0");
  if (d_act < 1) throw Error(Errc::bad_argument, "d_act must be >= 1");
  return std::sqrt(Scalar(d_act) / Scalar(2)) * std::sqrt(U);
}

/// Relative entropy of coherence C_rel = S(Delta[rho]) - S(rho) in nats,
/// for a state expressed in the IRB frame.
template <typename Scalar>
Scalar rel_entropy_coherence(const DensityOperator<Scalar>& rho_O) {
  const VectorX<Scalar> diag = rho_O.matrix().diagonal().real();
  Scalar s_diag = 0;
  for (Index i = 0; i < diag.size(); ++i) {
    const Scalar p = std::clamp(diag[i], Scalar(0), Scalar(1));
    if (p > Scalar(0)) s_diag -= p * std::log(p);
  }
  return s_diag - von_neumann_entropy(rho_O);
}

/// Arrow-of-time functional A_lambda = S_p + lambda (1 - P_c^2).
template <typename Scalar>
Scalar arrow_functional(Scalar Sp, Scalar Pc, Scalar lambda) {
  if (!(lambda > Scalar(0))) {
    std::ostringstream os;
    os << "lambda = " << lambda << " must be > 0";
    throw Error(Errc::bad_lambda, os.str());
  }
  const Scalar pc = std::clamp(Pc, Scalar(0), Scalar(1));
  return Sp + lambda * (Scalar(1) - pc * pc);
}

/// Detected probability of an ideal balanced two-path readout on the
/// (i, j) sector: p(phi) = (rho_ii + rho_jj)/2 + Re(rho_ij e^{i phi}).
template <typename Scalar>
Scalar interferogram(const DensityOperator<Scalar>& rho_O, Index i, Index j, Scalar phi) {
  if (!(i >= 0 && i < j && j < rho_O.dim())) {
    std::ostringstream os;
    os << "pair (" << i << ", " << j << ") out of range for dim " << rho_O.dim();
    throw Error(Errc::index_out_of_range, os.str());
  }
  const auto& m = rho_O.matrix();
  const Scalar base = (m(i, i).real() + m(j, j).real()) / Scalar(2);
  return base + (m(i, j) * std::exp(std::complex<Scalar>(0, phi))).real();
}

/// Fringe visibility V_ij = 2 |rho_ij| / (rho_ii + rho_jj).
template <typename Scalar>
Scalar visibility(const DensityOperator<Scalar>& rho_O, Index i, Index j) {
  if (!(i >= 0 && i < j && j < rho_O.dim())) {
    std::ostringstream os;
    os << "pair (" << i << ", " << j << ") out of range for dim " << rho_O.dim();
    throw Error(Errc::index_out_of_range, os.str());
  }
  const auto& m = rho_O.matrix();
  const Scalar occupancy = m(i, i).real() + m(j, j).real();
  if (!(occupancy > Scalar(tol::umax_floor))) {
    std::ostringstream os;
    os << "sector occupancy " << occupancy << " below " << tol::umax_floor;
    throw Error(Errc::empty_sector, os.str());
  }
  return Scalar(2) * std::abs(m(i, j)) / occupancy;
}

/// Assemble the full report for a state expressed in the (fixed) IRB
/// frame. Along a trajectory the off-diagonals may have picked up real
/// parts, so U is taken as sum_{i<j} |rho_ij|^2, which reduces to
/// sum n_ij^2 on a freshly decomposed state.
template <typename Scalar>
DiagnosticsReport<Scalar> diagnose(const DensityOperator<Scalar>& rho_in_frame,
                                   Scalar delta_support = Scalar(tol::delta_support),
                                   Scalar lambda = Scalar(1)) {
  const auto& m = rho_in_frame.matrix();
  const VectorX<Scalar> populations = m.diagonal().real();

  DiagnosticsReport<Scalar> rep;
  rep.lambda = lambda;
  rep.Sp = population_entropy(populations);
  Scalar u = 0;
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = i + 1; j < m.cols(); ++j) u += std::norm(m(i, j));
  rep.U = u;
  rep.Umax = coherence_Umax(populations);
  rep.d_act = 0;
  for (Index i = 0; i < populations.size(); ++i)
    if (populations[i] > delta_support) ++rep.d_act;
  rep.hs_dist = hs_distance_to_diagonal(rep.U);
  rep.trace_dist_bound = trace_distance_bound(rep.U, std::max<Index>(rep.d_act, 1));
  rep.Crel = rel_entropy_coherence(rho_in_frame);
  if (rep.Umax >= Scalar(tol::umax_floor)) {
    rep.Pc = cohesion_index(rep.U, rep.Umax);
    rep.Dcoh = Scalar(1) - (*rep.Pc) * (*rep.Pc);
    rep.Alambda = arrow_functional(rep.Sp, *rep.Pc, lambda);
  }
  return rep;
}

/// Report straight off a frame (state = A + iN reconstructed from it).
template <typename Scalar>
DiagnosticsReport<Scalar> diagnose(const IRBFrame<Scalar>& frame, Scalar lambda = Scalar(1)) {
  MatrixXc<Scalar> m = std::complex<Scalar>(0, 1) * frame.N.template cast<std::complex<Scalar>>();
  m.diagonal() = frame.populations.template cast<std::complex<Scalar>>();
  return diagnose(validate_density(m), frame.delta_support, lambda);
}

using DiagnosticsReportXd = DiagnosticsReport<double>;

}  // namespace irb
