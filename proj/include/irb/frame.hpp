#pragma once

#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

#include "irb/density.hpp"
#include "irb/types.hpp"

namespace irb {

/// rho = S + iT with S real symmetric and T real antisymmetric, for the
/// conjugation K fixed as entrywise complex conjugation in the input
/// basis. Inputs expressed in a different physical real structure must be
/// pre-rotated into the basis where K acts by conjugation.
template <typename Scalar>
struct RealSplit {
  MatrixX<Scalar> S;
  MatrixX<Scalar> T;
};

/// Ordered partition of the active support into clusters of populations
/// lying within delta_degen of their neighbors (maximal runs).
struct BlockPartition {
  std::vector<std::vector<Index>> clusters;

  bool has_nontrivial_block() const {
    for (const auto& c : clusters)
      if (c.size() > 1) return true;
    return false;
  }
};

/// The intrinsic reference frame of a state: orthogonal gauge fix Q with
/// det +1, populations sorted descending, antisymmetric coherence matrix
/// N = Q^T T Q, active support and degeneracy blocks.
template <typename Scalar>
struct IRBFrame {
  MatrixX<Scalar> Q;
  VectorX<Scalar> populations;
  MatrixX<Scalar> N;
  std::vector<Index> active;
  BlockPartition blocks;
  Scalar delta_support = Scalar(tol::delta_support);
  Scalar delta_degen = Scalar(tol::delta_degen);

  Index dim() const { return Q.rows(); }
  Index active_dim() const { return static_cast<Index>(active.size()); }
};

template <typename Scalar>
RealSplit<Scalar> split_real_imag(const DensityOperator<Scalar>& rho) {
  // The validated state is exactly Hermitian, so the parts are exactly
  // symmetric / antisymmetric.
  return RealSplit<Scalar>{rho.matrix().real(), rho.matrix().imag()};
}

/// Greedy clustering of a descending population vector: consecutive
/// entries join one cluster iff their gap is <= delta_degen.
template <typename Derived>
BlockPartition detect_blocks(const Eigen::MatrixBase<Derived>& populations,
                             typename Derived::Scalar delta_degen) {
  using Scalar = typename Derived::Scalar;
  const VectorX<Scalar> a = populations.eval();
  for (Index i = 0; i + 1 < a.size(); ++i) {
    if (a[i + 1] > a[i]) {
      std::ostringstream os;
      os << "populations not sorted descending at index " << i;
      throw Error(Errc::not_sorted, os.str());
    }
  }
  BlockPartition out;
  if (a.size() == 0) return out;
  out.clusters.push_back({0});
  for (Index i = 1; i < a.size(); ++i) {
    if (a[i - 1] - a[i] <= delta_degen) {
      out.clusters.back().push_back(i);
    } else {
      out.clusters.push_back({i});
    }
  }
  return out;
}

/// Appendix-style construction: split rho into S + iT, diagonalize S with
/// the canonical ordering/sign/det rules, rotate T into the frame.
template <typename Scalar>
IRBFrame<Scalar> construct_irb(const DensityOperator<Scalar>& rho,
                               Scalar delta_support = Scalar(tol::delta_support),
                               Scalar delta_degen = Scalar(tol::delta_degen)) {
  const RealSplit<Scalar> split = split_real_imag(rho);
  const SpectralDecomposition<Scalar> eig = eig_sym(split.S);

  IRBFrame<Scalar> frame;
  frame.Q = eig.eigenvectors;
  frame.populations = eig.eigenvalues;
  MatrixX<Scalar> n = frame.Q.transpose() * split.T * frame.Q;
  frame.N = ((n - n.transpose()) / Scalar(2)).eval();
  frame.delta_support = delta_support;
  frame.delta_degen = delta_degen;

  // Populations sorted descending => the active support is a prefix.
  Index n_active = 0;
  while (n_active < frame.populations.size() && frame.populations[n_active] > delta_support) {
    ++n_active;
  }
  frame.active.resize(n_active);
  for (Index i = 0; i < n_active; ++i) frame.active[i] = i;
  frame.blocks = detect_blocks(frame.populations.head(n_active), delta_degen);

  const Scalar orth = (frame.Q.transpose() * frame.Q - MatrixX<Scalar>::Identity(rho.dim(), rho.dim()))
                          .cwiseAbs()
                          .maxCoeff();
  MatrixX<Scalar> diag_resid = frame.Q.transpose() * split.S * frame.Q;
  diag_resid.diagonal().setZero();
  if (orth > Scalar(tol::hermitian) || diag_resid.cwiseAbs().maxCoeff() > Scalar(tol::reconstruction)) {
    throw Error(Errc::numerical_failure, "IRB gauge fix failed orthogonality/diagonality check");
  }
  return frame;
}

/// Express rho in the frame: Q^T rho Q, validated.
template <typename Scalar>
DensityOperator<Scalar> to_irb(const DensityOperator<Scalar>& rho, const IRBFrame<Scalar>& frame) {
  if (rho.dim() != frame.dim()) {
    throw Error(Errc::dim_mismatch, "state and frame dims differ");
  }
  return validate_density(frame.Q.transpose() * rho.matrix() * frame.Q);
}

/// Complete dephasing channel in the IRB: zero the off-diagonals of a
/// state already expressed in the frame. Idempotent.
template <typename Scalar>
DensityOperator<Scalar> dephase_irb(const DensityOperator<Scalar>& rho_O) {
  MatrixXc<Scalar> d = MatrixXc<Scalar>::Zero(rho_O.dim(), rho_O.dim());
  d.diagonal() = rho_O.matrix().diagonal().real().template cast<std::complex<Scalar>>();
  return validate_density(d);
}

using RealSplitXd = RealSplit<double>;
using IRBFrameXd = IRBFrame<double>;

}  // namespace irb
