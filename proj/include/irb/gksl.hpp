#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

#include "irb/density.hpp"
#include "irb/diagnostics.hpp"
#include "irb/frame.hpp"
#include "irb/types.hpp"

namespace irb {

namespace detail {

template <typename Scalar>
Scalar spectral_norm(const MatrixXc<Scalar>& m) {
  if (m.size() == 0) return Scalar(0);
  Eigen::SelfAdjointEigenSolver<MatrixXc<Scalar>> es((m.adjoint() * m).eval(),
                                                     Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(es.eigenvalues().maxCoeff(), Scalar(0)));
}

template <typename Scalar>
Scalar offdiag_spectral_norm(const MatrixXc<Scalar>& m) {
  MatrixXc<Scalar> off = m;
  off.diagonal().setZero();
  return spectral_norm(off);
}

}  // namespace detail

template <typename Scalar>
struct Channel {
  Scalar gamma;
  MatrixXc<Scalar> L;
};

/// GKSL generator: Hamiltonian plus weighted Lindblad channels.
template <typename Scalar>
class GKSLGenerator {
 public:
  GKSLGenerator(HermitianObservable<Scalar> H, std::vector<Channel<Scalar>> channels)
      : H_(std::move(H)), channels_(std::move(channels)) {
    for (const auto& ch : channels_) {
      if (!(ch.gamma >= Scalar(0))) {
        std::ostringstream os;
        os << "channel rate " << ch.gamma << " is negative";
        throw Error(Errc::negative_rate, os.str());
      }
      if (ch.L.rows() != H_.dim() || ch.L.cols() != H_.dim()) {
        throw Error(Errc::dim_mismatch, "Lindblad operator dim differs from H");
      }
    }
  }

  Index dim() const { return H_.dim(); }
  const HermitianObservable<Scalar>& H() const { return H_; }
  const std::vector<Channel<Scalar>>& channels() const { return channels_; }

 private:
  HermitianObservable<Scalar> H_;
  std::vector<Channel<Scalar>> channels_;
};

/// Pairwise dephasing data of a selective generator: Gamma_ij >= 0 with
/// zero diagonal, frequencies omega_ij = H_ii - H_jj, and the slowest
/// rate over the damped pairs. Pairs with Gamma_ij <= 1e-12 are undamped
/// and listed separately; decay bounds apply to the damped subset only.
/// Complex Lindblad diagonals additionally rotate each off-diagonal at
/// the Lamb-shift-like rate omega_shift_ij = -sum_a gamma_a
/// Im(l_a_i conj(l_a_j)); the exact propagator needs it, the decay
/// moduli do not.
template <typename Scalar>
struct RateMatrix {
  MatrixX<Scalar> Gamma;
  MatrixX<Scalar> omega;
  MatrixX<Scalar> omega_shift;
  Scalar gamma_min_active = 0;
  std::vector<std::pair<Index, Index>> undamped_pairs;

  Index dim() const { return Gamma.rows(); }
};

template <typename Scalar>
struct SelectivityCertificate {
  bool is_selective = false;
  Scalar max_commutator_norm = 0;
  VectorX<Scalar> per_channel_deviation;
  Scalar epsilon_estimate = 0;
  Scalar tolerance = Scalar(tol::selectivity);
};

template <typename Scalar>
struct Trajectory {
  std::vector<Scalar> times;
  std::vector<DensityOperator<Scalar>> states;
  std::vector<DiagnosticsReport<Scalar>> reports;

  std::size_t size() const { return times.size(); }
};

/// Minimal IRB-selective dissipator: channels (gamma_i, Pi_i) built from
/// the coordinate projectors, H = 0.
template <typename Derived>
auto minimal_dephasing(const Eigen::MatrixBase<Derived>& gammas, Index dim) {
  using Scalar = typename Derived::Scalar;
  const VectorX<Scalar> g = gammas.eval();
  if (g.size() != dim) throw Error(Errc::dim_mismatch, "need one rate per dimension");
  std::vector<Channel<Scalar>> channels;
  channels.reserve(static_cast<std::size_t>(dim));
  for (Index i = 0; i < dim; ++i) {
    if (!(g[i] >= Scalar(0))) {
      std::ostringstream os;
      os << "rate gamma_" << i << " = " << g[i] << " is negative";
      throw Error(Errc::negative_rate, os.str());
    }
    MatrixXc<Scalar> proj = MatrixXc<Scalar>::Zero(dim, dim);
    proj(i, i) = Scalar(1);
    channels.push_back({g[i], std::move(proj)});
  }
  return GKSLGenerator<Scalar>(HermitianObservable<Scalar>::zero(dim), std::move(channels));
}

/// Certify the commutation condition [L_alpha, Pi_i] = 0 against the
/// coordinate projectors of the given frame. Operators are rotated into
/// the frame before testing; the deviation is a spectral norm.
template <typename Scalar>
SelectivityCertificate<Scalar> check_selectivity(const GKSLGenerator<Scalar>& gen,
                                                 const MatrixX<Scalar>& Q,
                                                 Scalar tolerance = Scalar(tol::selectivity)) {
  if (Q.rows() != gen.dim() || Q.cols() != gen.dim()) {
    throw Error(Errc::dim_mismatch, "frame dim differs from generator dim");
  }
  const Index d = gen.dim();
  SelectivityCertificate<Scalar> cert;
  cert.tolerance = tolerance;
  cert.per_channel_deviation.resize(static_cast<Index>(gen.channels().size()));

  Scalar off_mass = 0, diag_mass = 0;
  for (std::size_t alpha = 0; alpha < gen.channels().size(); ++alpha) {
    const MatrixXc<Scalar> L =
        Q.transpose().template cast<std::complex<Scalar>>() * gen.channels()[alpha].L *
        Q.template cast<std::complex<Scalar>>();
    Scalar dev = 0;
    for (Index i = 0; i < d; ++i) {
      MatrixXc<Scalar> comm = MatrixXc<Scalar>::Zero(d, d);
      comm.col(i) = L.col(i);
      comm.row(i) -= L.row(i);
      dev = std::max(dev, detail::spectral_norm(comm));
    }
    cert.per_channel_deviation[static_cast<Index>(alpha)] = dev;
    cert.max_commutator_norm = std::max(cert.max_commutator_norm, dev);

    const Scalar gamma = gen.channels()[alpha].gamma;
    MatrixXc<Scalar> off = L;
    off.diagonal().setZero();
    off_mass += gamma * off.squaredNorm();
    diag_mass += gamma * L.diagonal().squaredNorm();
  }
  cert.epsilon_estimate = diag_mass > Scalar(0)
                              ? std::sqrt(off_mass) / std::sqrt(diag_mass)
                              : (off_mass > Scalar(0) ? std::numeric_limits<Scalar>::infinity()
                                                      : Scalar(0));
  cert.is_selective = cert.max_commutator_norm <= tolerance;
  return cert;
}

template <typename Scalar>
SelectivityCertificate<Scalar> check_selectivity(const GKSLGenerator<Scalar>& gen,
                                                 const IRBFrame<Scalar>& frame,
                                                 Scalar tolerance = Scalar(tol::selectivity)) {
  return check_selectivity(gen, frame.Q, tolerance);
}

/// Conjugate every operator of the generator into the frame basis.
template <typename Scalar>
GKSLGenerator<Scalar> rotate_generator(const GKSLGenerator<Scalar>& gen,
                                       const IRBFrame<Scalar>& frame) {
  if (frame.dim() != gen.dim()) {
    throw Error(Errc::dim_mismatch, "frame dim differs from generator dim");
  }
  const MatrixXc<Scalar> qc = frame.Q.template cast<std::complex<Scalar>>();
  std::vector<Channel<Scalar>> channels;
  channels.reserve(gen.channels().size());
  for (const auto& ch : gen.channels()) {
    channels.push_back({ch.gamma, (qc.transpose() * ch.L * qc).eval()});
  }
  return GKSLGenerator<Scalar>(
      HermitianObservable<Scalar>::validate(qc.transpose() * gen.H().matrix() * qc),
      std::move(channels));
}

/// Pairwise dephasing rates Gamma_ij = (1/2) sum_alpha gamma_alpha
/// |l_alpha_i - l_alpha_j|^2 from the Lindblad diagonals, for a generator
/// whose operators are diagonal (in the basis it is expressed in) to
/// within `tolerance`.
template <typename Scalar>
RateMatrix<Scalar> dephasing_rates(const GKSLGenerator<Scalar>& gen,
                                   Scalar tolerance = Scalar(tol::selectivity)) {
  const Index d = gen.dim();
  const MatrixX<Scalar> identity = MatrixX<Scalar>::Identity(d, d);
  const auto cert = check_selectivity(gen, identity, tolerance);
  if (!cert.is_selective) {
    std::ostringstream os;
    os << "generator is not IRB-selective: max commutator norm " << cert.max_commutator_norm
       << " exceeds " << tolerance << " (epsilon estimate " << cert.epsilon_estimate << ")";
    throw Error(Errc::not_selective, os.str());
  }
  const Scalar h_off = detail::offdiag_spectral_norm(gen.H().matrix());
  if (!(h_off <= tolerance)) {
    std::ostringstream os;
    os << "H off-diagonal spectral norm " << h_off << " exceeds " << tolerance;
    throw Error(Errc::not_selective, os.str());
  }

  RateMatrix<Scalar> rates;
  rates.Gamma = MatrixX<Scalar>::Zero(d, d);
  rates.omega = MatrixX<Scalar>::Zero(d, d);
  rates.omega_shift = MatrixX<Scalar>::Zero(d, d);
  const VectorX<Scalar> h_diag = gen.H().matrix().diagonal().real();
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      if (i == j) continue;
      Scalar g = 0, shift = 0;
      for (const auto& ch : gen.channels()) {
        g += ch.gamma * std::norm(ch.L(i, i) - ch.L(j, j));
        shift -= ch.gamma * (ch.L(i, i) * std::conj(ch.L(j, j))).imag();
      }
      rates.Gamma(i, j) = g / Scalar(2);
      rates.omega(i, j) = h_diag[i] - h_diag[j];
      rates.omega_shift(i, j) = shift;
    }
  }
  Scalar gmin = std::numeric_limits<Scalar>::infinity();
  bool any = false;
  for (Index i = 0; i < d; ++i) {
    for (Index j = i + 1; j < d; ++j) {
      if (rates.Gamma(i, j) > Scalar(tol::rate_floor)) {
        gmin = std::min(gmin, rates.Gamma(i, j));
        any = true;
      } else {
        rates.undamped_pairs.emplace_back(i, j);
      }
    }
  }
  rates.gamma_min_active = any ? gmin : Scalar(0);
  return rates;
}

namespace detail {

template <typename Scalar>
void require_monotone_times(const std::vector<Scalar>& times) {
  if (times.empty()) throw Error(Errc::non_monotone_times, "empty time grid");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) {
      std::ostringstream os;
      os << "time grid not strictly increasing at index " << k;
      throw Error(Errc::non_monotone_times, os.str());
    }
  }
}

}  // namespace detail

/// Exact propagation of a selective evolution in the fixed frame:
/// diagonals constant, rho_ij(t) = rho_ij(t0) exp(-(Gamma_ij + i omega_ij)(t - t0)).
template <typename Scalar>
Trajectory<Scalar> evolve_analytic(const DensityOperator<Scalar>& rho0_O,
                                   const RateMatrix<Scalar>& rates,
                                   const std::vector<Scalar>& times,
                                   Scalar delta_support = Scalar(tol::delta_support),
                                   Scalar lambda = Scalar(1)) {
  detail::require_monotone_times(times);
  if (rho0_O.dim() != rates.dim()) {
    throw Error(Errc::dim_mismatch, "state dim differs from rate matrix dim");
  }
  const Index d = rho0_O.dim();
  const Scalar t0 = times.front();

  const bool shifted = rates.omega_shift.rows() == d;
  Trajectory<Scalar> traj;
  traj.times = times;
  traj.states.reserve(times.size());
  traj.reports.reserve(times.size());
  for (const Scalar t : times) {
    const Scalar tau = t - t0;
    MatrixXc<Scalar> m = rho0_O.matrix();
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j < d; ++j) {
        if (i == j) continue;
        const Scalar w = rates.omega(i, j) + (shifted ? rates.omega_shift(i, j) : Scalar(0));
        m(i, j) *= std::exp(std::complex<Scalar>(-rates.Gamma(i, j) * tau, -w * tau));
      }
    }
    traj.states.push_back(validate_density(m));
    traj.reports.push_back(diagnose(traj.states.back(), delta_support, lambda));
  }
  return traj;
}

/// ||H||_2 + sum_alpha gamma_alpha ||L_alpha||_2^2; sets the internal
/// step bound of the numeric integrator.
template <typename Scalar>
Scalar generator_norm(const GKSLGenerator<Scalar>& gen) {
  Scalar norm = detail::spectral_norm(gen.H().matrix());
  for (const auto& ch : gen.channels()) {
    const Scalar l2 = detail::spectral_norm(ch.L);
    norm += ch.gamma * l2 * l2;
  }
  return norm;
}

namespace detail {

template <typename Scalar>
struct LindbladRhs {
  const GKSLGenerator<Scalar>* gen;
  std::vector<MatrixXc<Scalar>> LdagL;  // precomputed per channel

  explicit LindbladRhs(const GKSLGenerator<Scalar>& g) : gen(&g) {
    LdagL.reserve(g.channels().size());
    for (const auto& ch : g.channels()) LdagL.push_back((ch.L.adjoint() * ch.L).eval());
  }

  MatrixXc<Scalar> operator()(const MatrixXc<Scalar>& rho) const {
    const std::complex<Scalar> minus_i(0, -1);
    MatrixXc<Scalar> out = minus_i * (gen->H().matrix() * rho - rho * gen->H().matrix());
    for (std::size_t a = 0; a < gen->channels().size(); ++a) {
      const auto& ch = gen->channels()[a];
      if (ch.gamma == Scalar(0)) continue;
      out += ch.gamma * (ch.L * rho * ch.L.adjoint() -
                         Scalar(0.5) * (LdagL[a] * rho + rho * LdagL[a]));
    }
    return out;
  }
};

}  // namespace detail

/// Classical RK4 on the GKSL matrix ODE. Internal step is capped at
/// min(step, 0.1 / ||gen||); each step re-symmetrizes and renormalizes
/// the trace, erroring out if the drift exceeds the per-step budget.
template <typename Scalar>
Trajectory<Scalar> evolve_numeric(const DensityOperator<Scalar>& rho0,
                                  const GKSLGenerator<Scalar>& gen,
                                  const std::vector<Scalar>& times, Scalar step,
                                  Scalar delta_support = Scalar(tol::delta_support),
                                  Scalar lambda = Scalar(1)) {
  detail::require_monotone_times(times);
  if (!(step > Scalar(0))) throw Error(Errc::bad_argument, "step must be > 0");
  if (rho0.dim() != gen.dim()) {
    throw Error(Errc::dim_mismatch, "state dim differs from generator dim");
  }
  const Scalar norm = generator_norm(gen);
  const Scalar h_max = norm > Scalar(0) ? std::min(step, Scalar(0.1) / norm) : step;
  const detail::LindbladRhs<Scalar> rhs(gen);

  Trajectory<Scalar> traj;
  traj.times = times;
  traj.states.reserve(times.size());
  traj.reports.reserve(times.size());

  MatrixXc<Scalar> rho = rho0.matrix();
  traj.states.push_back(validate_density(rho));
  traj.reports.push_back(diagnose(traj.states.front(), delta_support, lambda));

  for (std::size_t k = 1; k < times.size(); ++k) {
    const Scalar span = times[k] - times[k - 1];
    const auto n_sub = static_cast<std::size_t>(std::ceil(span / h_max));
    const Scalar h = span / static_cast<Scalar>(n_sub);
    for (std::size_t s = 0; s < n_sub; ++s) {
      const MatrixXc<Scalar> k1 = rhs(rho);
      const MatrixXc<Scalar> k2 = rhs((rho + (h / Scalar(2)) * k1).eval());
      const MatrixXc<Scalar> k3 = rhs((rho + (h / Scalar(2)) * k2).eval());
      const MatrixXc<Scalar> k4 = rhs((rho + h * k3).eval());
      rho += (h / Scalar(6)) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);

      rho = ((rho + rho.adjoint()) / Scalar(2)).eval();
      const Scalar tr = rho.real().trace();
      if (!(std::abs(tr - Scalar(1)) <= Scalar(tol::trace_drift))) {
        std::ostringstream os;
        os << "trace drift " << std::abs(tr - Scalar(1)) << " per step exceeds "
           << tol::trace_drift << "; reduce the step";
        throw Error(Errc::step_too_coarse, os.str());
      }
      rho /= tr;
    }
    traj.states.push_back(validate_density(rho));
    traj.reports.push_back(diagnose(traj.states.back(), delta_support, lambda));
  }
  return traj;
}

/// L_alpha -> L_alpha + eps M_alpha on a selective base generator.
template <typename Scalar>
GKSLGenerator<Scalar> perturbed_generator(const GKSLGenerator<Scalar>& gen_diag,
                                          const std::vector<MatrixXc<Scalar>>& perturbations,
                                          Scalar epsilon) {
  if (perturbations.size() != gen_diag.channels().size()) {
    throw Error(Errc::dim_mismatch, "one perturbation per channel required");
  }
  const MatrixX<Scalar> identity = MatrixX<Scalar>::Identity(gen_diag.dim(), gen_diag.dim());
  const auto cert = check_selectivity(gen_diag, identity);
  if (!cert.is_selective) {
    throw Error(Errc::not_selective, "base generator must be selective");
  }
  std::vector<Channel<Scalar>> channels;
  channels.reserve(gen_diag.channels().size());
  for (std::size_t a = 0; a < perturbations.size(); ++a) {
    const auto& m = perturbations[a];
    if (m.rows() != gen_diag.dim() || m.cols() != gen_diag.dim()) {
      throw Error(Errc::dim_mismatch, "perturbation dim differs from generator dim");
    }
    channels.push_back(
        {gen_diag.channels()[a].gamma, (gen_diag.channels()[a].L + epsilon * m).eval()});
  }
  return GKSLGenerator<Scalar>(gen_diag.H(), std::move(channels));
}

/// One doubly stochastic Markov mixing step on the populations,
/// re-sorted descending for downstream IRB use.
template <typename DerivedA, typename DerivedM>
auto classical_mixing_step(const Eigen::MatrixBase<DerivedA>& populations,
                           const Eigen::MatrixBase<DerivedM>& M_in) {
  using Scalar = typename DerivedA::Scalar;
  const VectorX<Scalar> a = populations.eval();
  const MatrixX<Scalar> M = M_in.eval();
  if (M.rows() != M.cols() || M.rows() != a.size()) {
    throw Error(Errc::dim_mismatch, "mixing matrix dim differs from population dim");
  }
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (M(i, j) < -Scalar(1e-12)) {
        throw Error(Errc::not_doubly_stochastic, "negative entry in mixing matrix");
      }
    }
    if (std::abs(M.row(i).sum() - Scalar(1)) > Scalar(1e-10) ||
        std::abs(M.col(i).sum() - Scalar(1)) > Scalar(1e-10)) {
      std::ostringstream os;
      os << "row/column " << i << " does not sum to 1";
      throw Error(Errc::not_doubly_stochastic, os.str());
    }
  }
  VectorX<Scalar> mixed = M * a;
  std::sort(mixed.data(), mixed.data() + mixed.size(), std::greater<Scalar>());
  return mixed;
}

using ChannelXd = Channel<double>;
using GKSLGeneratorXd = GKSLGenerator<double>;
using RateMatrixXd = RateMatrix<double>;
using SelectivityCertificateXd = SelectivityCertificate<double>;
using TrajectoryXd = Trajectory<double>;

}  // namespace irb
