#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "irb/diagnostics.hpp"
#include "irb/frame.hpp"
#include "irb/gksl.hpp"
#include "irb/types.hpp"

namespace irb {

namespace detail {

/// Least-squares slope of y against x.
template <typename Scalar>
Scalar ls_slope(const std::vector<Scalar>& x, const std::vector<Scalar>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(Errc::bad_argument, "slope fit needs >= 2 matched points");
  }
  const auto n = static_cast<Scalar>(x.size());
  Scalar sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  const Scalar denom = n * sxx - sx * sx;
  if (denom == Scalar(0)) throw Error(Errc::bad_argument, "degenerate abscissae in slope fit");
  return (n * sxy - sx * sy) / denom;
}

template <typename Scalar>
std::vector<Scalar> linspace(Scalar t0, Scalar t1, std::size_t samples) {
  if (samples < 2 || !(t1 > t0)) {
    throw Error(Errc::bad_argument, "linspace needs t1 > t0 and >= 2 samples");
  }
  std::vector<Scalar> out(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    out[k] = t0 + (t1 - t0) * static_cast<Scalar>(k) / static_cast<Scalar>(samples - 1);
  }
  return out;
}

}  // namespace detail

/// Crossing of the classicality threshold P_c <= epsilon on a trajectory.
/// t_cl_measured is empty when the threshold is never reached; t_cl_bound
/// and gamma_min_used are filled when a rate matrix is supplied.
template <typename Scalar>
struct ClassicalityVerdict {
  Scalar epsilon = 0;
  std::optional<Scalar> t_cl_measured;
  std::optional<Scalar> t_cl_bound;
  std::optional<Scalar> gamma_min_used;
};

template <typename Scalar>
struct FrameConsistencyReport {
  Scalar max_bound_violation = 0;  // max over samples/pairs of |S_ij| - envelope
  Scalar population_gap = 0;
  Scalar max_angle_bound = 0;  // max over the horizon of the realized angle bound
  std::vector<Scalar> times;
  std::vector<Scalar> angle_bound;     // max_ij |S_ij(t)| / g (Davis-Kahan)
  std::vector<Scalar> angle_envelope;  // max_ij |N_ij(0)| e^{-Gamma_ij t} / g
};

template <typename Scalar>
struct EpsilonScanRow {
  Scalar epsilon = 0;
  std::optional<Scalar> t_cl_measured;
  std::optional<Scalar> t_cl_bound;
};

template <typename Scalar>
struct EpsilonScan {
  std::vector<EpsilonScanRow<Scalar>> rows;
  std::optional<Scalar> slope;  // of t_cl vs ln(1/epsilon); 1/Gamma_min for single-rate decay
};

template <typename Scalar>
struct ArrowSeries {
  std::vector<Scalar> values;          // A_lambda per step, steps + 1 entries
  std::vector<bool> hypothesis_flags;  // per-step U_max stationarity check
  bool hypothesis_ok = true;
  Scalar max_decrease = 0;  // largest single-step drop of A_lambda
};

/// Closed-form classicalization bound t_cl = (1 / 2 Gamma_min)
/// ln(U0 / (eps^2 Umax0)); 0 once the threshold is already met.
template <typename Scalar>
Scalar tcl_bound(Scalar U0, Scalar Umax0, Scalar gamma_min, Scalar epsilon) {
  if (!(epsilon > Scalar(0) && epsilon < Scalar(1))) {
    std::ostringstream os;
    os << "epsilon = " << epsilon << " must lie in (0, 1)";
    throw Error(Errc::bad_epsilon, os.str());
  }
  if (!(gamma_min > Scalar(0))) {
    std::ostringstream os;
    os << "Gamma_min = " << gamma_min << " must be > 0";
    throw Error(Errc::zero_rate, os.str());
  }
  if (!(Umax0 > Scalar(0))) {
    if (U0 <= Scalar(0)) return Scalar(0);
    throw Error(Errc::umax_degenerate, "U_max(0) must be positive when U(0) > 0");
  }
  if (U0 <= epsilon * epsilon * Umax0) return Scalar(0);
  return std::log(U0 / (epsilon * epsilon * Umax0)) / (Scalar(2) * gamma_min);
}

/// Qubit crossing time of |n(t)| = |n0| e^{-(gamma1+gamma2)t/2} through
/// the threshold eps sqrt(a(1-a)): t_cl = (2/(gamma1+gamma2))
/// ln(|n0| / (eps sqrt(a(1-a)))), i.e. ln(P_c(0)/eps) / Gamma_min with
/// Gamma_min = (gamma1+gamma2)/2. Agrees exactly with tcl_bound.
template <typename Scalar>
Scalar tcl_qubit(Scalar n0, Scalar a, Scalar gamma1, Scalar gamma2, Scalar epsilon) {
  if (!(epsilon > Scalar(0) && epsilon < Scalar(1))) {
    throw Error(Errc::bad_epsilon, "epsilon must lie in (0, 1)");
  }
  if (!(a > Scalar(0) && a < Scalar(1))) {
    throw Error(Errc::bad_argument, "population a must lie in (0, 1)");
  }
  if (!(gamma1 + gamma2 > Scalar(0))) {
    throw Error(Errc::zero_rate, "gamma1 + gamma2 must be > 0");
  }
  const Scalar threshold = epsilon * std::sqrt(a * (Scalar(1) - a));
  if (!(std::abs(n0) > threshold)) {
    std::ostringstream os;
    os << "|n0| = " << std::abs(n0) << " already below threshold " << threshold;
    throw Error(Errc::already_classical, os.str());
  }
  return Scalar(2) * std::log(std::abs(n0) / threshold) / (gamma1 + gamma2);
}

/// First time P_c(t) <= epsilon, refined by linear interpolation in
/// ln P_c between the bracketing samples (exact for exponential decay).
template <typename Scalar>
ClassicalityVerdict<Scalar> detect_threshold_crossing(const Trajectory<Scalar>& traj,
                                                      Scalar epsilon) {
  if (!(epsilon > Scalar(0) && epsilon < Scalar(1))) {
    throw Error(Errc::bad_epsilon, "epsilon must lie in (0, 1)");
  }
  if (traj.size() == 0) throw Error(Errc::bad_argument, "empty trajectory");
  std::vector<Scalar> pc(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    if (!traj.reports[k].Pc) {
      throw Error(Errc::undefined_pc, "U_max degenerate along the trajectory");
    }
    pc[k] = *traj.reports[k].Pc;
  }

  ClassicalityVerdict<Scalar> verdict;
  verdict.epsilon = epsilon;
  if (pc[0] <= epsilon) {
    verdict.t_cl_measured = traj.times.front();
    return verdict;
  }
  for (std::size_t k = 1; k < traj.size(); ++k) {
    if (pc[k] > epsilon) continue;
    if (pc[k] <= Scalar(0)) {
      verdict.t_cl_measured = traj.times[k];
      return verdict;
    }
    const Scalar log_prev = std::log(pc[k - 1]);
    const Scalar log_curr = std::log(pc[k]);
    const Scalar frac = (log_prev - std::log(epsilon)) / (log_prev - log_curr);
    verdict.t_cl_measured = traj.times[k - 1] + frac * (traj.times[k] - traj.times[k - 1]);
    return verdict;
  }
  return verdict;  // not reached
}

template <typename Scalar>
ClassicalityVerdict<Scalar> detect_threshold_crossing(const Trajectory<Scalar>& traj,
                                                      Scalar epsilon,
                                                      const RateMatrix<Scalar>& rates) {
  ClassicalityVerdict<Scalar> verdict = detect_threshold_crossing(traj, epsilon);
  verdict.gamma_min_used = rates.gamma_min_active;
  if (rates.gamma_min_active > Scalar(0)) {
    verdict.t_cl_bound = tcl_bound(traj.reports.front().U, traj.reports.front().Umax,
                                   rates.gamma_min_active, epsilon);
  }
  return verdict;
}

/// Crossing times for a decreasing list of thresholds, plus the fitted
/// slope of t_cl against ln(1/epsilon).
template <typename Scalar>
EpsilonScan<Scalar> epsilon_scan(const Trajectory<Scalar>& traj,
                                 const std::vector<Scalar>& epsilons,
                                 const RateMatrix<Scalar>* rates = nullptr) {
  if (epsilons.empty()) throw Error(Errc::bad_epsilon, "empty epsilon list");
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    if (!(epsilons[k] > Scalar(0) && epsilons[k] < Scalar(1))) {
      throw Error(Errc::bad_epsilon, "epsilons must lie in (0, 1)");
    }
    if (k > 0 && !(epsilons[k] < epsilons[k - 1])) {
      throw Error(Errc::bad_epsilon, "epsilons must be strictly decreasing");
    }
  }
  EpsilonScan<Scalar> scan;
  std::vector<Scalar> xs, ys;
  for (const Scalar eps : epsilons) {
    EpsilonScanRow<Scalar> row;
    row.epsilon = eps;
    if (rates != nullptr) {
      const auto verdict = detect_threshold_crossing(traj, eps, *rates);
      row.t_cl_measured = verdict.t_cl_measured;
      row.t_cl_bound = verdict.t_cl_bound;
    } else {
      row.t_cl_measured = detect_threshold_crossing(traj, eps).t_cl_measured;
    }
    if (row.t_cl_measured) {
      xs.push_back(std::log(Scalar(1) / eps));
      ys.push_back(*row.t_cl_measured);
    }
    scan.rows.push_back(std::move(row));
  }
  if (xs.size() >= 2) scan.slope = detail::ls_slope(xs, ys);
  return scan;
}

/// Evolve in the fixed initial frame Q0 and check the frame-consistency
/// bound |S_ij(t)| <= |N_ij(0)| e^{-Gamma_ij t} on every active pair,
/// reporting the Davis-Kahan angle bound max_ij |S_ij(t)| / g and its
/// certified envelope.
template <typename Scalar>
FrameConsistencyReport<Scalar> frame_consistency_experiment(
    const DensityOperator<Scalar>& rho0, const GKSLGenerator<Scalar>& gen, Scalar horizon,
    std::size_t samples, Scalar selectivity_tol = Scalar(tol::selectivity),
    Scalar delta_support = Scalar(tol::delta_support)) {
  if (!(horizon > Scalar(0)) || samples < 2) {
    throw Error(Errc::bad_argument, "need horizon > 0 and >= 2 samples");
  }
  const IRBFrame<Scalar> frame = construct_irb(rho0, delta_support);
  const GKSLGenerator<Scalar> gen_O = rotate_generator(gen, frame);
  const RateMatrix<Scalar> rates = dephasing_rates(gen_O, selectivity_tol);

  const auto n_active = static_cast<Index>(frame.active.size());
  Scalar gap = std::numeric_limits<Scalar>::infinity();
  for (Index i = 0; i < n_active; ++i) {
    for (Index j = i + 1; j < n_active; ++j) {
      gap = std::min(gap, std::abs(frame.populations[i] - frame.populations[j]));
    }
  }
  if (n_active < 2) gap = Scalar(0);
  if (!(gap > Scalar(tol::gap_floor))) {
    std::ostringstream os;
    os << "population gap " << gap << " below " << tol::gap_floor
       << "; pointer-subspace regime, no per-vector angle bound";
    throw Error(Errc::degenerate_gap, os.str());
  }

  const DensityOperator<Scalar> rho_O = to_irb(rho0, frame);
  const Trajectory<Scalar> traj =
      evolve_analytic(rho_O, rates, detail::linspace(Scalar(0), horizon, samples), delta_support);

  FrameConsistencyReport<Scalar> report;
  report.population_gap = gap;
  report.times = traj.times;
  report.angle_bound.resize(traj.size());
  report.angle_envelope.resize(traj.size());
  Scalar max_violation = -std::numeric_limits<Scalar>::infinity();
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Scalar t = traj.times[k];
    Scalar s_max = 0, env_max = 0;
    for (Index i = 0; i < n_active; ++i) {
      for (Index j = i + 1; j < n_active; ++j) {
        const Scalar s_ij = std::abs(traj.states[k].matrix()(i, j).real());
        const Scalar env =
            std::abs(frame.N(i, j)) * std::exp(-rates.Gamma(i, j) * t);
        max_violation = std::max(max_violation, s_ij - env);
        s_max = std::max(s_max, s_ij);
        env_max = std::max(env_max, env);
      }
    }
    report.angle_bound[k] = s_max / gap;
    report.angle_envelope[k] = env_max / gap;
    report.max_angle_bound = std::max(report.max_angle_bound, report.angle_bound[k]);
  }
  report.max_bound_violation = max_violation;
  return report;
}

/// Alternate doubly stochastic population mixing with analytic coherence
/// decay and emit A_lambda per step. The U_max stationarity condition is
/// checked per step and surfaced as a flag, not enforced.
template <typename Scalar>
ArrowSeries<Scalar> arrow_monotonicity_experiment(const VectorX<Scalar>& a0,
                                                  const MatrixX<Scalar>& N0,
                                                  const MatrixX<Scalar>& M,
                                                  const RateMatrix<Scalar>& rates,
                                                  std::size_t steps, Scalar dt, Scalar lambda) {
  if (!(dt > Scalar(0))) throw Error(Errc::bad_argument, "dt must be > 0");
  if (N0.rows() != a0.size() || N0.cols() != a0.size() || rates.dim() != a0.size()) {
    throw Error(Errc::dim_mismatch, "population, coherence and rate dims must match");
  }
  const Scalar n_asym = (N0 + N0.transpose()).cwiseAbs().maxCoeff();
  if (!(n_asym <= Scalar(tol::hermitian))) {
    throw Error(Errc::not_antisymmetric, "N0 must be antisymmetric");
  }

  VectorX<Scalar> a = a0;
  MatrixX<Scalar> N = N0;
  ArrowSeries<Scalar> series;
  series.values.reserve(steps + 1);
  series.hypothesis_flags.reserve(steps);

  auto emit = [&]() {
    const Scalar sp = population_entropy(a);
    const Scalar u = coherence_U(N);
    const Scalar umax = coherence_Umax(a);
    series.values.push_back(arrow_functional(sp, cohesion_index(u, umax), lambda));
  };
  emit();

  for (std::size_t k = 0; k < steps; ++k) {
    const Scalar umax_before = coherence_Umax(a);
    a = classical_mixing_step(a, M);
    for (Index i = 0; i < N.rows(); ++i) {
      for (Index j = 0; j < N.cols(); ++j) {
        if (i != j) N(i, j) *= std::exp(-rates.Gamma(i, j) * dt);
      }
    }
    const Scalar umax_after = coherence_Umax(a);
    const bool ok = std::abs(umax_after - umax_before) <=
                    Scalar(2) * rates.gamma_min_active * dt * umax_before;
    series.hypothesis_flags.push_back(ok);
    series.hypothesis_ok = series.hypothesis_ok && ok;
    emit();
    const Scalar drop = series.values[series.values.size() - 2] - series.values.back();
    series.max_decrease = std::max(series.max_decrease, drop);
  }
  return series;
}

using ClassicalityVerdictXd = ClassicalityVerdict<double>;
using FrameConsistencyReportXd = FrameConsistencyReport<double>;
using EpsilonScanXd = EpsilonScan<double>;
using ArrowSeriesXd = ArrowSeries<double>;

}  // namespace irb
