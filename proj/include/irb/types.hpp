#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace irb {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using MatrixXc = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Default tolerances. Absolute unless noted otherwise.
namespace tol {
inline constexpr double hermitian = 1e-12;     // max |m_ij - conj(m_ji)|
inline constexpr double trace = 1e-12;         // |Tr - 1|
inline constexpr double psd = 1e-10;           // smallest eigenvalue >= -psd
inline constexpr double reconstruction = 1e-10;
inline constexpr double delta_support = 1e-12; // active support a_i > delta
inline constexpr double delta_degen = 1e-9;    // degeneracy clustering
inline constexpr double selectivity = 1e-12;   // commutator spectral norm
inline constexpr double umax_floor = 1e-12;    // below this P_c is undefined
inline constexpr double rate_floor = 1e-12;    // Gamma_ij above this counts as damped
inline constexpr double gap_floor = 1e-9;      // population gap for frame consistency
inline constexpr double trace_drift = 1e-9;    // per-step renormalization budget
}  // namespace tol

enum class Errc {
  not_hermitian,
  trace_not_one,
  not_psd,
  dim_mismatch,
  not_symmetric,
  not_antisymmetric,
  not_normalized,
  not_sorted,
  umax_degenerate,
  bad_lambda,
  index_out_of_range,
  empty_sector,
  negative_rate,
  not_selective,
  non_monotone_times,
  step_too_coarse,
  not_doubly_stochastic,
  bad_epsilon,
  zero_rate,
  already_classical,
  undefined_pc,
  degenerate_gap,
  hypothesis_violated,
  bad_dim,
  bad_argument,
  parse_error,
  io_error,
  numerical_failure,
};

inline const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::not_hermitian: return "NotHermitian";
    case Errc::trace_not_one: return "TraceNotOne";
    case Errc::not_psd: return "NotPSD";
    case Errc::dim_mismatch: return "DimMismatch";
    case Errc::not_symmetric: return "NotSymmetric";
    case Errc::not_antisymmetric: return "NotAntisymmetric";
    case Errc::not_normalized: return "NotNormalized";
    case Errc::not_sorted: return "NotSorted";
    case Errc::umax_degenerate: return "UmaxDegenerate";
    case Errc::bad_lambda: return "BadLambda";
    case Errc::index_out_of_range: return "IndexOutOfRange";
    case Errc::empty_sector: return "EmptySector";
    case Errc::negative_rate: return "NegativeRate";
    case Errc::not_selective: return "NotSelective";
    case Errc::non_monotone_times: return "NonMonotoneTimes";
    case Errc::step_too_coarse: return "StepTooCoarse";
    case Errc::not_doubly_stochastic: return "NotDoublyStochastic";
    case Errc::bad_epsilon: return "BadEpsilon";
    case Errc::zero_rate: return "ZeroRate";
    case Errc::already_classical: return "AlreadyClassical";
    case Errc::undefined_pc: return "UndefinedPc";
    case Errc::degenerate_gap: return "DegenerateGap";
    case Errc::hypothesis_violated: return "HypothesisViolated";
    case Errc::bad_dim: return "BadDim";
    case Errc::bad_argument: return "BadArgument";
    case Errc::parse_error: return "ParseError";
    case Errc::io_error: return "IoError";
    case Errc::numerical_failure: return "NumericalFailure";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }
  const char* name() const noexcept { return errc_name(code_); }

 private:
  Errc code_;
};

}  // namespace irb
