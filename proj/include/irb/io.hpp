#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "irb/classicalization.hpp"
#include "irb/density.hpp"
#include "irb/diagnostics.hpp"
#include "irb/frame.hpp"
#include "irb/gksl.hpp"
#include "irb/types.hpp"

namespace irb::io {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Complex matrices: {"dim": d, "re": [[...]], "im": [[...]]}, row-major.
// ---------------------------------------------------------------------------

inline json matrix_to_json(const MatrixXc<double>& m) {
  json re = json::array(), im = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json re_row = json::array(), im_row = json::array();
    for (Index j = 0; j < m.cols(); ++j) {
      re_row.push_back(m(i, j).real());
      im_row.push_back(m(i, j).imag());
    }
    re.push_back(std::move(re_row));
    im.push_back(std::move(im_row));
  }
  return json{{"dim", m.rows()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

inline MatrixXc<double> matrix_from_json(const json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("re")) {
    throw Error(Errc::parse_error, "matrix object needs \"dim\" and \"re\" fields");
  }
  const auto dim = j.at("dim").get<Index>();
  if (dim < 1) throw Error(Errc::parse_error, "matrix dim must be >= 1");
  const bool has_im = j.contains("im") && !j.at("im").is_null();
  MatrixXc<double> m(dim, dim);
  try {
    const auto& re = j.at("re");
    if (static_cast<Index>(re.size()) != dim) {
      throw Error(Errc::parse_error, "\"re\" row count differs from dim");
    }
    for (Index i = 0; i < dim; ++i) {
      const auto& re_row = re.at(static_cast<std::size_t>(i));
      if (static_cast<Index>(re_row.size()) != dim) {
        throw Error(Errc::parse_error, "\"re\" column count differs from dim");
      }
      for (Index k = 0; k < dim; ++k) {
        double im_val = 0.0;
        if (has_im) {
          im_val = j.at("im").at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(k))
                       .get<double>();
        }
        m(i, k) = std::complex<double>(re_row.at(static_cast<std::size_t>(k)).get<double>(),
                                       im_val);
      }
    }
  } catch (const json::exception& e) {
    throw Error(Errc::parse_error, std::string("malformed matrix: ") + e.what());
  }
  return m;
}

inline json real_matrix_to_json(const MatrixX<double>& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Domain objects.
// ---------------------------------------------------------------------------

inline json to_json(const DensityOperatorXd& rho) { return matrix_to_json(rho.matrix()); }

inline DensityOperatorXd density_from_json(const json& j) {
  return validate_density(matrix_from_json(j));
}

inline json to_json(const IRBFrameXd& frame) {
  json active = json::array();
  for (const Index i : frame.active) active.push_back(i);
  json blocks = json::array();
  for (const auto& cluster : frame.blocks.clusters) {
    json b = json::array();
    for (const Index i : cluster) b.push_back(i);
    blocks.push_back(std::move(b));
  }
  json a = json::array();
  for (Index i = 0; i < frame.populations.size(); ++i) a.push_back(frame.populations[i]);
  return json{{"Q", real_matrix_to_json(frame.Q)},
              {"a", std::move(a)},
              {"N", real_matrix_to_json(frame.N)},
              {"active", std::move(active)},
              {"blocks", std::move(blocks)}};
}

inline json to_json(const DiagnosticsReportXd& rep) {
  auto opt = [](const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
  };
  return json{{"Sp", rep.Sp},
              {"U", rep.U},
              {"Umax", rep.Umax},
              {"Pc", opt(rep.Pc)},
              {"Dcoh", opt(rep.Dcoh)},
              {"Crel", rep.Crel},
              {"hs", rep.hs_dist},
              {"trbound", rep.trace_dist_bound},
              {"Alambda", opt(rep.Alambda)},
              {"lambda", rep.lambda},
              {"d_act", rep.d_act}};
}

inline json to_json(const SelectivityCertificateXd& cert) {
  json devs = json::array();
  for (Index i = 0; i < cert.per_channel_deviation.size(); ++i) {
    devs.push_back(cert.per_channel_deviation[i]);
  }
  return json{{"is_selective", cert.is_selective},
              {"max_commutator_norm", cert.max_commutator_norm},
              {"per_channel_deviation", std::move(devs)},
              {"epsilon_estimate", cert.epsilon_estimate},
              {"tol", cert.tolerance}};
}

inline json to_json(const FrameConsistencyReportXd& rep) {
  return json{{"max_bound_violation", rep.max_bound_violation},
              {"population_gap", rep.population_gap},
              {"max_angle_bound", rep.max_angle_bound},
              {"times", rep.times},
              {"angle_bound", rep.angle_bound},
              {"angle_envelope", rep.angle_envelope}};
}

inline json to_json(const ClassicalityVerdictXd& verdict) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return json{{"epsilon", verdict.epsilon},
              {"t_cl_measured", opt(verdict.t_cl_measured)},
              {"t_cl_bound", opt(verdict.t_cl_bound)},
              {"gamma_min_used", opt(verdict.gamma_min_used)}};
}

inline json to_json(const ArrowSeriesXd& series) {
  return json{{"values", series.values},
              {"hypothesis_flags", series.hypothesis_flags},
              {"hypothesis_ok", series.hypothesis_ok},
              {"max_decrease", series.max_decrease}};
}

/// Generator JSON: {"H": matrix, "channels": [{"gamma": g, "L": matrix}]}.
/// "H" may be null or absent for a pure dissipator.
inline GKSLGeneratorXd generator_from_json(const json& j) {
  if (!j.is_object() || !j.contains("channels")) {
    throw Error(Errc::parse_error, "generator object needs a \"channels\" array");
  }
  std::vector<ChannelXd> channels;
  Index dim = -1;
  try {
    for (const auto& cj : j.at("channels")) {
      ChannelXd ch;
      ch.gamma = cj.at("gamma").get<double>();
      ch.L = matrix_from_json(cj.at("L"));
      if (dim < 0) dim = ch.L.rows();
      channels.push_back(std::move(ch));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::parse_error, std::string("malformed channel: ") + e.what());
  }
  HermitianObservableXd H;
  if (j.contains("H") && !j.at("H").is_null()) {
    H = HermitianObservableXd::validate(matrix_from_json(j.at("H")));
  } else {
    if (dim < 0) throw Error(Errc::parse_error, "generator needs H or at least one channel");
    H = HermitianObservableXd::zero(dim);
  }
  return GKSLGeneratorXd(std::move(H), std::move(channels));
}

inline json to_json(const GKSLGeneratorXd& gen) {
  json channels = json::array();
  for (const auto& ch : gen.channels()) {
    channels.push_back(json{{"gamma", ch.gamma}, {"L", matrix_to_json(ch.L)}});
  }
  return json{{"H", matrix_to_json(gen.H().matrix())}, {"channels", std::move(channels)}};
}

// ---------------------------------------------------------------------------
// CSV: locale-independent, fixed 12 significant digits.
// ---------------------------------------------------------------------------

inline std::string fmt_g12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string fmt_opt(const std::optional<double>& v, const char* missing = "nan") {
  return v ? fmt_g12(*v) : std::string(missing);
}

inline std::string report_csv_header(const TrajectoryXd* traj_for_pairs = nullptr) {
  std::string header = "t,Sp,U,Umax,Pc,Dcoh,Crel,hs,trbound,Alambda";
  if (traj_for_pairs != nullptr && !traj_for_pairs->states.empty()) {
    const Index d = traj_for_pairs->states.front().dim();
    for (Index i = 0; i < d; ++i) {
      for (Index j = i + 1; j < d; ++j) {
        header += ",n_" + std::to_string(i) + "_" + std::to_string(j);
      }
    }
  }
  return header;
}

inline std::string report_csv_row(double t, const DiagnosticsReportXd& rep,
                                  const DensityOperatorXd* state_for_pairs = nullptr) {
  std::ostringstream os;
  os << fmt_g12(t) << ',' << fmt_g12(rep.Sp) << ',' << fmt_g12(rep.U) << ','
     << fmt_g12(rep.Umax) << ',' << fmt_opt(rep.Pc) << ',' << fmt_opt(rep.Dcoh) << ','
     << fmt_g12(rep.Crel) << ',' << fmt_g12(rep.hs_dist) << ','
     << fmt_g12(rep.trace_dist_bound) << ',' << fmt_opt(rep.Alambda);
  if (state_for_pairs != nullptr) {
    const auto& m = state_for_pairs->matrix();
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = i + 1; j < m.cols(); ++j) os << ',' << fmt_g12(std::abs(m(i, j)));
    }
  }
  return os.str();
}

inline std::string trajectory_csv(const TrajectoryXd& traj, bool with_pairs = false) {
  std::string out = report_csv_header(with_pairs ? &traj : nullptr) + "\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out += report_csv_row(traj.times[k], traj.reports[k],
                          with_pairs ? &traj.states[k] : nullptr);
    out += "\n";
  }
  return out;
}

inline std::string scan_csv(const EpsilonScanXd& scan) {
  std::string out = "epsilon,t_cl_measured,t_cl_bound,slope\n";
  for (const auto& row : scan.rows) {
    out += fmt_g12(row.epsilon) + "," + fmt_opt(row.t_cl_measured, "not_reached") + "," +
           fmt_opt(row.t_cl_bound) + "," + fmt_opt(scan.slope) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Files.
// ---------------------------------------------------------------------------

/// Write via a temp file in the same directory, then rename.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out.good()) throw Error(Errc::io_error, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::io_error, "rename to " + path.string() + " failed: " + ec.message());
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::parse_error, path.string() + ": " + e.what());
  }
}

inline DensityOperatorXd read_density_file(const std::filesystem::path& path) {
  return density_from_json(read_json_file(path));
}

inline GKSLGeneratorXd read_generator_file(const std::filesystem::path& path) {
  return generator_from_json(read_json_file(path));
}

}  // namespace irb::io
