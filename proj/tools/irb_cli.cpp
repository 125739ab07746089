// Command-line surface for IRB decomposition, diagnostics, GKSL evolution,
// selectivity certification, classicalization scans and the qubit
// benchmark data files.
//
// Exit codes: 0 success (or selective), 1 negative domain verdict,
// 2 input error, 3 numerical failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "irb/io.hpp"
#include "irb/irb.hpp"

namespace {

using namespace irb;
using irb::io::json;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::not_selective:
    case Errc::already_classical:
    case Errc::degenerate_gap:
    case Errc::undefined_pc:
    case Errc::hypothesis_violated:
      return 1;
    case Errc::step_too_coarse:
    case Errc::numerical_failure:
      return 3;
    default:
      return 2;
  }
}

std::size_t scan_threads() {
  if (const char* env = std::getenv("IRB_NUM_THREADS")) {
    const long n = std::atol(env);
    if (n >= 1) return static_cast<std::size_t>(n);
  }
  return 1;
}

/// Runs fn(i) for i in [0, n) on up to IRB_NUM_THREADS threads. Each
/// index writes only its own output slot.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min(scan_threads(), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct Tolerances {
  double delta_support = tol::delta_support;
  double delta_degen = tol::delta_degen;
  double sel_tol = tol::selectivity;
  double lambda = 1.0;
};

void add_tolerance_flags(CLI::App* cmd, Tolerances& t) {
  cmd->add_option("--delta-support", t.delta_support, "active-support population cutoff");
  cmd->add_option("--delta-degen", t.delta_degen, "degeneracy clustering tolerance");
  cmd->add_option("--sel-tol", t.sel_tol, "selectivity certification tolerance");
  cmd->add_option("--lambda", t.lambda, "arrow functional weight (> 0)");
}

std::string fmt_display(double v, bool bits) {
  return io::fmt_g12(bits ? v / std::log(2.0) : v);
}

void print_decompose_summary(const IRBFrameXd& frame, const DiagnosticsReportXd& rep,
                             bool bits) {
  const char* unit = bits ? "bits" : "nats";
  std::cout << "dim " << frame.dim() << ", active support " << frame.active.size() << "\n";
  std::cout << "populations:";
  for (Index i = 0; i < frame.populations.size(); ++i) {
    std::cout << ' ' << io::fmt_g12(frame.populations[i]);
  }
  std::cout << "\nblocks:";
  for (const auto& cluster : frame.blocks.clusters) {
    std::cout << " {";
    for (std::size_t k = 0; k < cluster.size(); ++k) {
      std::cout << (k ? "," : "") << cluster[k];
    }
    std::cout << "}";
  }
  std::cout << "\nS_p = " << fmt_display(rep.Sp, bits) << ' ' << unit
            << ", U = " << io::fmt_g12(rep.U) << ", U_max = " << io::fmt_g12(rep.Umax)
            << "\nP_c = " << (rep.Pc ? io::fmt_g12(*rep.Pc) : std::string("n/a"))
            << ", C_rel = " << fmt_display(rep.Crel, bits) << ' ' << unit << "\n";
  if (frame.blocks.has_nontrivial_block()) {
    std::cout << "note: degenerate population blocks present; only block-level "
                 "quantities are physical. intra-block coherences:";
    for (const auto& cluster : frame.blocks.clusters) {
      for (std::size_t p = 0; p < cluster.size(); ++p) {
        for (std::size_t q = p + 1; q < cluster.size(); ++q) {
          std::cout << " n(" << cluster[p] << ',' << cluster[q]
                    << ")=" << io::fmt_g12(frame.N(cluster[p], cluster[q]));
        }
      }
    }
    std::cout << "\n";
  }
}

int cmd_decompose(const std::string& state_path, const std::string& out_path,
                  const Tolerances& t, bool bits) {
  const auto rho = io::read_density_file(state_path);
  const auto frame = construct_irb(rho, t.delta_support, t.delta_degen);
  const auto rep = diagnose(to_irb(rho, frame), t.delta_support, t.lambda);
  print_decompose_summary(frame, rep, bits);
  if (!out_path.empty()) {
    const json out{{"frame", io::to_json(frame)}, {"report", io::to_json(rep)}};
    io::atomic_write(out_path, out.dump(2) + "\n");
  }
  return 0;
}

int cmd_certify(const std::string& gen_path, const std::string& state_path,
                const std::string& out_path, const Tolerances& t) {
  const auto gen = io::read_generator_file(gen_path);
  const auto rho = io::read_density_file(state_path);
  const auto frame = construct_irb(rho, t.delta_support, t.delta_degen);
  const auto cert = check_selectivity(gen, frame, t.sel_tol);
  const std::string text = io::to_json(cert).dump(2) + "\n";
  std::cout << text;
  if (!out_path.empty()) io::atomic_write(out_path, text);
  if (!cert.is_selective) {
    // Advisory only: compare the off-diagonal mass against the rates the
    // diagonal parts would produce.
    const auto gen_O = rotate_generator(gen, frame);
    double sum_gamma = 0.0;
    std::vector<ChannelXd> diag_channels;
    for (const auto& ch : gen_O.channels()) {
      sum_gamma += ch.gamma;
      MatrixXc<double> L = MatrixXc<double>::Zero(gen.dim(), gen.dim());
      L.diagonal() = ch.L.diagonal();
      diag_channels.push_back({ch.gamma, std::move(L)});
    }
    MatrixXc<double> h = MatrixXc<double>::Zero(gen.dim(), gen.dim());
    h.diagonal() = gen_O.H().matrix().diagonal().real().cast<std::complex<double>>();
    const auto rates = dephasing_rates(
        GKSLGeneratorXd(HermitianObservableXd::validate(h), std::move(diag_channels)));
    if (sum_gamma > 0.0 && rates.gamma_min_active > 0.0 &&
        cert.epsilon_estimate < 0.1 * rates.gamma_min_active / sum_gamma) {
      std::cerr << "advisory: near-selective (epsilon estimate "
                << io::fmt_g12(cert.epsilon_estimate) << " < 0.1 * Gamma_min / sum gamma = "
                << io::fmt_g12(0.1 * rates.gamma_min_active / sum_gamma)
                << "); contraction bounds hold to first order in the perturbation\n";
    }
    return 1;
  }
  return 0;
}

int cmd_evolve(const std::string& state_path, const std::string& gen_path,
               const std::string& out_path, const std::string& engine, double t0, double t1,
               std::size_t samples, double step, bool pairs, const Tolerances& t) {
  const auto rho = io::read_density_file(state_path);
  const auto gen = io::read_generator_file(gen_path);
  const auto frame = construct_irb(rho, t.delta_support, t.delta_degen);
  const auto rho_O = to_irb(rho, frame);
  const auto times = detail::linspace(t0, t1, samples);

  TrajectoryXd traj;
  if (engine == "analytic") {
    const auto cert = check_selectivity(gen, frame, t.sel_tol);
    if (!cert.is_selective) {
      std::cerr << "analytic engine requires a selective generator; certificate:\n"
                << io::to_json(cert).dump(2) << "\n";
      return 1;
    }
    const auto rates = dephasing_rates(rotate_generator(gen, frame), t.sel_tol);
    traj = evolve_analytic(rho_O, rates, times, t.delta_support, t.lambda);
  } else {
    traj = evolve_numeric(rho_O, rotate_generator(gen, frame), times, step, t.delta_support,
                          t.lambda);
  }
  io::atomic_write(out_path, io::trajectory_csv(traj, pairs));
  std::cout << "wrote " << traj.size() << " samples to " << out_path << "\n";
  return 0;
}

int cmd_tcl_scan(const std::string& state_path, const std::string& gen_path,
                 const std::string& out_path, std::vector<double> epsilons,
                 std::optional<double> t1, std::size_t samples, const Tolerances& t) {
  if (epsilons.empty()) throw Error(Errc::bad_epsilon, "need at least one --eps value");
  std::sort(epsilons.begin(), epsilons.end(), std::greater<double>());
  epsilons.erase(std::unique(epsilons.begin(), epsilons.end()), epsilons.end());

  const auto rho = io::read_density_file(state_path);
  const auto gen = io::read_generator_file(gen_path);
  const auto frame = construct_irb(rho, t.delta_support, t.delta_degen);
  const auto cert = check_selectivity(gen, frame, t.sel_tol);
  if (!cert.is_selective) {
    std::cerr << "tcl-scan requires a selective generator; certificate:\n"
              << io::to_json(cert).dump(2) << "\n";
    return 1;
  }
  const auto rates = dephasing_rates(rotate_generator(gen, frame), t.sel_tol);
  const auto rho_O = to_irb(rho, frame);
  const auto rep0 = diagnose(rho_O, t.delta_support, t.lambda);

  double horizon = t1.value_or(0.0);
  if (!t1) {
    if (!(rates.gamma_min_active > 0.0)) {
      throw Error(Errc::zero_rate, "all pairs undamped; pass --t1 to scan anyway");
    }
    for (const double eps : epsilons) {
      horizon = std::max(horizon,
                         1.25 * tcl_bound(rep0.U, rep0.Umax, rates.gamma_min_active, eps));
    }
    horizon += 1.0 / rates.gamma_min_active;
  }

  const auto traj = evolve_analytic(rho_O, rates, detail::linspace(0.0, horizon, samples),
                                    t.delta_support, t.lambda);

  EpsilonScanXd scan;
  scan.rows.resize(epsilons.size());
  parallel_for(epsilons.size(), [&](std::size_t i) {
    const auto verdict = detect_threshold_crossing(traj, epsilons[i], rates);
    scan.rows[i] = {epsilons[i], verdict.t_cl_measured, verdict.t_cl_bound};
  });
  std::vector<double> xs, ys;
  for (const auto& row : scan.rows) {
    if (row.t_cl_measured) {
      xs.push_back(std::log(1.0 / row.epsilon));
      ys.push_back(*row.t_cl_measured);
    }
  }
  if (xs.size() >= 2) scan.slope = detail::ls_slope(xs, ys);

  io::atomic_write(out_path, io::scan_csv(scan));
  std::cout << "wrote " << scan.rows.size() << " rows to " << out_path;
  if (scan.slope) std::cout << " (slope " << io::fmt_g12(*scan.slope) << ")";
  std::cout << "\n";
  return 0;
}

int cmd_fig2(const std::string& out_a, const std::string& out_b) {
  // Baked parameters: Gamma_min = 1, eps = 0.05, P_c(0) in {0.9, 0.5, 0.2}.
  const double eps = 0.05;
  const std::vector<double> pc0 = {0.9, 0.5, 0.2};
  const auto gen = minimal_dephasing(Eigen::Vector2d(1.0, 1.0).eval(), 2);
  const auto rates = dephasing_rates(gen);
  const auto times = detail::linspace(0.0, 5.0, 1001);

  std::vector<TrajectoryXd> trajs;
  for (const double p : pc0) {
    MatrixXc<double> m(2, 2);
    m << 0.5, std::complex<double>(0, p / 2.0), std::complex<double>(0, -p / 2.0), 0.5;
    trajs.push_back(evolve_analytic(validate_density(m), rates, times));
  }

  std::string panel_a = "t";
  for (const double p : pc0) panel_a += ",pc0_" + io::fmt_g12(p);
  panel_a += "\n";
  for (std::size_t k = 0; k < times.size(); ++k) {
    panel_a += io::fmt_g12(times[k]);
    for (const auto& traj : trajs) panel_a += "," + io::fmt_opt(traj.reports[k].Pc);
    panel_a += "\n";
  }
  io::atomic_write(out_a, panel_a);

  std::string panel_b = "Pc0,Gamma_min_tcl\n";
  for (const double p : pc0) {
    panel_b += io::fmt_g12(p) + "," + io::fmt_g12(tcl_qubit(p / 2.0, 0.5, 1.0, 1.0, eps)) + "\n";
  }
  io::atomic_write(out_b, panel_b);
  std::cout << "wrote " << out_a << " and " << out_b << "\n";
  return 0;
}

int cmd_random(Index dim, std::uint64_t seed, const std::string& out_path) {
  if (dim < 1 || dim > 64) {
    throw Error(Errc::bad_dim, "dim must lie in [1, 64]");
  }
  const auto rho = random_density(dim, seed);
  io::atomic_write(out_path, io::to_json(rho).dump(2) + "\n");
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"intrinsic-reference-basis decomposition and IRB-selective dynamics"};
  app.require_subcommand(1);

  Tolerances t;
  std::string state_path, gen_path, out_path;
  bool bits = false;

  auto* decompose = app.add_subcommand("decompose", "IRB frame and diagnostics of a state");
  decompose->add_option("--state", state_path, "state JSON file")->required();
  decompose->add_option("--out", out_path, "output JSON (frame + report)");
  decompose->add_flag("--bits", bits, "display entropic quantities in bits");
  add_tolerance_flags(decompose, t);

  std::string engine = "analytic";
  double t0 = 0.0, t1 = 1.0, step = 0.01;
  std::size_t samples = 101;
  bool pairs = false;
  auto* evolve = app.add_subcommand("evolve", "evolve a state under a GKSL generator");
  evolve->add_option("--state", state_path, "state JSON file")->required();
  evolve->add_option("--gen", gen_path, "generator JSON file")->required();
  evolve->add_option("--out", out_path, "trajectory CSV")->required();
  evolve->add_option("--engine", engine, "analytic|numeric")
      ->check(CLI::IsMember({"analytic", "numeric"}));
  evolve->add_option("--t0", t0, "start time");
  evolve->add_option("--t1", t1, "end time");
  evolve->add_option("--samples", samples, "number of samples");
  evolve->add_option("--step", step, "numeric engine step bound");
  evolve->add_flag("--pairs", pairs, "append per-pair |n_ij| columns");
  add_tolerance_flags(evolve, t);

  auto* certify = app.add_subcommand("certify", "IRB-selectivity certificate of a generator");
  certify->add_option("--gen", gen_path, "generator JSON file")->required();
  certify->add_option("--state", state_path, "state JSON file fixing the frame")->required();
  certify->add_option("--out", out_path, "certificate JSON output");
  add_tolerance_flags(certify, t);

  std::vector<double> epsilons;
  std::optional<double> scan_t1;
  std::size_t scan_samples = 2001;
  auto* scan = app.add_subcommand("tcl-scan", "classicalization times over an epsilon list");
  scan->add_option("--state", state_path, "state JSON file")->required();
  scan->add_option("--gen", gen_path, "generator JSON file")->required();
  scan->add_option("--out", out_path, "scan CSV")->required();
  scan->add_option("--eps", epsilons, "threshold list")->required()->delimiter(',');
  scan->add_option("--t1", scan_t1, "scan horizon (default: from the bound)");
  scan->add_option("--samples", scan_samples, "trajectory samples");
  add_tolerance_flags(scan, t);

  std::string out_a = "fig2_panel_a.csv", out_b = "fig2_panel_b.csv";
  auto* fig2 = app.add_subcommand("fig2", "qubit classicalization benchmark data");
  fig2->add_option("--out-a", out_a, "panel (a) CSV: P_c(t) curves");
  fig2->add_option("--out-b", out_b, "panel (b) CSV: Gamma_min t_cl vs P_c(0)");

  Index dim = 2;
  std::uint64_t seed = 0;
  auto* random = app.add_subcommand("random", "seeded Ginibre state file");
  random->add_option("--dim", dim, "dimension in [1, 64]")->required();
  random->add_option("--seed", seed, "RNG seed");
  random->add_option("--out", out_path, "state JSON output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // flag/argument problems are input errors
  }

  try {
    if (decompose->parsed()) return cmd_decompose(state_path, out_path, t, bits);
    if (evolve->parsed()) {
      return cmd_evolve(state_path, gen_path, out_path, engine, t0, t1, samples, step, pairs,
                        t);
    }
    if (certify->parsed()) return cmd_certify(gen_path, state_path, out_path, t);
    if (scan->parsed()) {
      return cmd_tcl_scan(state_path, gen_path, out_path, epsilons, scan_t1, scan_samples, t);
    }
    if (fig2->parsed()) return cmd_fig2(out_a, out_b);
    if (random->parsed()) return cmd_random(dim, seed, out_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
