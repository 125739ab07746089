#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "irb/io.hpp"
#include "test_support.hpp"

using namespace irb;
using irb::io::json;
using irb::testing::throws_code;

namespace {
namespace fs = std::filesystem;

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "irb_io_tests";
  fs::create_directories(dir);
  return dir;
}
}  // namespace

TEST_CASE("matrix JSON round trip") {
  const auto rho = random_density(4, 11);
  const json j = io::to_json(rho);
  CHECK(j.at("dim") == 4);
  CHECK(j.at("re").size() == 4);
  const auto back = io::density_from_json(j);
  CHECK((back.matrix() - rho.matrix()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("matrix JSON accepts a missing imaginary part") {
  const json j{{"dim", 2}, {"re", {{0.6, 0.1}, {0.1, 0.4}}}};
  const auto rho = io::density_from_json(j);
  CHECK(rho.matrix()(0, 1) == std::complex<double>(0.1, 0.0));
}

TEST_CASE("malformed matrix JSON raises ParseError, invalid states their own name") {
  CHECK(throws_code([] { io::matrix_from_json(json{{"re", {{1.0}}}}); }, Errc::parse_error));
  CHECK(throws_code([] { io::matrix_from_json(json{{"dim", 2}, {"re", {{1.0}}}}); },
                    Errc::parse_error));
  const json bad_state{{"dim", 2}, {"re", {{1.2, 0.0}, {0.0, -0.2}}}};
  CHECK(throws_code([&] { io::density_from_json(bad_state); }, Errc::not_psd));
}

TEST_CASE("generator JSON with and without H") {
  json j;
  j["channels"] = json::array();
  j["channels"].push_back(
      {{"gamma", 1.5}, {"L", json{{"dim", 2}, {"re", {{1.0, 0.0}, {0.0, -1.0}}}}}});
  const auto gen = io::generator_from_json(j);
  CHECK(gen.dim() == 2);
  CHECK(gen.channels().size() == 1);
  CHECK(gen.H().matrix().cwiseAbs().maxCoeff() == 0.0);

  j["H"] = json{{"dim", 2}, {"re", {{0.5, 0.0}, {0.0, -0.5}}}};
  const auto gen_h = io::generator_from_json(j);
  CHECK(gen_h.H().matrix()(0, 0).real() == doctest::Approx(0.5));

  const auto round = io::generator_from_json(io::to_json(gen_h));
  CHECK((round.H().matrix() - gen_h.H().matrix()).cwiseAbs().maxCoeff() == 0.0);

  CHECK(throws_code([] { io::generator_from_json(json{{"H", nullptr}}); }, Errc::parse_error));
}

TEST_CASE("frame JSON carries the documented keys") {
  const auto rho = irb::testing::qubit_state(0.5, 0.25);
  const json j = io::to_json(construct_irb(rho));
  for (const char* key : {"Q", "a", "N", "active", "blocks"}) CHECK(j.contains(key));
  CHECK(j.at("a").size() == 2);
  CHECK(j.at("active") == json::array({0, 1}));
  CHECK(j.at("blocks") == json::array({{0, 1}}));
}

TEST_CASE("report JSON tags undefined P_c as null") {
  MatrixXc<double> pure = MatrixXc<double>::Zero(2, 2);
  pure(0, 0) = 1.0;
  const auto rep = diagnose(validate_density(pure));
  const json j = io::to_json(rep);
  CHECK(j.at("Pc").is_null());
  CHECK(j.at("Alambda").is_null());
  CHECK(j.at("d_act") == 1);
}

TEST_CASE("CSV uses 12 significant digits and the documented header") {
  CHECK(io::fmt_g12(std::log(10.0)) == "2.30258509299");
  CHECK(io::fmt_g12(0.25) == "0.25");
  CHECK(io::fmt_g12(1.0 / 3.0) == "0.333333333333");
  CHECK(io::report_csv_header() == "t,Sp,U,Umax,Pc,Dcoh,Crel,hs,trbound,Alambda");

  const auto rates = dephasing_rates(minimal_dephasing(Eigen::Vector2d(1.0, 1.0).eval(), 2));
  const auto traj = evolve_analytic(irb::testing::qubit_state(0.5, 0.25), rates,
                                    irb::detail::linspace(0.0, 1.0, 3));
  const std::string csv = io::trajectory_csv(traj, true);
  CHECK(csv.find("n_0_1") != std::string::npos);
  CHECK(csv.find("0.25") != std::string::npos);

  MatrixXc<double> pure = MatrixXc<double>::Zero(2, 2);
  pure(0, 0) = 1.0;
  const std::string row = io::report_csv_row(0.0, diagnose(validate_density(pure)));
  CHECK(row.find("nan") != std::string::npos);
}

TEST_CASE("experiment reports serialize to JSON") {
  const auto gen = minimal_dephasing(Eigen::Vector2d(1.0, 0.4).eval(), 2);
  const auto rep = frame_consistency_experiment(irb::testing::qubit_state(0.7, 0.2), gen, 3.0, 31);
  const json fj = io::to_json(rep);
  CHECK(fj.at("population_gap").get<double>() == doctest::Approx(0.4).epsilon(1e-10));
  CHECK(fj.at("times").size() == 31);

  const auto rates = dephasing_rates(gen);
  const auto traj = evolve_analytic(irb::testing::qubit_state(0.5, 0.25), rates,
                                    irb::detail::linspace(0.0, 8.0, 801));
  const json vj = io::to_json(detect_threshold_crossing(traj, 0.05, rates));
  CHECK(vj.at("epsilon").get<double>() == doctest::Approx(0.05));
  CHECK(vj.at("t_cl_measured").is_number());
  CHECK(vj.at("gamma_min_used").get<double>() == doctest::Approx(0.7));

  MatrixX<double> n0 = MatrixX<double>::Zero(2, 2);
  n0(0, 1) = 0.1;
  n0(1, 0) = -0.1;
  VectorX<double> a0(2);
  a0 << 0.8, 0.2;
  const auto series = arrow_monotonicity_experiment(
      a0, n0, MatrixX<double>::Identity(2, 2).eval(), rates, 5, 0.1, 1.0);
  const json aj = io::to_json(series);
  CHECK(aj.at("values").size() == 6);
  CHECK(aj.at("hypothesis_ok").get<bool>());
}

TEST_CASE("scan CSV marks unreached thresholds") {
  EpsilonScanXd scan;
  scan.rows.push_back({0.05, 1.25, 2.0});
  scan.rows.push_back({0.005, std::nullopt, 3.0});
  const std::string csv = io::scan_csv(scan);
  CHECK(csv.rfind("epsilon,t_cl_measured,t_cl_bound,slope\n", 0) == 0);
  CHECK(csv.find("not_reached") != std::string::npos);
}

TEST_CASE("atomic write replaces the target in one step") {
  const fs::path path = temp_dir() / "atomic.txt";
  io::atomic_write(path, "first\n");
  io::atomic_write(path, "second\n");
  std::ifstream in(path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(content == "second\n");
  CHECK_FALSE(fs::exists(path.string() + ".tmp"));
}

TEST_CASE("file readers raise IoError on missing paths") {
  CHECK(throws_code([] { io::read_density_file("/nonexistent/state.json"); }, Errc::io_error));
}
