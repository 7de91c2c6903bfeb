// Command-line front end: parameter sweeps over the normalized third-order
// correlation surfaces, gating/term reports for time-gated detector plans,
// and the Gaussian-engine vs Fock-oracle cross check.
//
// All failures print a single machine-readable line "error: <Code>: <detail>"
// on stderr and exit with code 2 (invalid input / domain error) or 1
// (oracle-check tolerance breach).

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coherence/detection.hpp"
#include "coherence/error.hpp"
#include "coherence/fock.hpp"
#include "coherence/gaussian.hpp"

namespace {

using coherence::Error;
using coherence::ErrorCode;
using coherence::fail;
using json = nlohmann::json;
namespace gauss = coherence::gaussian;
namespace det = coherence::detection;
namespace fock = coherence::fock;

constexpr const char* kRunSchema = "coherence-run/1";
constexpr const char* kPlanSchema = "coherence-plan/1";

struct SweepAxis {
  double min = 0.0;
  double max = 10.0;
  int steps = 21;
};

struct RunConfig {
  double kappa1 = 0, kappa2 = 0, nbar1 = 0, nbar2 = 0, g = 0;
  gauss::G3Kind kind = gauss::G3Kind::x;
  SweepAxis tau1, tau2;
  fock::FockConfig oracle;
  std::string out;
};

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::InvalidArgument, "cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("JSON parse failure: ") + e.what());
  }
  return doc;
}

SweepAxis parse_axis(const json& j) {
  SweepAxis axis;
  axis.min = j.at("min").get<double>();
  axis.max = j.at("max").get<double>();
  axis.steps = j.at("steps").get<int>();
  if (axis.steps < 2) fail(ErrorCode::InvalidArgument, "sweep needs at least 2 steps");
  if (axis.max < axis.min) fail(ErrorCode::InvalidArgument, "sweep max below min");
  return axis;
}

RunConfig parse_run_config(const std::string& path) {
  const json doc = load_json(path);
  if (doc.value("schema", "") != kRunSchema)
    fail(ErrorCode::InvalidArgument,
         "config schema must be \"" + std::string(kRunSchema) + "\"");
  RunConfig cfg;
  const json& sys = doc.at("system");
  cfg.kappa1 = sys.at("kappa1").get<double>();
  cfg.kappa2 = sys.at("kappa2").get<double>();
  cfg.nbar1 = sys.at("nbar1").get<double>();
  cfg.nbar2 = sys.at("nbar2").get<double>();
  cfg.g = sys.at("g").get<double>();
  const std::string kind = doc.value("kind", "x");
  if (kind == "x")
    cfg.kind = gauss::G3Kind::x;
  else if (kind == "y")
    cfg.kind = gauss::G3Kind::y;
  else
    fail(ErrorCode::InvalidArgument, "kind must be \"x\" or \"y\"");
  if (doc.contains("sweep")) {
    cfg.tau1 = parse_axis(doc.at("sweep").at("tau1"));
    cfg.tau2 = parse_axis(doc.at("sweep").at("tau2"));
  }
  if (doc.contains("oracle")) {
    const json& oracle = doc.at("oracle");
    cfg.oracle.cutoff = oracle.value("cutoff", cfg.oracle.cutoff);
    cfg.oracle.tolerance = oracle.value("tolerance", cfg.oracle.tolerance);
    cfg.oracle.max_time = oracle.value("max_time", cfg.oracle.max_time);
  }
  cfg.out = doc.value("out", "");
  return cfg;
}

det::DetectionPlan parse_plan(const json& doc) {
  if (doc.value("schema", "") != kPlanSchema)
    fail(ErrorCode::InvalidArgument,
         "plan schema must be \"" + std::string(kPlanSchema) + "\"");
  det::DetectionPlan plan;
  for (const json& d : doc.at("detectors")) {
    det::DetectorSpec spec;
    spec.id = d.at("id").get<std::string>();
    const std::string kind = d.at("kind").get<std::string>();
    if (kind == "maxwell")
      spec.kind = det::DetectorKind::maxwell;
    else if (kind == "schrodinger")
      spec.kind = det::DetectorKind::schrodinger;
    else
      fail(ErrorCode::InvalidArgument, "detector kind must be maxwell|schrodinger");
    spec.position = d.at("position").get<std::string>();
    spec.gate_rank = d.at("gate_rank").get<int>();
    plan.detectors.push_back(std::move(spec));
  }
  return plan;
}

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("COHERENCE_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

std::string format_csv_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12e", v);
  return buf;
}

void write_output(const std::string& path, const std::string& body) {
  if (path.empty() || path == "-") {
    std::cout << body;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::InvalidArgument, "cannot open output file " + path);
  out << body;
  if (!out) fail(ErrorCode::InvalidArgument, "write failure on " + path);
}

gauss::ModeSystem build_system(const RunConfig& cfg) {
  return gauss::ModeSystem::two_mode(cfg.kappa1, cfg.kappa2, cfg.nbar1, cfg.nbar2,
                                     cfg.g);
}

int cmd_eig(const RunConfig& cfg, const std::string& out_path) {
  const gauss::ModeSystem sys = build_system(cfg);
  std::string body = "k,re,im\n";
  const auto& lambdas = sys.decomposition().eigenvalues;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    body += std::to_string(k) + "," + format_csv_value(lambdas[k].real()) + "," +
            format_csv_value(lambdas[k].imag()) + "\n";
  }
  write_output(out_path, body);
  return 0;
}

int cmd_covariance(const RunConfig& cfg, const std::string& out_path) {
  const gauss::ModeSystem sys = build_system(cfg);
  const auto c0 = gauss::pair_covariance(sys, 0.0, 0.0);
  std::string body = "i,j,re,im\n";
  for (std::size_t i = 0; i < c0.rows(); ++i)
    for (std::size_t j = 0; j < c0.cols(); ++j)
      body += std::to_string(i) + "," + std::to_string(j) + "," +
              format_csv_value(c0(i, j).real()) + "," +
              format_csv_value(c0(i, j).imag()) + "\n";
  write_output(out_path, body);
  return 0;
}

int cmd_g3(const RunConfig& cfg, const std::string& out_path, int threads) {
  const gauss::ModeSystem sys = build_system(cfg);
  const gauss::G3Weights weights = gauss::G3Weights::unit_two_mode();

  const int n1 = cfg.tau1.steps, n2 = cfg.tau2.steps;
  const auto axis_value = [](const SweepAxis& a, int i) {
    return a.min + (a.max - a.min) * i / (a.steps - 1);
  };
  const int total = n1 * n2;
  std::vector<double> results(total);
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const int n_threads = std::min(resolve_threads(threads), total);
  std::vector<std::thread> pool;
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      int idx;
      while ((idx = next.fetch_add(1)) < total && !failed.load()) {
        const double tau1 = axis_value(cfg.tau1, idx / n2);
        const double tau2 = axis_value(cfg.tau2, idx % n2);
        try {
          results[idx] = gauss::normalized_g3(cfg.kind, sys, weights, tau1, tau2);
        } catch (...) {
          std::scoped_lock lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          failed.store(true);
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  // rows gathered in grid order: deterministic bytes whatever the thread count
  std::string body = "tau1,tau2,g3\n";
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j)
      body += format_csv_value(axis_value(cfg.tau1, i)) + "," +
              format_csv_value(axis_value(cfg.tau2, j)) + "," +
              format_csv_value(results[i * n2 + j]) + "\n";
  write_output(out_path, body);
  return 0;
}

void print_terms(std::ostream& os, const std::vector<det::ContributionTerm>& terms) {
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const det::ContributionTerm& t = terms[i];
    os << "  [" << i + 1 << "] "
       << (t.cls == det::ContributionClass::fermion_cross ? "- " : "+ ");
    if (t.prefactor != 1) os << t.prefactor << " ";
    os << det::to_string(t.cls) << " ";
    for (const std::string& eff : t.efficiencies) os << eff << " ";
    os << "\n      " << t.ops.str() << "\n      counting-rate survivor: "
       << (t.survives_counting_rate ? "yes" : "no") << "\n";
  }
}

int cmd_gating(const std::string& plan_path, const std::string& out_path) {
  const json doc = load_json(plan_path);
  const det::DetectionPlan plan = parse_plan(doc);
  const bool distinguishable = doc.value("distinguishable", false);

  std::ostringstream os;
  int n_maxwell = 0, m_schrodinger = 0;
  for (const auto& d : plan.detectors)
    (d.kind == det::DetectorKind::maxwell ? n_maxwell : m_schrodinger) += 1;
  os << "detectors: " << plan.detectors.size() << " (maxwell: " << n_maxwell
     << ", schrodinger: " << m_schrodinger << "), "
     << (distinguishable ? "distinguishable" : "indistinguishable") << "\n";
  os << "selected ordering: " << det::select_ordering(plan).str() << "\n";
  os << "amplitude terms before gating: "
     << det::count_amplitude_terms(n_maxwell, m_schrodinger) << "\n";

  const auto terms = det::enumerate_contributions(plan, distinguishable);
  os << "contributions: " << terms.size() << "\n";
  print_terms(os, terms);
  const auto survivors = det::counting_rate_terms(plan, distinguishable);
  os << "counting-rate survivors: " << survivors.size() << " of " << terms.size()
     << "\n";
  write_output(out_path, os.str());
  return 0;
}

int cmd_terms(const std::string& plan_path, const std::string& out_path) {
  const json doc = load_json(plan_path);
  const det::DetectionPlan plan = parse_plan(doc);
  const bool distinguishable = doc.value("distinguishable", false);
  const auto terms = det::enumerate_contributions(plan, distinguishable);
  std::ostringstream os;
  os << "contributions: " << terms.size() << "\n";
  print_terms(os, terms);
  write_output(out_path, os.str());
  return 0;
}

int cmd_oracle_check(const RunConfig& cfg, int threads) {
  if (cfg.nbar1 > 0.2 || cfg.nbar2 > 0.2)
    fail(ErrorCode::InvalidArgument,
         "oracle cross-check is calibrated for nbar <= 0.2");
  const gauss::ModeSystem sys = build_system(cfg);
  const fock::TwoModeLindblad gen =
      fock::TwoModeLindblad::from_system(sys, cfg.oracle.cutoff);
  const fock::DensityMatrix rho = fock::steady_state(sys, cfg.oracle);

  const std::vector<coherence::linalg::Complex> wm{0.0, 1.0}, wo{1.0, 0.0};
  struct Row {
    char kind;
    double tau1, tau2, engine, oracle, rel;
  };
  // zero delay probes the equal-time thermal moments; the rest the dynamics
  const double points[4][2] = {{0.0, 0.0}, {1.0, 0.5}, {2.0, 1.0}, {5.0, 2.0}};
  std::vector<std::future<Row>> jobs;
  const int n_threads = resolve_threads(threads);
  (void)n_threads;  // jobs are light once the steady state exists
  for (char kind : {'x', 'y'}) {
    for (const auto& p : points) {
      jobs.push_back(std::async(std::launch::async, [&, kind, t1 = p[0], t2 = p[1]] {
        const auto spec = (kind == 'x')
                              ? gauss::g3x_spec(wm, wm, wo, 0.0, t2, t1)
                              : gauss::g3y_spec(wm, wm, wo, 0.0, t2, t1);
        Row row{kind, t1, t2, 0.0, 0.0, 0.0};
        row.engine = gauss::wick_correlation(sys, spec).real();
        row.oracle = fock::multitime_correlation(gen, rho, spec).real();
        row.rel = std::abs(row.engine - row.oracle) /
                  std::max(std::abs(row.oracle), 1e-300);
        return row;
      }));
    }
  }
  bool ok = true;
  std::printf("kind tau1 tau2 engine oracle rel_err\n");
  for (auto& job : jobs) {
    const Row row = job.get();
    ok = ok && row.rel <= 0.01;
    std::printf("%c %.6g %.6g %.12e %.12e %.3e\n", row.kind, row.tau1, row.tau2,
                row.engine, row.oracle, row.rel);
  }
  std::printf("RESULT: %s\n", ok ? "PASS (all points within 1%)"
                                 : "FAIL (tolerance breach)");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"steady-state optical/matter-wave coherence toolkit"};
  app.require_subcommand(1);

  std::string config_path, plan_path, out_path;
  int threads = 0;

  auto* eig = app.add_subcommand("eig", "drift-matrix eigenvalues as CSV");
  eig->add_option("--config", config_path, "run config JSON")->required();
  eig->add_option("--out", out_path, "output path (default stdout)");

  auto* cov = app.add_subcommand("covariance", "equal-time steady covariance as CSV");
  cov->add_option("--config", config_path, "run config JSON")->required();
  cov->add_option("--out", out_path, "output path (default stdout)");

  auto* g3 = app.add_subcommand("g3", "normalized third-order correlation sweep CSV");
  g3->add_option("--config", config_path, "run config JSON")->required();
  g3->add_option("--out", out_path, "output path (default stdout)");
  g3->add_option("--threads", threads, "worker threads (default: COHERENCE_THREADS or hw)");

  auto* gating = app.add_subcommand("gating", "ordering + contribution report for a plan");
  gating->add_option("--plan", plan_path, "detection plan JSON")->required();
  gating->add_option("--out", out_path, "output path (default stdout)");

  auto* terms = app.add_subcommand("terms", "contribution terms for a plan");
  terms->add_option("--plan", plan_path, "detection plan JSON")->required();
  terms->add_option("--out", out_path, "output path (default stdout)");

  auto* oracle = app.add_subcommand("oracle-check",
                                    "Gaussian engine vs truncated-Fock oracle table");
  oracle->add_option("--config", config_path, "run config JSON")->required();
  oracle->add_option("--threads", threads, "worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(eig)) return cmd_eig(parse_run_config(config_path), out_path);
    if (app.got_subcommand(cov))
      return cmd_covariance(parse_run_config(config_path), out_path);
    if (app.got_subcommand(g3)) {
      const RunConfig cfg = parse_run_config(config_path);
      // the config's own "out" names the sweep CSV; the flag overrides
      return cmd_g3(cfg, out_path.empty() ? cfg.out : out_path, threads);
    }
    if (app.got_subcommand(gating)) return cmd_gating(plan_path, out_path);
    if (app.got_subcommand(terms)) return cmd_terms(plan_path, out_path);
    if (app.got_subcommand(oracle))
      return cmd_oracle_check(parse_run_config(config_path), threads);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: InvalidArgument: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
