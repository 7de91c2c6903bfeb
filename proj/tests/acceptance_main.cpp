// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Criteria with stated runtime budgets enforce them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "coherence/detection.hpp"
#include "coherence/error.hpp"
#include "coherence/fock.hpp"
#include "coherence/gaussian.hpp"
#include "coherence/linalg.hpp"
#include "support.hpp"

using namespace coherence;
using namespace coherence::gaussian;
using linalg::Complex;
using linalg::ComplexMatrix;

namespace {

int failures = 0;

class Criterion {
 public:
  explicit Criterion(const char* name) : name_(name), start_(clock::now()) {}

  void expect(bool ok, const std::string& detail) {
    if (!ok) {
      ok_ = false;
      details_ += (details_.empty() ? "" : "; ") + detail;
    }
  }

  double seconds() const {
    return std::chrono::duration<double>(clock::now() - start_).count();
  }

  void finish(double budget_seconds = 0.0) {
    const double elapsed = seconds();
    if (budget_seconds > 0.0 && elapsed > budget_seconds) {
      ok_ = false;
      details_ += (details_.empty() ? "" : "; ") + std::string("runtime ") +
                  std::to_string(elapsed) + "s exceeds " +
                  std::to_string(budget_seconds) + "s";
    }
    std::printf("[%s] %s (%.2fs)%s%s\n", ok_ ? "PASS" : "FAIL", name_, elapsed,
                details_.empty() ? "" : " -- ", details_.c_str());
    if (!ok_) ++failures;
  }

 private:
  using clock = std::chrono::steady_clock;
  const char* name_;
  clock::time_point start_;
  bool ok_ = true;
  std::string details_;
};

ModeSystem reference_system() { return ModeSystem::two_mode(0.15, 0.25, 0.01, 0.1, 1.0); }

const std::vector<Complex> kMatter{Complex(0.0), Complex(1.0)};
const std::vector<Complex> kOptical{Complex(1.0), Complex(0.0)};

ComplexMatrix diffusion_matrix(const ModeSystem& sys) {
  ComplexMatrix d(sys.dim(), sys.dim());
  for (std::size_t i = 0; i < sys.dim(); ++i) d(i, i) = sys.diffusion()[i];
  return d;
}

void criterion_lyapunov() {
  Criterion c("1 Lyapunov stationarity, 100 random stable systems dims 2-8");
  std::mt19937 rng(8181);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + rep % 7;
    const ModeSystem sys = testsupport::random_stable_system(rng, n);
    const ComplexMatrix c0 = pair_covariance(sys, 0.0, 0.0);
    const ComplexMatrix d = diffusion_matrix(sys);
    const double residual = linalg::lyapunov_residual(sys.drift(), c0, d);
    c.expect(residual <= 1e-10 * d.max_abs(),
             "residual " + std::to_string(residual) + " at dim " + std::to_string(n));
  }
  c.finish(5.0);
}

void criterion_eigenvalues() {
  Criterion c("2 drift eigenvalues of the reference system");
  // closed-form roots of l^2 - (k1/2 + k2/2) l + k1 k2 / 4 + g^2
  const double re = 0.1;
  const double im = std::sqrt(0.075 * 0.125 + 1.0 - re * re);
  const auto dec = reference_system().decomposition();
  c.expect(std::abs(dec.eigenvalues[0] - Complex(re, -im)) <= 1e-9,
           "lambda_0 off closed form");
  c.expect(std::abs(dec.eigenvalues[1] - Complex(re, im)) <= 1e-9,
           "lambda_1 off closed form");
  c.finish();
}

void criterion_wick_vs_enumeration() {
  Criterion c("3 Wick correlation equals the n!-term pairing sum, n <= 4");
  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> time(0.0, 3.0), mag(0.4, 1.2),
      phase(0.0, 6.283185307);
  std::uniform_int_distribution<int> pairs(1, 4);
  for (int rep = 0; rep < 60; ++rep) {
    const ModeSystem sys = testsupport::random_stable_system(rng, 2 + rep % 3);
    const int n = pairs(rng);
    CorrelationSpec spec;
    const auto weights = [&] {
      std::vector<Complex> w(sys.dim());
      for (Complex& z : w) z = std::polar(mag(rng), phase(rng));
      return w;
    };
    for (int i = 0; i < n; ++i) spec.events.push_back({true, weights(), time(rng)});
    for (int i = 0; i < n; ++i) spec.events.push_back({false, weights(), time(rng)});

    const Complex engine = wick_correlation(sys, spec);

    // independent pairing-sum oracle over the contraction matrix
    ComplexMatrix k(n, n);
    for (int u = 0; u < n; ++u)
      for (int d = 0; d < n; ++d) {
        const FieldEvent& eu = spec.events[n + u];
        const FieldEvent& ed = spec.events[d];
        const ComplexMatrix cov = pair_covariance(sys, eu.time, ed.time);
        Complex acc = 0.0;
        for (std::size_t p = 0; p < sys.dim(); ++p)
          for (std::size_t q = 0; q < sys.dim(); ++q)
            acc += eu.weights[p] * cov(p, q) * std::conj(ed.weights[q]);
        k(u, d) = acc;
      }
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Complex sum = 0.0;
    do {
      Complex prod = 1.0;
      for (int i = 0; i < n; ++i) prod *= k(i, perm[i]);
      sum += prod;
    } while (std::next_permutation(perm.begin(), perm.end()));

    c.expect(std::abs(engine - sum) <= 1e-12 * std::max(1.0, std::abs(sum)),
             "mismatch at rep " + std::to_string(rep));
  }
  c.finish(5.0);
}

void criterion_oracle_equivalence() {
  Criterion c("4 Gaussian engine vs truncated-Fock regression oracle, 1%");
  try {
    const ModeSystem sys = reference_system();
    const fock::FockConfig cfg{10, 1e-9, 200.0};
    const fock::TwoModeLindblad gen = fock::TwoModeLindblad::from_system(sys, cfg.cutoff);
    const fock::DensityMatrix rho = fock::steady_state(sys, cfg);

    const double points[4][2] = {{0.5, 0.25}, {1.0, 0.5}, {2.0, 1.0}, {5.0, 2.0}};
    struct Job {
      char kind;
      double tau1, tau2;
      std::future<std::pair<double, double>> result;
    };
    std::vector<Job> jobs;
    for (char kind : {'x', 'y'})
      for (const auto& p : points) {
        jobs.push_back({kind, p[0], p[1],
                        std::async(std::launch::async, [&, kind, t1 = p[0], t2 = p[1]] {
                          const auto spec =
                              (kind == 'x') ? g3x_spec(kMatter, kMatter, kOptical, 0.0, t2, t1)
                                            : g3y_spec(kMatter, kMatter, kOptical, 0.0, t2, t1);
                          const double engine = wick_correlation(sys, spec).real();
                          const double oracle =
                              fock::multitime_correlation(gen, rho, spec).real();
                          return std::make_pair(engine, oracle);
                        })});
      }
    for (Job& job : jobs) {
      const auto [engine, oracle] = job.result.get();
      const double rel = std::abs(engine - oracle) / std::abs(oracle);
      c.expect(rel <= 0.01, std::string(1, job.kind) + " (" + std::to_string(job.tau1) +
                                "," + std::to_string(job.tau2) + ") rel " +
                                std::to_string(rel));
    }
  } catch (const std::exception& e) {
    c.expect(false, e.what());
  }
  c.finish(120.0);
}

void criterion_surface_shape() {
  Criterion c("5 bunching shape, diagonal equality, large-delay limit");
  const ModeSystem sys = reference_system();
  const G3Weights w = G3Weights::unit_two_mode();

  // 21x21 grid over [0, 10]^2
  std::vector<std::vector<double>> grid(21, std::vector<double>(21));
  for (int i = 0; i < 21; ++i)
    for (int j = 0; j < 21; ++j)
      grid[i][j] = normalized_g3(G3Kind::x, sys, w, 10.0 * i / 20, 10.0 * j / 20);

  for (int i : {2, 4, 10}) {  // tau1 = 1, 2, 5
    c.expect(grid[i][0] > grid[i][20],
             "no bunching at tau1 = " + std::to_string(10.0 * i / 20));
  }
  for (double tau : {0.0, 1.0, 2.0, 5.0, 10.0}) {
    const double dx = normalized_g3(G3Kind::x, sys, w, tau, tau);
    const double dy = normalized_g3(G3Kind::y, sys, w, tau, tau);
    c.expect(std::abs(dx - dy) <= 1e-9,
             "x/y diagonal mismatch at tau " + std::to_string(tau));
  }
  for (G3Kind kind : {G3Kind::x, G3Kind::y}) {
    const double far = normalized_g3(kind, sys, w, 50.0, 50.0);
    c.expect(std::abs(far - 1.0) <= 1e-3,
             "far-field value " + std::to_string(far));
  }
  c.finish();
}

void criterion_gating_golden() {
  Criterion c("6 gating golden strings and (N+M)! distinct orderings");
  using namespace coherence::detection;
  const auto plan = [](int r1, int r2, int r3, int r4) {
    return DetectionPlan{{{"1", DetectorKind::maxwell, "r1", r1},
                          {"2", DetectorKind::maxwell, "r2", r2},
                          {"3", DetectorKind::schrodinger, "r3", r3},
                          {"4", DetectorKind::schrodinger, "r4", r4}}};
  };
  c.expect(select_ordering(plan(1, 2, 3, 4)).str() ==
               "E-[r1@t1] E-[r2@t2] Psi+[r3@t3] Psi+[r4@t4] "
               "Psi[r4@t4] Psi[r3@t3] E+[r2@t2] E+[r1@t1]",
           "direct ordering string");
  c.expect(select_ordering(plan(2, 4, 1, 3)).str() ==
               "Psi+[r3@t3] E-[r1@t1] Psi+[r4@t4] E-[r2@t2] "
               "E+[r2@t2] Psi[r4@t4] E+[r1@t1] Psi[r3@t3]",
           "interleaved ordering string");

  std::set<std::string> distinct;
  int ranks[4] = {1, 2, 3, 4};
  do {
    distinct.insert(select_ordering(plan(ranks[0], ranks[1], ranks[2], ranks[3])).str());
  } while (std::next_permutation(ranks, ranks + 4));
  c.expect(distinct.size() == 24, "expected 24 distinct strings");
  c.expect(count_amplitude_terms(2, 2) == 24, "(2+2)! = 24");
  c.finish();
}

void criterion_exchange_structure() {
  Criterion c("7 exchange-term classes and counting-rate filtering");
  using namespace coherence::detection;
  const DetectionPlan plan{{{"1", DetectorKind::maxwell, "r1", 1},
                            {"2", DetectorKind::maxwell, "r2", 2},
                            {"3", DetectorKind::schrodinger, "r3", 3},
                            {"4", DetectorKind::schrodinger, "r4", 4}}};
  const auto indist = enumerate_contributions(plan, false);
  c.expect(indist.size() == 3, "expected 3 contributions");
  c.expect(indist.size() == 3 && indist[0].cls == ContributionClass::direct &&
               indist[1].cls == ContributionClass::boson_exchange &&
               indist[2].cls == ContributionClass::fermion_cross,
           "class triple");
  const auto raters = counting_rate_terms(plan, false);
  c.expect(raters.size() == 2, "counting rate should keep 2 terms");
  c.expect(!raters.empty() && raters[0].cls == ContributionClass::direct &&
               raters.size() == 2 && raters[1].cls == ContributionClass::boson_exchange,
           "fermionic term must drop out of the counting rate");
  const auto dist = enumerate_contributions(plan, true);
  c.expect(dist.size() == 1 && dist[0].cls == ContributionClass::direct,
           "distinguishable plan keeps only direct");
  c.finish();
}

void criterion_fermionic_wick() {
  Criterion c("8 fermionic vacuum expectation of a1 a2 a3+ a4+");
  using namespace coherence::detection;
  const FermiOpString s{{{false, "q1", "s1", ""},
                         {false, "q2", "s2", ""},
                         {true, "q3", "s3", ""},
                         {true, "q4", "s4", ""}}};
  auto terms = fermi_vacuum_expectation(s);
  c.expect(terms.size() == 2, "expected two signed terms");
  const auto canonical = [](SignedDeltaProduct t) {
    std::sort(t.deltas.begin(), t.deltas.end(), [](const LabelDelta& a, const LabelDelta& b) {
      return std::tie(a.slot, a.left, a.right) < std::tie(b.slot, b.left, b.right);
    });
    return t;
  };
  SignedDeltaProduct plus{1, {{"q", "q1", "q4"}, {"s", "s1", "s4"},
                              {"q", "q2", "q3"}, {"s", "s2", "s3"}}};
  SignedDeltaProduct minus{-1, {{"q", "q1", "q3"}, {"s", "s1", "s3"},
                                {"q", "q2", "q4"}, {"s", "s2", "s4"}}};
  int found_plus = 0, found_minus = 0;
  for (const auto& t : terms) {
    if (canonical(t) == canonical(plus)) ++found_plus;
    if (canonical(t) == canonical(minus)) ++found_minus;
  }
  c.expect(found_plus == 1, "nested contraction must appear with sign +");
  c.expect(found_minus == 1, "crossed contraction must appear with sign -");
  c.finish();
}

void criterion_vacuum() {
  Criterion c("9 vacuum reservoirs annihilate every normally ordered correlator");
  const ModeSystem vac = ModeSystem::two_mode(0.15, 0.25, 0.0, 0.0, 1.0);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> time(0.0, 2.0), mag(0.4, 1.2),
      phase(0.0, 6.283185307);
  const auto weights = [&] {
    return std::vector<Complex>{std::polar(mag(rng), phase(rng)),
                                std::polar(mag(rng), phase(rng))};
  };
  // engine: assorted strings, including the third-order patterns
  for (int rep = 0; rep < 10; ++rep) {
    CorrelationSpec spec;
    const int n = 1 + rep % 3;
    std::vector<double> times(n);
    times[0] = time(rng) * 0.2;
    for (int i = 1; i < n; ++i) times[i] = times[i - 1] + time(rng);
    spec.events.resize(2 * n);
    for (int i = 0; i < n; ++i) {
      spec.events[i] = {true, weights(), times[i]};
      spec.events[2 * n - 1 - i] = {false, weights(), times[i]};
    }
    c.expect(std::abs(wick_correlation(vac, spec)) <= 1e-12, "engine nonzero on vacuum");
  }
  c.expect(std::abs(g3_x(vac, kMatter, kMatter, kOptical, 0.0, 0.5, 1.0)) <= 1e-12,
           "g3_x nonzero on vacuum");

  try {
    const fock::FockConfig cfg{6, 1e-10, 300.0};
    const fock::TwoModeLindblad gen = fock::TwoModeLindblad::from_system(vac, cfg.cutoff);
    const fock::DensityMatrix rho = fock::steady_state(vac, cfg);
    const auto spec = g3x_spec(kMatter, kMatter, kOptical, 0.0, 0.5, 1.0);
    c.expect(std::abs(fock::multitime_correlation(gen, rho, spec)) <= 1e-12,
             "oracle nonzero on vacuum");
    const CorrelationSpec pair{{{true, kMatter, 0.0}, {false, kMatter, 0.0}}};
    c.expect(std::abs(fock::multitime_correlation(gen, rho, pair)) <= 1e-12,
             "oracle occupation nonzero on vacuum");
  } catch (const std::exception& e) {
    c.expect(false, e.what());
  }
  c.finish();
}

}  // namespace

int main() {
  criterion_lyapunov();
  criterion_eigenvalues();
  criterion_wick_vs_enumeration();
  criterion_oracle_equivalence();
  criterion_surface_shape();
  criterion_gating_golden();
  criterion_exchange_structure();
  criterion_fermionic_wick();
  criterion_vacuum();
  if (failures == 0) {
    std::printf("ACCEPTANCE: all criteria passed\n");
  } else {
    std::printf("ACCEPTANCE: %d criteria failed\n", failures);
  }
  return failures == 0 ? 0 : 1;
}
