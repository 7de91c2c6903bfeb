#include "coherence/fock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coherence/error.hpp"

namespace coherence::fock {

namespace {

constexpr double kTaylorCutoff = 1e-16;

// Cholesky feasibility of m + shift*I, tolerating tiny negative pivots.
bool cholesky_feasible(const ComplexMatrix& m, double shift) {
  const std::size_t n = m.rows();
  ComplexMatrix a = m;
  for (std::size_t i = 0; i < n; ++i) a(i, i) += shift;
  const double floor = -16.0 * std::numeric_limits<double>::epsilon() *
                       std::max(a.max_abs(), 1.0);
  std::vector<std::vector<Complex>> l(n, std::vector<Complex>(n));
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j).real();
    for (std::size_t k = 0; k < j; ++k) diag -= std::norm(l[j][k]);
    if (diag < floor) return false;
    diag = std::max(diag, 0.0);
    const double ljj = std::sqrt(diag);
    l[j][j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      Complex acc = a(i, j);
      for (std::size_t k = 0; k < j; ++k) acc -= l[i][k] * std::conj(l[j][k]);
      l[i][j] = (ljj > 0.0) ? acc / ljj : Complex(0.0);
    }
  }
  return true;
}

}  // namespace

Complex DensityMatrix::trace() const {
  Complex acc = 0.0;
  for (std::size_t i = 0; i < mat.rows(); ++i) acc += mat(i, i);
  return acc;
}

double DensityMatrix::hermiticity_error() const {
  return (mat - mat.adjoint()).max_abs();
}

bool DensityMatrix::positive_semidefinite(double tol) const {
  return cholesky_feasible(mat, tol);
}

double DensityMatrix::edge_population() const {
  double pop = 0.0;
  for (int i1 = 0; i1 < cutoff1; ++i1)
    for (int i2 = 0; i2 < cutoff2; ++i2)
      if (i1 == cutoff1 - 1 || i2 == cutoff2 - 1)
        pop += mat(i1 * cutoff2 + i2, i1 * cutoff2 + i2).real();
  return pop;
}

double DensityMatrix::occupation(int mode) const {
  double acc = 0.0;
  for (int i1 = 0; i1 < cutoff1; ++i1)
    for (int i2 = 0; i2 < cutoff2; ++i2)
      acc += (mode == 0 ? i1 : i2) * mat(i1 * cutoff2 + i2, i1 * cutoff2 + i2).real();
  return acc;
}

TwoModeLindblad::TwoModeLindblad(double kappa1, double kappa2, double nbar1,
                                 double nbar2, double g, int cutoff1, int cutoff2)
    : n1_(cutoff1), n2_(cutoff2), kappa1_(kappa1), kappa2_(kappa2), nbar1_(nbar1),
      nbar2_(nbar2), g_(g) {
  if (cutoff1 < 2 || cutoff2 < 2)
    fail(ErrorCode::InvalidArgument, "cutoff must be at least 2 per mode");
  if (kappa1 <= 0.0 || kappa2 <= 0.0)
    fail(ErrorCode::InvalidArgument, "damping rates must be positive");
  if (nbar1 < 0.0 || nbar2 < 0.0)
    fail(ErrorCode::InvalidArgument, "thermal occupations must be nonnegative");
  sr1_.resize(n1_ + 1);
  sr2_.resize(n2_ + 1);
  for (int k = 0; k <= n1_; ++k) sr1_[k] = std::sqrt(double(k));
  for (int k = 0; k <= n2_; ++k) sr2_[k] = std::sqrt(double(k));
  // crude generator norm bound -> Taylor step with |h L| ~ 2.5
  const double hnorm = 2.0 * std::abs(g_) * std::sqrt(double(n1_) * n2_);
  const double diss = kappa1_ * ((nbar1_ + 1) * 2 * n1_ + nbar1_ * 2 * (n1_ + 1)) +
                      kappa2_ * ((nbar2_ + 1) * 2 * n2_ + nbar2_ * 2 * (n2_ + 1));
  step_ = 2.5 / (2.0 * hnorm + diss + 1.0);
}

TwoModeLindblad TwoModeLindblad::from_system(const gaussian::ModeSystem& sys,
                                             int cutoff) {
  if (sys.dim() != 2)
    fail(ErrorCode::InvalidArgument, "oracle handles two-mode systems only");
  const ComplexMatrix& m = sys.drift();
  const double tiny = 1e-12 * std::max(m.max_abs(), 1.0);
  if (std::abs(m(0, 0).imag()) > tiny || std::abs(m(1, 1).imag()) > tiny ||
      std::abs(m(0, 1) - m(1, 0)) > tiny || std::abs(m(0, 1).real()) > tiny)
    fail(ErrorCode::InvalidArgument,
         "drift is not the damped beam-splitter form [[k1/2, ig], [ig, k2/2]]");
  const double kappa1 = 2.0 * m(0, 0).real();
  const double kappa2 = 2.0 * m(1, 1).real();
  if (kappa1 <= 0.0 || kappa2 <= 0.0)
    fail(ErrorCode::InvalidArgument, "both modes need positive damping");
  const double g = m(0, 1).imag();
  const double nbar1 = sys.diffusion()[0] / kappa1;
  const double nbar2 = sys.diffusion()[1] / kappa2;
  return TwoModeLindblad(kappa1, kappa2, nbar1, nbar2, g, cutoff, cutoff);
}

void TwoModeLindblad::apply(const ComplexMatrix& rho, ComplexMatrix& out) const {
  const int n1 = n1_, n2 = n2_;
  const std::size_t d = dim();
  if (out.rows() != d || out.cols() != d) out = ComplexMatrix(d, d);
  const Complex* r = rho.data();
  Complex* o = out.data();
  const auto at = [&](int r1, int r2, int c1, int c2) -> const Complex& {
    return r[(static_cast<std::size_t>(r1) * n2 + r2) * d + (static_cast<std::size_t>(c1) * n2 + c2)];
  };
  const double g = g_;
  const double down1 = kappa1_ * (nbar1_ + 1.0), up1 = kappa1_ * nbar1_;
  const double down2 = kappa2_ * (nbar2_ + 1.0), up2 = kappa2_ * nbar2_;
  std::size_t idx = 0;
  for (int r1 = 0; r1 < n1; ++r1)
    for (int r2 = 0; r2 < n2; ++r2)
      for (int c1 = 0; c1 < n1; ++c1)
        for (int c2 = 0; c2 < n2; ++c2, ++idx) {
          Complex acc(0.0, 0.0);
          // -i (H rho - rho H), H = g (a^dag c + c^dag a)
          Complex comm(0.0, 0.0);
          if (r1 >= 1 && r2 + 1 < n2) comm += sr1_[r1] * sr2_[r2 + 1] * at(r1 - 1, r2 + 1, c1, c2);
          if (r2 >= 1 && r1 + 1 < n1) comm += sr2_[r2] * sr1_[r1 + 1] * at(r1 + 1, r2 - 1, c1, c2);
          if (c1 >= 1 && c2 + 1 < n2) comm -= sr1_[c1] * sr2_[c2 + 1] * at(r1, r2, c1 - 1, c2 + 1);
          if (c2 >= 1 && c1 + 1 < n1) comm -= sr2_[c2] * sr1_[c1 + 1] * at(r1, r2, c1 + 1, c2 - 1);
          acc += Complex(0.0, -g) * comm;
          // mode 1 damping / pumping; the raising channel uses the truncated
          // operator throughout so the generator stays trace preserving
          if (r1 + 1 < n1 && c1 + 1 < n1)
            acc += down1 * sr1_[r1 + 1] * sr1_[c1 + 1] * at(r1 + 1, r2, c1 + 1, c2);
          acc -= 0.5 * down1 * double(r1 + c1) * at(r1, r2, c1, c2);
          if (up1 > 0.0) {
            if (r1 >= 1 && c1 >= 1)
              acc += up1 * sr1_[r1] * sr1_[c1] * at(r1 - 1, r2, c1 - 1, c2);
            const double raised = (r1 + 1 < n1 ? r1 + 1 : 0) + (c1 + 1 < n1 ? c1 + 1 : 0);
            acc -= 0.5 * up1 * raised * at(r1, r2, c1, c2);
          }
          // mode 2 damping / pumping
          if (r2 + 1 < n2 && c2 + 1 < n2)
            acc += down2 * sr2_[r2 + 1] * sr2_[c2 + 1] * at(r1, r2 + 1, c1, c2 + 1);
          acc -= 0.5 * down2 * double(r2 + c2) * at(r1, r2, c1, c2);
          if (up2 > 0.0) {
            if (r2 >= 1 && c2 >= 1)
              acc += up2 * sr2_[r2] * sr2_[c2] * at(r1, r2 - 1, c1, c2 - 1);
            const double raised = (r2 + 1 < n2 ? r2 + 1 : 0) + (c2 + 1 < n2 ? c2 + 1 : 0);
            acc -= 0.5 * up2 * raised * at(r1, r2, c1, c2);
          }
          o[idx] = acc;
        }
}

void TwoModeLindblad::propagate(ComplexMatrix& rho, double duration) const {
  if (duration <= 0.0) return;
  const std::size_t d = dim();
  ComplexMatrix term(d, d), next(d, d);
  double remaining = duration;
  while (remaining > 0.0) {
    const double h = std::min(step_, remaining);
    remaining -= h;
    term = rho;
    const double scale = std::max(rho.max_abs(), 1e-300);
    for (int k = 1; k <= 64; ++k) {
      apply(term, next);
      next *= Complex(h / k, 0.0);
      std::swap(term, next);
      rho += term;
      if (term.max_abs() < kTaylorCutoff * scale) break;
    }
  }
}

double TwoModeLindblad::residual(const ComplexMatrix& rho) const {
  ComplexMatrix out;
  apply(rho, out);
  return out.max_abs();
}

ComplexMatrix TwoModeLindblad::thermal_product() const {
  std::vector<double> p1(n1_), p2(n2_);
  const auto fill = [](std::vector<double>& p, double nbar) {
    const double q = nbar / (1.0 + nbar);
    double w = 1.0 / (1.0 + nbar), norm = 0.0;
    for (double& v : p) {
      v = w;
      norm += w;
      w *= q;
    }
    for (double& v : p) v /= norm;
  };
  fill(p1, nbar1_);
  fill(p2, nbar2_);
  ComplexMatrix rho(dim(), dim());
  for (int i1 = 0; i1 < n1_; ++i1)
    for (int i2 = 0; i2 < n2_; ++i2) {
      const std::size_t i = static_cast<std::size_t>(i1) * n2_ + i2;
      rho(i, i) = p1[i1] * p2[i2];
    }
  return rho;
}

ComplexMatrix TwoModeLindblad::annihilate_left(const std::vector<Complex>& w,
                                               const ComplexMatrix& rho) const {
  const std::size_t d = dim();
  ComplexMatrix out(d, d);
  for (int r1 = 0; r1 < n1_; ++r1)
    for (int r2 = 0; r2 < n2_; ++r2) {
      const std::size_t row = static_cast<std::size_t>(r1) * n2_ + r2;
      for (std::size_t c = 0; c < d; ++c) {
        Complex acc(0.0, 0.0);
        if (w[0] != Complex(0.0) && r1 + 1 < n1_)
          acc += w[0] * sr1_[r1 + 1] * rho((static_cast<std::size_t>(r1) + 1) * n2_ + r2, c);
        if (w[1] != Complex(0.0) && r2 + 1 < n2_)
          acc += w[1] * sr2_[r2 + 1] * rho(row + 1, c);
        out(row, c) = acc;
      }
    }
  return out;
}

ComplexMatrix TwoModeLindblad::create_right(const std::vector<Complex>& w,
                                            const ComplexMatrix& rho) const {
  const std::size_t d = dim();
  ComplexMatrix out(d, d);
  for (std::size_t r = 0; r < d; ++r)
    for (int c1 = 0; c1 < n1_; ++c1)
      for (int c2 = 0; c2 < n2_; ++c2) {
        const std::size_t col = static_cast<std::size_t>(c1) * n2_ + c2;
        Complex acc(0.0, 0.0);
        if (w[0] != Complex(0.0) && c1 + 1 < n1_)
          acc += std::conj(w[0]) * sr1_[c1 + 1] * rho(r, (static_cast<std::size_t>(c1) + 1) * n2_ + c2);
        if (w[1] != Complex(0.0) && c2 + 1 < n2_)
          acc += std::conj(w[1]) * sr2_[c2 + 1] * rho(r, col + 1);
        out(r, col) = acc;
      }
  return out;
}

Complex TwoModeLindblad::pair_expectation(const std::vector<Complex>& wd,
                                          const std::vector<Complex>& wu,
                                          const ComplexMatrix& rho) const {
  // Tr[A_d^dag A_u rho] with A = w0 a + w1 c
  const ComplexMatrix lowered = annihilate_left(wu, rho);
  Complex acc(0.0, 0.0);
  for (int r1 = 0; r1 < n1_; ++r1)
    for (int r2 = 0; r2 < n2_; ++r2) {
      const std::size_t row = static_cast<std::size_t>(r1) * n2_ + r2;
      // (A_d^dag X)(row, row) pulls X one rung down in the row index
      if (wd[0] != Complex(0.0) && r1 >= 1)
        acc += std::conj(wd[0]) * sr1_[r1] * lowered((static_cast<std::size_t>(r1) - 1) * n2_ + r2, row);
      if (wd[1] != Complex(0.0) && r2 >= 1)
        acc += std::conj(wd[1]) * sr2_[r2] * lowered(row - 1, row);
    }
  return acc;
}

DensityMatrix steady_state(const gaussian::ModeSystem& sys, const FockConfig& cfg) {
  if (cfg.tolerance <= 0.0) fail(ErrorCode::InvalidArgument, "tolerance must be positive");
  const TwoModeLindblad gen = TwoModeLindblad::from_system(sys, cfg.cutoff);
  DensityMatrix state;
  state.cutoff1 = gen.cutoff1();
  state.cutoff2 = gen.cutoff2();
  state.mat = gen.thermal_product();

  const double chunk = 10.0;
  double elapsed = 0.0;
  double res = gen.residual(state.mat);
  while (res > cfg.tolerance) {
    if (elapsed >= cfg.max_time)
      fail(ErrorCode::NotConverged,
           "residual " + std::to_string(res) + " after t = " + std::to_string(elapsed));
    gen.propagate(state.mat, chunk);
    elapsed += chunk;
    res = gen.residual(state.mat);
  }
  if (state.edge_population() > cfg.tolerance)
    fail(ErrorCode::CutoffTooSmall,
         "top Fock layer holds " + std::to_string(state.edge_population()));
  return state;
}

Complex multitime_correlation(const gaussian::ModeSystem& sys, const FockConfig& cfg,
                              const gaussian::CorrelationSpec& spec) {
  const TwoModeLindblad gen = TwoModeLindblad::from_system(sys, cfg.cutoff);
  return multitime_correlation(gen, steady_state(sys, cfg), spec);
}

Complex multitime_correlation(const TwoModeLindblad& lindblad,
                              const DensityMatrix& steady,
                              const gaussian::CorrelationSpec& spec) {
  const std::size_t count = spec.events.size();
  if (count == 0 || count % 2 != 0)
    fail(ErrorCode::UnsupportedSpec, "event count must be even and positive");
  const std::size_t n = count / 2;
  if (n > 3) fail(ErrorCode::TooManyEvents, "regression oracle capped at 3 pairs");
  for (std::size_t i = 0; i < count; ++i) {
    const auto& e = spec.events[i];
    if (e.weights.size() != 2)
      fail(ErrorCode::DimensionMismatch, "oracle events need two-mode weights");
    if (e.daggered != (i < n))
      fail(ErrorCode::NotNormallyOrdered,
           "expected daggered half followed by undaggered half");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& outer = spec.events[i];
    const auto& mirror = spec.events[count - 1 - i];
    if (outer.time != mirror.time)
      fail(ErrorCode::UnsupportedSpec, "pair times must mirror outside-in");
    if (i + 1 < n && spec.events[i + 1].time < outer.time)
      fail(ErrorCode::UnsupportedSpec, "pair times must increase toward the center");
  }

  // regression sweep: sandwich, evolve to the next pair time, repeat
  ComplexMatrix rho = steady.mat;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    rho = lindblad.annihilate_left(spec.events[count - 1 - i].weights, rho);
    rho = lindblad.create_right(spec.events[i].weights, rho);
    lindblad.propagate(rho, spec.events[i + 1].time - spec.events[i].time);
  }
  return lindblad.pair_expectation(spec.events[n - 1].weights, spec.events[n].weights,
                                   rho);
}

}  // namespace coherence::fock
