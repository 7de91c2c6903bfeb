#include "coherence/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "coherence/error.hpp"

namespace coherence::gaussian {

namespace {

using linalg::kMaxPermanentDim;

ComplexMatrix diagonal_real(const std::vector<double>& d) {
  ComplexMatrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

void check_stable_pairs(const SpectralDecomposition& decomp) {
  for (const Complex& li : decomp.eigenvalues)
    for (const Complex& lj : decomp.eigenvalues)
      if (li.real() + lj.real() <= 0.0)
        fail(ErrorCode::UnstableSystem,
             "Re(lambda_i + conj(lambda_j)) <= 0; no stationary state");
}

ComplexMatrix eigenbasis_kernel(const SpectralDecomposition& decomp,
                                const ComplexMatrix& w, double dt) {
  const std::size_t n = decomp.eigenvalues.size();
  ComplexMatrix g(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Complex li = decomp.eigenvalues[i];
      const Complex ljc = std::conj(decomp.eigenvalues[j]);
      // decay index follows the later time argument
      const Complex expo = (dt >= 0.0) ? std::exp(-li * dt) : std::exp(ljc * dt);
      g(i, j) = w(i, j) * expo / (li + ljc);
    }
  }
  return g;
}

Complex contract(const std::vector<Complex>& wu, const ComplexMatrix& c,
                 const std::vector<Complex>& wd) {
  Complex acc = 0.0;
  for (std::size_t m = 0; m < wu.size(); ++m) {
    if (wu[m] == Complex(0.0)) continue;
    Complex row = 0.0;
    for (std::size_t k = 0; k < wd.size(); ++k) row += c(m, k) * std::conj(wd[k]);
    acc += wu[m] * row;
  }
  return acc;
}

void validate_event(const FieldEvent& e, std::size_t dim) {
  if (e.weights.size() != dim)
    fail(ErrorCode::DimensionMismatch, "event weight vector length != mode count");
  bool nonzero = false;
  for (const Complex& w : e.weights) {
    if (!std::isfinite(w.real()) || !std::isfinite(w.imag()))
      fail(ErrorCode::InvalidArgument, "non-finite event weight");
    if (w != Complex(0.0)) nonzero = true;
  }
  if (!nonzero) fail(ErrorCode::InvalidArgument, "event weight vector is all zero");
  if (!std::isfinite(e.time)) fail(ErrorCode::InvalidArgument, "non-finite event time");
}

}  // namespace

ModeSystem ModeSystem::two_mode(double kappa1, double kappa2, double nbar1,
                                double nbar2, double g) {
  if (kappa1 <= 0.0 || kappa2 <= 0.0)
    fail(ErrorCode::UnstableSystem, "damping rates must be positive");
  if (nbar1 < 0.0 || nbar2 < 0.0)
    fail(ErrorCode::InvalidArgument, "thermal occupations must be nonnegative");
  ComplexMatrix drift{{Complex(kappa1 / 2.0, 0.0), Complex(0.0, g)},
                      {Complex(0.0, g), Complex(kappa2 / 2.0, 0.0)}};
  return make(std::move(drift), {nbar1 * kappa1, nbar2 * kappa2},
              {ModeKind::optical, ModeKind::matter});
}

ModeSystem ModeSystem::make(ComplexMatrix drift, std::vector<double> diffusion,
                            std::vector<ModeKind> kinds,
                            const std::optional<ComplexMatrix>& anomalous) {
  const std::size_t n = kinds.size();
  if (!drift.square() || drift.rows() != n)
    fail(ErrorCode::DimensionMismatch, "drift must be square with one row per mode");
  if (diffusion.size() != n)
    fail(ErrorCode::DimensionMismatch, "diffusion length != mode count");
  for (double d : diffusion)
    if (!(d >= 0.0)) fail(ErrorCode::InvalidArgument, "diffusion entries must be >= 0");
  if (!drift.all_finite()) fail(ErrorCode::InvalidArgument, "drift has non-finite entries");
  if (anomalous && anomalous->max_abs() > 0.0)
    fail(ErrorCode::UnsupportedAnomalousCoupling,
         "creation-creation couplings are outside the number-conserving engine");

  ModeSystem sys;
  sys.decomp_ = linalg::diagonalize(drift);
  for (const Complex& l : sys.decomp_.eigenvalues)
    if (l.real() <= 0.0)
      fail(ErrorCode::UnstableSystem, "drift eigenvalue with nonpositive real part");
  sys.drift_ = std::move(drift);
  sys.diffusion_ = std::move(diffusion);
  sys.kinds_ = std::move(kinds);
  sys.kernel_ = std::make_shared<TwoTimeKernel>(sys.decomp_, sys.diffusion_);
  return sys;
}

std::size_t ModeSystem::n_optical() const noexcept {
  return static_cast<std::size_t>(
      std::count(kinds_.begin(), kinds_.end(), ModeKind::optical));
}

std::size_t ModeSystem::n_matter() const noexcept { return dim() - n_optical(); }

TwoTimeKernel::TwoTimeKernel(SpectralDecomposition decomp, std::vector<double> diffusion)
    : decomp_(std::move(decomp)), diffusion_(std::move(diffusion)) {
  if (diffusion_.size() != decomp_.eigenvalues.size())
    fail(ErrorCode::DimensionMismatch, "diffusion length != decomposition dim");
  check_stable_pairs(decomp_);
  w_ = decomp_.inverse_vectors * diagonal_real(diffusion_) *
       decomp_.inverse_vectors.adjoint();
}

ComplexMatrix TwoTimeKernel::eigenbasis(double t, double s) const {
  return eigenbasis_kernel(decomp_, w_, t - s);
}

ComplexMatrix TwoTimeKernel::covariance(double t, double s) const {
  const double dt = t - s;
  {
    std::scoped_lock lock(mutex_);
    auto it = cache_.find(dt);
    if (it != cache_.end()) return it->second;
  }
  ComplexMatrix c = decomp_.vectors * eigenbasis_kernel(decomp_, w_, dt) *
                    decomp_.vectors.adjoint();
  std::scoped_lock lock(mutex_);
  return cache_.emplace(dt, std::move(c)).first->second;
}

ComplexMatrix greens_kernel(const SpectralDecomposition& decomp,
                            const std::vector<double>& diffusion, double t, double s) {
  if (diffusion.size() != decomp.eigenvalues.size())
    fail(ErrorCode::DimensionMismatch, "diffusion length != decomposition dim");
  for (double d : diffusion)
    if (!(d >= 0.0)) fail(ErrorCode::InvalidArgument, "diffusion entries must be >= 0");
  check_stable_pairs(decomp);
  const ComplexMatrix w = decomp.inverse_vectors * diagonal_real(diffusion) *
                          decomp.inverse_vectors.adjoint();
  return eigenbasis_kernel(decomp, w, t - s);
}

ComplexMatrix pair_covariance(const ModeSystem& sys, double t, double s) {
  return sys.kernel().covariance(t, s);
}

Complex wick_correlation(const ModeSystem& sys, const CorrelationSpec& spec) {
  const std::size_t dim = sys.dim();
  std::vector<std::size_t> daggered, undaggered;
  bool seen_undaggered = false;
  for (std::size_t i = 0; i < spec.events.size(); ++i) {
    const FieldEvent& e = spec.events[i];
    validate_event(e, dim);
    if (e.daggered) {
      if (seen_undaggered)
        fail(ErrorCode::NotNormallyOrdered,
             "daggered event after an undaggered one");
      daggered.push_back(i);
    } else {
      seen_undaggered = true;
      undaggered.push_back(i);
    }
  }
  // zero-mean number-conserving Gaussian state: unbalanced strings vanish
  if (daggered.size() != undaggered.size()) return Complex(0.0);
  const std::size_t n = daggered.size();
  if (n > kMaxPermanentDim)
    fail(ErrorCode::TooManyEvents, "more than 8 contraction pairs");
  if (n == 0) return Complex(1.0);

  const TwoTimeKernel& kernel = sys.kernel();
  ComplexMatrix k(n, n);
  for (std::size_t u = 0; u < n; ++u) {
    const FieldEvent& eu = spec.events[undaggered[u]];
    for (std::size_t d = 0; d < n; ++d) {
      const FieldEvent& ed = spec.events[daggered[d]];
      k(u, d) = contract(eu.weights, kernel.covariance(eu.time, ed.time), ed.weights);
    }
  }
  return linalg::permanent(k);
}

CorrelationSpec g3x_spec(const std::vector<Complex>& w_r1, const std::vector<Complex>& w_r2,
                         const std::vector<Complex>& w_r3, double t1, double t2,
                         double t3) {
  return CorrelationSpec{{{true, w_r1, t1},
                          {true, w_r2, t2},
                          {true, w_r3, t3},
                          {false, w_r3, t3},
                          {false, w_r2, t2},
                          {false, w_r1, t1}}};
}

CorrelationSpec g3y_spec(const std::vector<Complex>& w_r1, const std::vector<Complex>& w_r2,
                         const std::vector<Complex>& w_r3, double t1, double t2,
                         double t3) {
  // optical pair at t2 sits between the matter detections
  return CorrelationSpec{{{true, w_r1, t1},
                          {true, w_r3, t2},
                          {true, w_r2, t3},
                          {false, w_r2, t3},
                          {false, w_r3, t2},
                          {false, w_r1, t1}}};
}

Complex g3_x(const ModeSystem& sys, const std::vector<Complex>& w_r1,
             const std::vector<Complex>& w_r2, const std::vector<Complex>& w_r3,
             double t1, double t2, double t3) {
  return wick_correlation(sys, g3x_spec(w_r1, w_r2, w_r3, t1, t2, t3));
}

Complex g3_y(const ModeSystem& sys, const std::vector<Complex>& w_r1,
             const std::vector<Complex>& w_r2, const std::vector<Complex>& w_r3,
             double t1, double t2, double t3) {
  return wick_correlation(sys, g3y_spec(w_r1, w_r2, w_r3, t1, t2, t3));
}

G3Weights G3Weights::unit_two_mode() {
  return {{Complex(0.0), Complex(1.0)},
          {Complex(0.0), Complex(1.0)},
          {Complex(1.0), Complex(0.0)}};
}

double normalized_g3(G3Kind kind, const ModeSystem& sys, const G3Weights& weights,
                     double tau1, double tau2) {
  if (tau1 < 0.0 || tau2 < 0.0)
    fail(ErrorCode::InvalidArgument, "delays must be nonnegative");
  const Complex num =
      (kind == G3Kind::x)
          ? g3_x(sys, weights.matter_r1, weights.matter_r2, weights.optical_r3, 0.0,
                 tau2, tau1)
          : g3_y(sys, weights.matter_r1, weights.matter_r2, weights.optical_r3, 0.0,
                 tau2, tau1);

  const ComplexMatrix c0 = pair_covariance(sys, 0.0, 0.0);
  const double s1 = contract(weights.matter_r1, c0, weights.matter_r1).real();
  const double s2 = contract(weights.matter_r2, c0, weights.matter_r2).real();
  const double s3 = contract(weights.optical_r3, c0, weights.optical_r3).real();
  const Complex cross = contract(weights.optical_r3, c0, weights.matter_r2) *
                        contract(weights.matter_r2, c0, weights.optical_r3);
  const double deno = s1 * (s2 * s3 + cross.real());
  if (!(deno > std::numeric_limits<double>::min()))
    fail(ErrorCode::ZeroDenominator, "steady occupations underflow (vacuum system)");
  return num.real() / deno;
}

}  // namespace coherence::gaussian
