#pragma once

#include <vector>

#include "coherence/gaussian.hpp"
#include "coherence/linalg.hpp"

namespace coherence::fock {

using linalg::Complex;
using linalg::ComplexMatrix;

/// Truncation and convergence knobs for the brute-force path.
struct FockConfig {
  int cutoff = 10;          // Fock levels per mode
  double tolerance = 1e-9;  // residual |L[rho]|_max target; also the edge-population gate
  double max_time = 200.0;  // give up (NotConverged) beyond this horizon
};

/// Two-mode density operator on the truncated product basis |n1, n2>,
/// flat index n1 * cutoff2 + n2.
struct DensityMatrix {
  int cutoff1 = 0;
  int cutoff2 = 0;
  ComplexMatrix mat;

  std::size_t dim() const noexcept { return mat.rows(); }
  Complex trace() const;
  double hermiticity_error() const;
  /// True when all eigenvalues are >= -tol (checked by shifted Cholesky).
  bool positive_semidefinite(double tol = 1e-9) const;
  /// Population of the highest Fock layer of either mode.
  double edge_population() const;
  /// <b_mode^dag b_mode>.
  double occupation(int mode) const;
};

/// Lindblad generator of the damped beam-splitter pair on the truncated basis:
/// H = g (a^dag c + c^dag a), downward rates kappa_k (nbar_k + 1), upward
/// kappa_k nbar_k. Deliberately independent of the Gaussian engine internals.
class TwoModeLindblad {
 public:
  TwoModeLindblad(double kappa1, double kappa2, double nbar1, double nbar2,
                  double g, int cutoff1, int cutoff2);

  /// Reads kappa/nbar/g back off a two-mode ModeSystem; rejects anything that
  /// is not the damped beam-splitter form.
  static TwoModeLindblad from_system(const gaussian::ModeSystem& sys, int cutoff);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(n1_) * n2_; }
  int cutoff1() const noexcept { return n1_; }
  int cutoff2() const noexcept { return n2_; }

  /// out = L[rho].
  void apply(const ComplexMatrix& rho, ComplexMatrix& out) const;
  /// rho <- exp(L * duration)[rho] by fixed-step truncated-Taylor stepping.
  void propagate(ComplexMatrix& rho, double duration) const;
  double residual(const ComplexMatrix& rho) const;

  /// Thermal product state chi(nbar1) x chi(nbar2), truncated and renormalized.
  ComplexMatrix thermal_product() const;

  /// rho <- (w0 a + w1 c) rho   /   rho <- rho (w0 a + w1 c)^dag.
  ComplexMatrix annihilate_left(const std::vector<Complex>& w,
                                const ComplexMatrix& rho) const;
  ComplexMatrix create_right(const std::vector<Complex>& w,
                             const ComplexMatrix& rho) const;
  /// Tr[(wd . b)^dag (wu . b) rho].
  Complex pair_expectation(const std::vector<Complex>& wd,
                           const std::vector<Complex>& wu,
                           const ComplexMatrix& rho) const;

 private:
  int n1_, n2_;
  double kappa1_, kappa2_, nbar1_, nbar2_, g_;
  double step_;  // Taylor step keeping |h L| small
  std::vector<double> sr1_, sr2_;  // sqrt(n) ladders per mode
};

/// Stationary state by long-time propagation with a residual check.
/// Throws CutoffTooSmall when the converged state leaks into the top Fock
/// layer beyond cfg.tolerance, NotConverged past cfg.max_time.
DensityMatrix steady_state(const gaussian::ModeSystem& sys, const FockConfig& cfg);

/// Multi-time normally ordered correlator by quantum regression: the event
/// string must be balanced (n <= 3), mirror-paired in time, and nested
/// outside-in (t_outer <= ... <= t_inner). Weights on the two sides of a pair
/// may differ.
Complex multitime_correlation(const gaussian::ModeSystem& sys, const FockConfig& cfg,
                              const gaussian::CorrelationSpec& spec);

/// Same, reusing a prepared generator and steady state (one steady state can
/// serve many correlators).
Complex multitime_correlation(const TwoModeLindblad& lindblad,
                              const DensityMatrix& steady,
                              const gaussian::CorrelationSpec& spec);

}  // namespace coherence::fock
