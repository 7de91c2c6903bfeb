#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "coherence/linalg.hpp"

namespace coherence::gaussian {

using linalg::Complex;
using linalg::ComplexMatrix;
using linalg::SpectralDecomposition;

enum class ModeKind { optical, matter };

/// Linear mode network: drift matrix for d/dt x = -M x + noise, diagonal
/// diffusion n_k * kappa_k, and a per-mode optical/matter tag. Immutable and
/// shareable across threads once built; construction checks stability
/// (all drift eigenvalues in the right half plane).
class ModeSystem {
 public:
  /// Damped beam-splitter pair: drift [[k1/2, ig], [ig, k2/2]], diffusion
  /// diag(nbar1*k1, nbar2*k2), mode 0 optical, mode 1 matter.
  static ModeSystem two_mode(double kappa1, double kappa2, double nbar1,
                             double nbar2, double g);

  /// General builder. An anomalous (creation-creation) drift block is not
  /// representable in this engine; passing a nonzero one is rejected with
  /// UnsupportedAnomalousCoupling.
  static ModeSystem make(ComplexMatrix drift, std::vector<double> diffusion,
                         std::vector<ModeKind> kinds,
                         const std::optional<ComplexMatrix>& anomalous = std::nullopt);

  std::size_t dim() const noexcept { return kinds_.size(); }
  std::size_t n_optical() const noexcept;
  std::size_t n_matter() const noexcept;
  const ComplexMatrix& drift() const noexcept { return drift_; }
  const std::vector<double>& diffusion() const noexcept { return diffusion_; }
  const std::vector<ModeKind>& kinds() const noexcept { return kinds_; }
  const SpectralDecomposition& decomposition() const noexcept { return decomp_; }

  const class TwoTimeKernel& kernel() const noexcept { return *kernel_; }

 private:
  ModeSystem() = default;
  ComplexMatrix drift_;
  std::vector<double> diffusion_;
  std::vector<ModeKind> kinds_;
  SpectralDecomposition decomp_;
  std::shared_ptr<const class TwoTimeKernel> kernel_;
};

/// One field operator inside a correlator: daggered flag, complex weight per
/// mode (mode-function values at the detector position; daggered weights enter
/// conjugated), and its time argument in units of 1/g.
struct FieldEvent {
  bool daggered = false;
  std::vector<Complex> weights;
  double time = 0.0;
};

/// Ordered operator string. Normal order (all daggered events before all
/// undaggered ones) is required by the evaluators.
struct CorrelationSpec {
  std::vector<FieldEvent> events;
};

/// Stationary two-time contraction kernel. covariance(t, s) is the mode-basis
/// matrix whose (u, d) entry contracts an undaggered mode-u operator at t with
/// a daggered mode-d operator at s. Entries are cached by t - s; the cache is
/// internally synchronized, so concurrent sweeps may share one kernel.
class TwoTimeKernel {
 public:
  TwoTimeKernel(SpectralDecomposition decomp, std::vector<double> diffusion);

  /// Kernel in the drift eigenbasis:
  ///   G_ij(t,s) = W_ij exp(-lambda_i (t-s)) / (lambda_i + conj(lambda_j)),  t >= s
  ///   G_ij(t,s) = W_ij exp(-conj(lambda_j) (s-t)) / (lambda_i + conj(lambda_j)), t < s
  /// with W = Uinv D Uinv^H. Satisfies G(t,s) = G(s,t)^H.
  ComplexMatrix eigenbasis(double t, double s) const;

  /// Mode-basis pair covariance C(t,s) = U G(t,s) U^H.
  ComplexMatrix covariance(double t, double s) const;

  const SpectralDecomposition& decomposition() const noexcept { return decomp_; }

 private:
  SpectralDecomposition decomp_;
  std::vector<double> diffusion_;
  ComplexMatrix w_;  // Uinv D Uinv^H
  mutable std::mutex mutex_;
  mutable std::map<double, ComplexMatrix> cache_;
};

/// Free-function form of the eigenbasis kernel; checks Re(l_i + conj(l_j)) > 0.
ComplexMatrix greens_kernel(const SpectralDecomposition& decomp,
                            const std::vector<double>& diffusion, double t, double s);

/// C(t,s) for a stable system (see TwoTimeKernel::covariance).
ComplexMatrix pair_covariance(const ModeSystem& sys, double t, double s);

/// Normally ordered expectation value of the event string by Wick pairing:
/// permanent of K(u,d) = w_u . C(t_u, t_d) . w_d^dag over undaggered rows and
/// daggered columns. Unbalanced dagger counts give exactly 0.
Complex wick_correlation(const ModeSystem& sys, const CorrelationSpec& spec);

/// Third-order strings of two matter detections bracketing one optical
/// intensity measurement; x has the optical pair innermost, y interleaves it.
CorrelationSpec g3x_spec(const std::vector<Complex>& w_r1, const std::vector<Complex>& w_r2,
                         const std::vector<Complex>& w_r3, double t1, double t2, double t3);
CorrelationSpec g3y_spec(const std::vector<Complex>& w_r1, const std::vector<Complex>& w_r2,
                         const std::vector<Complex>& w_r3, double t1, double t2, double t3);

Complex g3_x(const ModeSystem& sys, const std::vector<Complex>& w_r1,
             const std::vector<Complex>& w_r2, const std::vector<Complex>& w_r3,
             double t1, double t2, double t3);
Complex g3_y(const ModeSystem& sys, const std::vector<Complex>& w_r1,
             const std::vector<Complex>& w_r2, const std::vector<Complex>& w_r3,
             double t1, double t2, double t3);

enum class G3Kind { x, y };

/// Detector mode-function weights for the two matter detectors and the
/// optical one. unit_two_mode() selects mode 1 (matter) at r1, r2 and mode 0
/// (optical) at r3 with unit weight.
struct G3Weights {
  std::vector<Complex> matter_r1;
  std::vector<Complex> matter_r2;
  std::vector<Complex> optical_r3;
  static G3Weights unit_two_mode();
};

/// Normalized stationary correlation over delays tau1 = t3 - t1, tau2 = t2 - t1.
/// The denominator is the large-delay factorized value of the same string: the
/// product of the three stationary self-correlations plus the stationary
/// optical-matter cross term that survives when the two inner detections
/// coincide. It reduces to the plain intensity product whenever the steady
/// cross-coherence vanishes, makes the correlation tend to 1 at large delays,
/// and gives the thermal value 2 at zero delay for decoupled modes.
double normalized_g3(G3Kind kind, const ModeSystem& sys, const G3Weights& weights,
                     double tau1, double tau2);

}  // namespace coherence::gaussian
