#pragma once

#include <random>
#include <vector>

#include "coherence/gaussian.hpp"
#include "coherence/linalg.hpp"

namespace testsupport {

using coherence::linalg::Complex;
using coherence::linalg::ComplexMatrix;

inline Complex random_unit_disk(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  while (true) {
    const Complex z(u(rng), u(rng));
    if (std::norm(z) <= 1.0) return z;
  }
}

inline ComplexMatrix random_matrix(std::mt19937& rng, std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = random_unit_disk(rng);
  return m;
}

// Random stable mode system: a generic complex drift shifted into the right
// half plane by its Gershgorin bound, with nonnegative random diffusion.
inline coherence::gaussian::ModeSystem random_stable_system(std::mt19937& rng,
                                                            std::size_t n) {
  using coherence::gaussian::ModeKind;
  ComplexMatrix m = random_matrix(rng, n);
  double bound = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += std::abs(m(i, j));
    bound = std::max(bound, row);
  }
  for (std::size_t i = 0; i < n; ++i) m(i, i) += bound + 0.1;

  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> diffusion(n);
  for (double& d : diffusion) d = u(rng);
  std::vector<ModeKind> kinds(n, ModeKind::matter);
  kinds[0] = ModeKind::optical;
  return coherence::gaussian::ModeSystem::make(std::move(m), std::move(diffusion),
                                               std::move(kinds));
}

}  // namespace testsupport
