#include "coherence/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <doctest.h>

#include "coherence/error.hpp"
#include "support.hpp"

using namespace coherence;
using namespace coherence::linalg;
using testsupport::random_matrix;
using testsupport::random_unit_disk;

namespace {

// independent n!-term oracle for the permanent
Complex permanent_bruteforce(const ComplexMatrix& k) {
  const std::size_t n = k.rows();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Complex total = 0.0;
  do {
    Complex prod = 1.0;
    for (std::size_t i = 0; i < n; ++i) prod *= k(i, perm[i]);
    total += prod;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

double reconstruction_error(const SpectralDecomposition& dec, const ComplexMatrix& m) {
  const ComplexMatrix recon =
      dec.vectors * ComplexMatrix::diagonal(dec.eigenvalues) * dec.inverse_vectors;
  return (recon - m).max_abs();
}

}  // namespace

TEST_CASE("diagonalize: diagonal and symmetric 2x2") {
  const auto dec = diagonalize(ComplexMatrix{{1.0, 0.0}, {0.0, 2.0}});
  CHECK(dec.eigenvalues[0] == Complex(1.0));
  CHECK(dec.eigenvalues[1] == Complex(2.0));
  CHECK(dec.vectors == ComplexMatrix::identity(2));

  const auto sym = diagonalize(ComplexMatrix{{2.0, 1.0}, {1.0, 2.0}});
  CHECK(std::abs(sym.eigenvalues[0] - Complex(1.0)) < 1e-12);
  CHECK(std::abs(sym.eigenvalues[1] - Complex(3.0)) < 1e-12);
}

TEST_CASE("diagonalize: damped beam-splitter drift eigenvalues") {
  const Complex ig(0.0, 1.0);
  const auto dec = diagonalize(ComplexMatrix{{0.075, ig}, {ig, 0.125}});
  // closed-form roots: 0.1 +- i sqrt(0.999375)
  const double root = std::sqrt(0.999375);
  CHECK(std::abs(dec.eigenvalues[0] - Complex(0.1, -root)) < 1e-12);
  CHECK(std::abs(dec.eigenvalues[1] - Complex(0.1, root)) < 1e-12);
}

TEST_CASE("diagonalize: reconstruction on random matrices, dims 1..16") {
  std::mt19937 rng(20260809);
  for (std::size_t n : {1u, 2u, 3u, 5u, 8u, 12u, 16u}) {
    for (int rep = 0; rep < 6; ++rep) {
      const ComplexMatrix m = random_matrix(rng, n);
      const auto dec = diagonalize(m);
      const double scale = std::max(m.max_abs(), 1e-9);
      CHECK(reconstruction_error(dec, m) <= 1e-10 * scale);
      CHECK((dec.vectors * dec.inverse_vectors - ComplexMatrix::identity(n)).max_abs() <=
            1e-10);
      for (std::size_t k = 1; k < n; ++k) {
        const Complex a = dec.eigenvalues[k - 1], b = dec.eigenvalues[k];
        CHECK((a.real() < b.real() || (a.real() == b.real() && a.imag() <= b.imag())));
      }
    }
  }
}

TEST_CASE("diagonalize: defective matrix is rejected") {
  CHECK_THROWS_WITH_AS(diagonalize(ComplexMatrix{{1.0, 1.0}, {0.0, 1.0}}),
                       doctest::Contains("NonDiagonalizable"), Error);
  // near-defective 3x3 Jordan-like block
  CHECK_THROWS_AS(diagonalize(ComplexMatrix{{1.0, 1.0, 0.0},
                                            {0.0, 1.0 + 1e-14, 1.0},
                                            {0.0, 0.0, 1.0 - 1e-14}}),
                  Error);
}

TEST_CASE("diagonalize: dimension guard") {
  CHECK_THROWS_AS(diagonalize(ComplexMatrix(33, 33)), Error);
  try {
    diagonalize(ComplexMatrix(33, 33));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionTooLarge);
  }
}

TEST_CASE("permanent: small closed forms") {
  CHECK(permanent(ComplexMatrix{{1.0, 1.0}, {1.0, 1.0}}) == Complex(2.0));
  const ComplexMatrix ones3{{1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}};
  CHECK(std::abs(permanent(ones3) - Complex(6.0)) < 1e-12);
  CHECK(permanent(ComplexMatrix(0, 0)) == Complex(1.0));
}

TEST_CASE("permanent: matches the n!-term sum on random inputs") {
  std::mt19937 rng(7);
  for (std::size_t n = 1; n <= 5; ++n) {
    for (int rep = 0; rep < 8; ++rep) {
      const ComplexMatrix k = random_matrix(rng, n);
      const Complex fast = permanent(k);
      const Complex slow = permanent_bruteforce(k);
      CHECK(std::abs(fast - slow) <= 1e-12 * std::max(1.0, std::abs(slow)));
    }
  }
}

TEST_CASE("permanent: zero row and permutation invariance") {
  std::mt19937 rng(11);
  ComplexMatrix k = random_matrix(rng, 4);
  for (std::size_t j = 0; j < 4; ++j) k(2, j) = 0.0;
  CHECK(std::abs(permanent(k)) <= 1e-12);

  const ComplexMatrix m = random_matrix(rng, 4);
  ComplexMatrix rows_swapped = m, cols_swapped = m;
  for (std::size_t j = 0; j < 4; ++j) std::swap(rows_swapped(0, j), rows_swapped(3, j));
  for (std::size_t i = 0; i < 4; ++i) std::swap(cols_swapped(i, 1), cols_swapped(i, 2));
  const Complex base = permanent(m);
  CHECK(std::abs(permanent(rows_swapped) - base) <= 1e-12 * std::abs(base));
  CHECK(std::abs(permanent(cols_swapped) - base) <= 1e-12 * std::abs(base));
}

TEST_CASE("permanent: dimension guard at 8") {
  CHECK_NOTHROW(permanent(ComplexMatrix(8, 8)));
  CHECK_THROWS_AS(permanent(ComplexMatrix(9, 9)), Error);
}

TEST_CASE("lyapunov_residual: scalar stationarity and zero case") {
  const double kappa = 0.3, nbar = 0.2;
  const ComplexMatrix m{{kappa / 2}};
  const ComplexMatrix c{{nbar}};
  const ComplexMatrix d{{nbar * kappa}};
  CHECK(lyapunov_residual(m, c, d) == 0.0);

  const ComplexMatrix zero(1, 1);
  CHECK(lyapunov_residual(m, zero, d) == d.max_abs());

  CHECK_THROWS_AS(lyapunov_residual(m, ComplexMatrix(2, 2), d), Error);
}
