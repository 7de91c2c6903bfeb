#include "coherence/linalg.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "coherence/error.hpp"

namespace coherence::linalg {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

Complex sign_of(Complex z) {
  const double a = std::abs(z);
  return a == 0.0 ? Complex(1.0, 0.0) : z / a;
}

// Unitary plane rotation [[c, s], [-conj(s), c]] (c real) mapping (f, g) -> (r, 0).
struct Givens {
  double c = 1.0;
  Complex s{0.0, 0.0};
};

Givens make_givens(Complex f, Complex g) {
  Givens rot;
  const double af = std::abs(f), ag = std::abs(g);
  const double r = std::hypot(af, ag);
  if (r == 0.0 || ag == 0.0) return rot;  // already triangular
  if (af == 0.0) {
    rot.c = 0.0;
    rot.s = sign_of(std::conj(g));
    return rot;
  }
  rot.c = af / r;
  rot.s = sign_of(f) * std::conj(g) / r;
  return rot;
}

// Householder reduction to upper Hessenberg form; h <- q^H h q with q accumulated.
void hessenberg(ComplexMatrix& h, ComplexMatrix& q) {
  const std::size_t n = h.rows();
  std::vector<Complex> v(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double col_norm = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) col_norm = std::hypot(col_norm, std::abs(h(i, k)));
    if (col_norm == 0.0) continue;
    const Complex alpha = -sign_of(h(k + 1, k)) * col_norm;
    double vnorm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) {
      v[i] = h(i, k);
      if (i == k + 1) v[i] -= alpha;
      vnorm2 += std::norm(v[i]);
    }
    if (vnorm2 == 0.0) continue;
    const double tau = 2.0 / vnorm2;
    // h <- P h, P = I - tau v v^H acting on rows k+1..n-1
    for (std::size_t j = k; j < n; ++j) {
      Complex dot = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) dot += std::conj(v[i]) * h(i, j);
      dot *= tau;
      for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= dot * v[i];
    }
    // h <- h P on columns k+1..n-1
    for (std::size_t i = 0; i < n; ++i) {
      Complex dot = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) dot += h(i, j) * v[j];
      dot *= tau;
      for (std::size_t j = k + 1; j < n; ++j) h(i, j) -= dot * std::conj(v[j]);
    }
    // q <- q P
    for (std::size_t i = 0; i < n; ++i) {
      Complex dot = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) dot += q(i, j) * v[j];
      dot *= tau;
      for (std::size_t j = k + 1; j < n; ++j) q(i, j) -= dot * std::conj(v[j]);
    }
    for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
    h(k + 1, k) = alpha;
  }
}

Complex wilkinson_shift(const ComplexMatrix& h, std::size_t hi) {
  const Complex a = h(hi - 1, hi - 1), b = h(hi - 1, hi);
  const Complex c = h(hi, hi - 1), d = h(hi, hi);
  const Complex tr = a + d;
  Complex disc = std::sqrt(tr * tr * 0.25 - (a * d - b * c));
  const Complex m1 = tr * 0.5 + disc, m2 = tr * 0.5 - disc;
  return std::abs(m1 - d) < std::abs(m2 - d) ? m1 : m2;
}

// Shifted complex QR on an upper Hessenberg matrix; converges h to upper
// triangular Schur form, accumulating the unitary similarity into q.
bool schur_qr(ComplexMatrix& h, ComplexMatrix& q) {
  const std::size_t n = h.rows();
  if (n < 2) return true;
  const double scale = std::max(h.max_abs(), kEps);
  std::size_t hi = n - 1;
  int iters_in_block = 0;
  long total = 0;
  const long max_total = 60 * static_cast<long>(n);
  std::vector<Givens> rots(n);

  while (true) {
    // deflate converged trailing eigenvalues
    std::size_t lo = hi;
    while (lo > 0) {
      const double off = std::abs(h(lo, lo - 1));
      if (off <= kEps * (std::abs(h(lo - 1, lo - 1)) + std::abs(h(lo, lo))) ||
          off <= kEps * kEps * scale) {
        h(lo, lo - 1) = 0.0;
        break;
      }
      --lo;
    }
    if (lo == hi) {
      if (hi == 0) return true;
      --hi;
      iters_in_block = 0;
      continue;
    }
    if (++total > max_total) return false;

    Complex mu = wilkinson_shift(h, hi);
    if (++iters_in_block % 12 == 0) {
      // exceptional shift to break slow cycles
      mu = h(hi, hi) + Complex(1.5 * std::abs(h(hi, hi - 1)), 0.0);
    }

    for (std::size_t i = lo; i <= hi; ++i) h(i, i) -= mu;
    // QR factor via Givens rotations on the subdiagonal
    for (std::size_t k = lo; k < hi; ++k) {
      const Givens g = make_givens(h(k, k), h(k + 1, k));
      rots[k] = g;
      for (std::size_t j = k; j < n; ++j) {
        const Complex x = h(k, j), y = h(k + 1, j);
        h(k, j) = g.c * x + g.s * y;
        h(k + 1, j) = -std::conj(g.s) * x + g.c * y;
      }
      h(k + 1, k) = 0.0;
    }
    // h <- R Q^H-multiplication from the right, accumulate q
    for (std::size_t k = lo; k < hi; ++k) {
      const Givens g = rots[k];
      const std::size_t top = std::min(k + 2, hi) + 1;
      for (std::size_t i = 0; i < top; ++i) {
        const Complex x = h(i, k), y = h(i, k + 1);
        h(i, k) = g.c * x + std::conj(g.s) * y;
        h(i, k + 1) = -g.s * x + g.c * y;
      }
      for (std::size_t i = 0; i < n; ++i) {
        const Complex x = q(i, k), y = q(i, k + 1);
        q(i, k) = g.c * x + std::conj(g.s) * y;
        q(i, k + 1) = -g.s * x + g.c * y;
      }
    }
    for (std::size_t i = lo; i <= hi; ++i) h(i, i) += mu;
  }
}

// Deterministic column phase: largest component real and positive.
void fix_column_phase(ComplexMatrix& u, std::size_t col) {
  std::size_t arg_max = 0;
  for (std::size_t i = 1; i < u.rows(); ++i)
    if (std::abs(u(i, col)) > std::abs(u(arg_max, col))) arg_max = i;
  const Complex z = u(arg_max, col);
  if (std::abs(z) == 0.0) return;
  const Complex phase = std::conj(z) / std::abs(z);
  for (std::size_t i = 0; i < u.rows(); ++i) u(i, col) *= phase;
}

// Right eigenvectors of the triangular Schur factor by back substitution,
// mapped through the Schur basis.
ComplexMatrix triangular_eigenvectors(const ComplexMatrix& t, const ComplexMatrix& q) {
  const std::size_t n = t.rows();
  const double tiny = kEps * std::max(t.max_abs(), 1.0);
  ComplexMatrix u(n, n);
  std::vector<Complex> y(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::fill(y.begin(), y.end(), Complex(0.0));
    y[k] = 1.0;
    for (std::size_t jj = k; jj-- > 0;) {
      Complex acc = 0.0;
      for (std::size_t i = jj + 1; i <= k; ++i) acc += t(jj, i) * y[i];
      Complex den = t(jj, jj) - t(k, k);
      if (std::abs(den) < tiny) den = Complex(tiny, 0.0);
      y[jj] = -acc / den;
    }
    // column k of u = q * y, normalized with a deterministic phase
    double norm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Complex acc = 0.0;
      for (std::size_t j = 0; j <= k; ++j) acc += q(i, j) * y[j];
      u(i, k) = acc;
      norm2 += std::norm(acc);
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t i = 0; i < n; ++i) u(i, k) *= inv;
    fix_column_phase(u, k);
  }
  return u;
}

double norm_inf(const ComplexMatrix& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) row += std::abs(m(i, j));
    best = std::max(best, row);
  }
  return best;
}

// Closed-form eigenpairs for dim 1 and 2.
SpectralDecomposition small_decomposition(const ComplexMatrix& m) {
  SpectralDecomposition dec;
  const std::size_t n = m.rows();
  if (n == 1) {
    dec.eigenvalues = {m(0, 0)};
    dec.vectors = ComplexMatrix::identity(1);
    dec.inverse_vectors = dec.vectors;
    return dec;
  }
  const Complex a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
  const Complex half_tr = (a + d) * 0.5;
  const Complex disc = std::sqrt(half_tr * half_tr - (a * d - b * c));
  std::array<Complex, 2> lam = {half_tr - disc, half_tr + disc};
  dec.vectors = ComplexMatrix(2, 2);
  for (int k = 0; k < 2; ++k) {
    // the two rows of (m - lambda I) both yield a null vector; keep the
    // numerically larger one
    const Complex ra0 = b, ra1 = lam[k] - a;
    const Complex rb0 = lam[k] - d, rb1 = c;
    const double na = std::hypot(std::abs(ra0), std::abs(ra1));
    const double nb = std::hypot(std::abs(rb0), std::abs(rb1));
    Complex v0, v1;
    if (na == 0.0 && nb == 0.0) {  // scalar multiple of the identity
      v0 = (k == 0) ? 1.0 : 0.0;
      v1 = (k == 0) ? 0.0 : 1.0;
    } else if (na >= nb) {
      v0 = ra0;
      v1 = ra1;
    } else {
      v0 = rb0;
      v1 = rb1;
    }
    const double inv = 1.0 / std::hypot(std::abs(v0), std::abs(v1));
    dec.vectors(0, k) = v0 * inv;
    dec.vectors(1, k) = v1 * inv;
    fix_column_phase(dec.vectors, k);
  }
  dec.eigenvalues = {lam[0], lam[1]};
  return dec;
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> init) {
  rows_ = init.size();
  cols_ = rows_ ? init.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& row : init) {
    if (row.size() != cols_)
      fail(ErrorCode::DimensionMismatch, "ragged initializer");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(const std::vector<Complex>& entries) {
  ComplexMatrix m(entries.size(), entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
  return out;
}

double ComplexMatrix::max_abs() const {
  double best = 0.0;
  for (const Complex& z : data_) best = std::max(best, std::abs(z));
  return best;
}

bool ComplexMatrix::all_finite() const {
  for (const Complex& z : data_)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& rhs) {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
    fail(ErrorCode::DimensionMismatch, "matrix addition");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& rhs) {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
    fail(ErrorCode::DimensionMismatch, "matrix subtraction");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex s) {
  for (Complex& z : data_) z *= s;
  return *this;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) fail(ErrorCode::DimensionMismatch, "matrix product");
  ComplexMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex(0.0)) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(Complex s, ComplexMatrix m) { return m *= s; }

ComplexMatrix inverse(const ComplexMatrix& m) {
  if (!m.square()) fail(ErrorCode::DimensionMismatch, "inverse of non-square matrix");
  const std::size_t n = m.rows();
  ComplexMatrix a = m;
  ComplexMatrix inv = ComplexMatrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t i = col + 1; i < n; ++i)
      if (std::abs(a(i, col)) > std::abs(a(pivot, col))) pivot = i;
    if (std::abs(a(pivot, col)) <= kEps * kEps * std::max(m.max_abs(), 1.0))
      fail(ErrorCode::SingularMatrix, "pivot underflow in Gauss-Jordan");
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a(pivot, j), a(col, j));
        std::swap(inv(pivot, j), inv(col, j));
      }
    }
    const Complex p = a(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      a(col, j) /= p;
      inv(col, j) /= p;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col) continue;
      const Complex f = a(i, col);
      if (f == Complex(0.0)) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a(i, j) -= f * a(col, j);
        inv(i, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

SpectralDecomposition diagonalize(const ComplexMatrix& m, double tol) {
  if (!m.square()) fail(ErrorCode::DimensionMismatch, "diagonalize needs a square matrix");
  const std::size_t n = m.rows();
  if (n == 0) fail(ErrorCode::InvalidArgument, "empty matrix");
  if (n > kMaxEigenDim) fail(ErrorCode::DimensionTooLarge, "eigensolver capped at dim 32");
  if (!m.all_finite()) fail(ErrorCode::InvalidArgument, "matrix has non-finite entries");
  if (tol <= 0.0) fail(ErrorCode::InvalidArgument, "tolerance must be positive");

  SpectralDecomposition dec;
  if (n <= 2) {
    dec = small_decomposition(m);
  } else {
    ComplexMatrix h = m;
    ComplexMatrix q = ComplexMatrix::identity(n);
    hessenberg(h, q);
    if (!schur_qr(h, q))
      fail(ErrorCode::NonDiagonalizable, "QR iteration did not converge");
    dec.vectors = triangular_eigenvectors(h, q);
    dec.eigenvalues.resize(n);
    for (std::size_t i = 0; i < n; ++i) dec.eigenvalues[i] = h(i, i);
  }

  // deterministic eigenvalue order: by real part, then imaginary part
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Complex &la = dec.eigenvalues[a], &lb = dec.eigenvalues[b];
    if (la.real() != lb.real()) return la.real() < lb.real();
    return la.imag() < lb.imag();
  });
  SpectralDecomposition sorted;
  sorted.eigenvalues.resize(n);
  sorted.vectors = ComplexMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    sorted.eigenvalues[k] = dec.eigenvalues[order[k]];
    for (std::size_t i = 0; i < n; ++i) sorted.vectors(i, k) = dec.vectors(i, order[k]);
  }

  try {
    sorted.inverse_vectors = inverse(sorted.vectors);
  } catch (const Error&) {
    fail(ErrorCode::NonDiagonalizable, "eigenvector matrix is numerically singular");
  }

  const double cond = norm_inf(sorted.vectors) * norm_inf(sorted.inverse_vectors);
  if (cond > 1.0 / tol)
    fail(ErrorCode::NonDiagonalizable,
         "eigenvector condition number " + std::to_string(cond) +
             " exceeds 1/tol; matrix is defective or nearly so");

  const ComplexMatrix recon = sorted.vectors *
                              ComplexMatrix::diagonal(sorted.eigenvalues) *
                              sorted.inverse_vectors;
  const double scale = std::max(m.max_abs(), kEps);
  if ((recon - m).max_abs() > tol * scale)
    fail(ErrorCode::NonDiagonalizable, "reconstruction residual exceeds tolerance");
  if ((sorted.vectors * sorted.inverse_vectors - ComplexMatrix::identity(n)).max_abs() > tol)
    fail(ErrorCode::NonDiagonalizable, "inverse residual exceeds tolerance");
  return sorted;
}

Complex permanent(const ComplexMatrix& k) {
  if (!k.square()) fail(ErrorCode::DimensionMismatch, "permanent needs a square matrix");
  const std::size_t n = k.rows();
  if (n > kMaxPermanentDim) fail(ErrorCode::DimensionTooLarge, "permanent capped at dim 8");
  if (n == 0) return 1.0;

  // Ryser: perm = (-1)^n sum_{S != 0} (-1)^|S| prod_i sum_{j in S} k(i, j),
  // subsets walked in Gray-code order with incremental row sums.
  std::array<Complex, kMaxPermanentDim> row_sum{};
  Complex total = 0.0;
  std::uint32_t prev_gray = 0;
  const std::uint32_t limit = 1u << n;
  for (std::uint32_t idx = 1; idx < limit; ++idx) {
    const std::uint32_t gray = idx ^ (idx >> 1);
    const std::uint32_t flipped = gray ^ prev_gray;
    const int j = std::countr_zero(flipped);
    const double sgn = (gray & flipped) ? 1.0 : -1.0;
    for (std::size_t i = 0; i < n; ++i) row_sum[i] += sgn * k(i, static_cast<std::size_t>(j));
    Complex prod = 1.0;
    for (std::size_t i = 0; i < n; ++i) prod *= row_sum[i];
    const bool even = (std::popcount(gray) % 2) == 0;
    total += even ? prod : -prod;
    prev_gray = gray;
  }
  return (n % 2 == 0) ? total : -total;
}

double lyapunov_residual(const ComplexMatrix& m, const ComplexMatrix& c,
                         const ComplexMatrix& d) {
  if (!m.square() || !c.square() || !d.square() || m.rows() != c.rows() ||
      m.rows() != d.rows())
    fail(ErrorCode::DimensionMismatch, "lyapunov_residual needs equal square matrices");
  return (m * c + c * m.adjoint() - d).max_abs();
}

}  // namespace coherence::linalg
