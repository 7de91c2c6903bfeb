#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace coherence::linalg {

using Complex = std::complex<double>;

/// Dense row-major complex matrix. Sized for small mode networks, not HPC.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols) {}
  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> init);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix diagonal(const std::vector<Complex>& entries);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  Complex* data() noexcept { return data_.data(); }
  const Complex* data() const noexcept { return data_.data(); }

  ComplexMatrix adjoint() const;
  double max_abs() const;
  bool all_finite() const;

  ComplexMatrix& operator+=(const ComplexMatrix& rhs);
  ComplexMatrix& operator-=(const ComplexMatrix& rhs);
  ComplexMatrix& operator*=(Complex s);

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<Complex> data_;
};

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(Complex s, ComplexMatrix m);

/// Right-eigenvector factorization m = vectors * diag(eigenvalues) * inverse_vectors,
/// eigenvalues sorted by (real part, imaginary part).
struct SpectralDecomposition {
  std::vector<Complex> eigenvalues;
  ComplexMatrix vectors;
  ComplexMatrix inverse_vectors;
};

inline constexpr std::size_t kMaxEigenDim = 32;
inline constexpr std::size_t kMaxPermanentDim = 8;

/// Eigendecomposition of a dense complex square matrix (dim <= 32).
/// Closed forms for dim <= 2, Hessenberg + shifted complex QR above that.
/// Throws NonDiagonalizable when the eigenvector matrix condition number
/// exceeds 1/tol or the reconstruction residual misses tol * |m|_max.
SpectralDecomposition diagonalize(const ComplexMatrix& m, double tol = 1e-10);

/// Permutation sum perm(k) = sum_sigma prod_i k(i, sigma(i)), dim <= 8 (Ryser).
Complex permanent(const ComplexMatrix& k);

/// |m c + c m^H - d|_max over entries.
double lyapunov_residual(const ComplexMatrix& m, const ComplexMatrix& c,
                         const ComplexMatrix& d);

/// Gauss-Jordan inverse with partial pivoting. Throws SingularMatrix.
ComplexMatrix inverse(const ComplexMatrix& m);

}  // namespace coherence::linalg
