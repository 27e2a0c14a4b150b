#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace dgue {

/// Dense Hermitian matrix in column-major split storage. Both triangles are
/// averaged into the lower one before reduction.
struct HermitianMatrix {
  std::size_t n = 0;
  std::vector<double> re;
  std::vector<double> im;

  explicit HermitianMatrix(std::size_t size = 0) : n(size), re(size * size, 0.0), im(size * size, 0.0) {}

  std::complex<double> get(std::size_t i, std::size_t j) const { return {re[i + j * n], im[i + j * n]}; }
  void set(std::size_t i, std::size_t j, std::complex<double> v) {
    re[i + j * n] = v.real();
    im[i + j * n] = v.imag();
  }
  /// Writes (i, j) and the conjugate entry (j, i).
  void set_hermitian(std::size_t i, std::size_t j, std::complex<double> v) {
    set(i, j, v);
    set(j, i, std::conj(v));
  }
};

/// Eigenvalues of the tridiagonal matrix with diagonal d and sub-diagonal e
/// (e[0] unused, e[i] couples i-1 and i), ascending.
std::vector<double> tridiagonal_eigenvalues(std::vector<double> d, std::vector<double> e);

/// Householder reduction to real tridiagonal form followed by implicit-shift QL.
/// `a` is overwritten.
std::vector<double> hermitian_eigenvalues_inplace(HermitianMatrix& a);
std::vector<double> hermitian_eigenvalues(HermitianMatrix a);

}  // namespace dgue
