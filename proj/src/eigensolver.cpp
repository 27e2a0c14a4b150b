#include "dgue/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dgue/errors.hpp"

namespace dgue {

std::vector<double> tridiagonal_eigenvalues(std::vector<double> d, std::vector<double> e) {
  const int n = static_cast<int>(d.size());
  if (n == 0) return d;
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 50) throw ConvergenceError("implicit QL did not converge within 50 sweeps");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  std::sort(d.begin(), d.end());
  return d;
}

std::vector<double> hermitian_eigenvalues_inplace(HermitianMatrix& a) {
  const std::size_t n = a.n;
  if (n == 0) return {};
  double* ar = a.re.data();
  double* ai = a.im.data();
  for (std::size_t j = 0; j < n; ++j) {
    ai[j + j * n] = 0.0;
    for (std::size_t i = j + 1; i < n; ++i) {
      const double r = 0.5 * (ar[i + j * n] + ar[j + i * n]);
      const double m = 0.5 * (ai[i + j * n] - ai[j + i * n]);
      ar[i + j * n] = r;
      ai[i + j * n] = m;
    }
  }

  std::vector<double> d(n), e(n, 0.0);
  std::vector<double> vr(n), vi(n), wr(n), wi(n);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const std::size_t off = k + 1;
    const std::size_t m = n - off;
    double* xr = ar + off + k * n;
    double* xi = ai + off + k * n;
    const double alr = xr[0];
    const double ali = xi[0];
    double tail = 0.0;
    for (std::size_t i = 1; i < m; ++i) tail += xr[i] * xr[i] + xi[i] * xi[i];
    if (tail == 0.0 && ali == 0.0) {
      e[off] = alr;
      continue;
    }
    const double beta = -std::copysign(std::sqrt(alr * alr + ali * ali + tail), alr);
    const double tr = (beta - alr) / beta;
    const double ti = -ali / beta;
    // scale = 1 / (alpha - beta)
    const double dr = alr - beta;
    const double di = ali;
    const double den = dr * dr + di * di;
    const double sr = dr / den;
    const double si = -di / den;
    vr[0] = 1.0;
    vi[0] = 0.0;
    for (std::size_t i = 1; i < m; ++i) {
      vr[i] = xr[i] * sr - xi[i] * si;
      vi[i] = xr[i] * si + xi[i] * sr;
    }
    e[off] = beta;

    // w = B v on the trailing block, lower triangle only.
    std::fill(wr.begin(), wr.begin() + m, 0.0);
    std::fill(wi.begin(), wi.begin() + m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const double* br = ar + off + (off + j) * n;
      const double* bi = ai + off + (off + j) * n;
      const double vjr = vr[j];
      const double vji = vi[j];
      double accr = br[j] * vjr;
      double acci = br[j] * vji;
      for (std::size_t i = j + 1; i < m; ++i) {
        wr[i] += br[i] * vjr - bi[i] * vji;
        wi[i] += br[i] * vji + bi[i] * vjr;
        // conj(B_ij) v_i
        accr += br[i] * vr[i] + bi[i] * vi[i];
        acci += br[i] * vi[i] - bi[i] * vr[i];
      }
      wr[j] += accr;
      wi[j] += acci;
    }
    // w = tau w; then w += alpha' v with alpha' = -tau (w^H v) / 2
    double dotr = 0.0, doti = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double r = tr * wr[i] - ti * wi[i];
      const double im = tr * wi[i] + ti * wr[i];
      wr[i] = r;
      wi[i] = im;
      dotr += wr[i] * vr[i] + wi[i] * vi[i];
      doti += wr[i] * vi[i] - wi[i] * vr[i];
    }
    const double apr = -0.5 * (tr * dotr - ti * doti);
    const double api = -0.5 * (tr * doti + ti * dotr);
    for (std::size_t i = 0; i < m; ++i) {
      wr[i] += apr * vr[i] - api * vi[i];
      wi[i] += apr * vi[i] + api * vr[i];
    }
    // B -= v w^H + w v^H
    for (std::size_t j = 0; j < m; ++j) {
      double* br = ar + off + (off + j) * n;
      double* bi = ai + off + (off + j) * n;
      const double wjr = wr[j], wji = wi[j], vjr = vr[j], vji = vi[j];
      for (std::size_t i = j; i < m; ++i) {
        br[i] -= vr[i] * wjr + vi[i] * wji + wr[i] * vjr + wi[i] * vji;
        bi[i] -= vi[i] * wjr - vr[i] * wji + wi[i] * vjr - wr[i] * vji;
      }
    }
  }
  for (std::size_t k = 0; k < n; ++k) d[k] = ar[k + k * n];
  return tridiagonal_eigenvalues(std::move(d), std::move(e));
}

std::vector<double> hermitian_eigenvalues(HermitianMatrix a) { return hermitian_eigenvalues_inplace(a); }

}  // namespace dgue
