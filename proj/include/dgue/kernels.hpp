#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "dgue/airy.hpp"
#include "dgue/quadrature.hpp"

namespace dgue {

/// Ai(u)Ai'(v) - Ai'(u)Ai(v) over u - v, continued to the diagonal.
double airy_kernel(double u, double v);

using Kernel = std::function<double(double, double)>;

/// det(delta_ij - sqrt(w_i w_j) K(x_i, x_j)) on `rule` mapped to (x, x + L).
double fredholm_det(const Kernel& kernel, double x, const QuadratureRule& rule, double L);

/// Truncation length used for the Airy operator on (x, inf).
double airy_truncation(double x);

/// Symmetrized Nystrom matrix of the Airy kernel on (x, x + L).
std::vector<double> airy_nystrom_matrix(double x, const QuadratureRule& rule, double L);

/// det(1 - z A_x) for each z, sharing one eigendecomposition.
std::vector<std::complex<double>> airy_det_at(double x, const std::vector<std::complex<double>>& zs,
                                              std::size_t m = 60, double L = -1.0);

/// F_GUE(x) for k = 1, law of the k-th largest point for k <= 4.
double tw_cdf(double x, int k, std::size_t m = 60);

/// Law of the largest eigenvalue of a k x k GUE with density ~ exp(-tr H^2 / 2).
double gk_cdf(double x, int k);

struct PearceyOptions {
  double quartic = 1.0;  // coefficient c in exp(c (t^4 - s^4) + x t - y s)
  int scheme = 0;        // 0: outer ray loop, 1: outer axis loop with other nodes
  int refine = 1;        // multiplies the number of panels on every contour piece
};

/// Pearcey kernel evaluated by double quadrature on the convergent contours.
double pearcey_kernel(double x, double y, const PearceyOptions& options = {});

/// Integral of K_P(x, x) over [-s, s].
double pearcey_intensity(double s, double quartic, std::size_t nodes = 200);

struct KernelTable {
  std::string id;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, std::string>> metadata;

  std::string to_csv() const;
};

struct GridSpec {
  double lo;
  double hi;
  double step;

  std::vector<double> points() const;
};

GridSpec parse_grid(const std::string& text);

KernelTable tabulate_airy(const GridSpec& grid);
KernelTable tabulate_tw(const GridSpec& grid, int k, std::size_t m = 60);
KernelTable tabulate_gk(const GridSpec& grid, int k);
KernelTable tabulate_pearcey(const GridSpec& grid, double quartic);

}  // namespace dgue
