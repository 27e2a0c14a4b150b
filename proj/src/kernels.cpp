#include "dgue/kernels.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "dgue/errors.hpp"

namespace dgue {

namespace {

constexpr double kAiryNearDiagonal = 1e-4;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Taylor expansion of the kernel about the diagonal in the half-offset d.
double airy_kernel_near_diagonal(double m, double d, const AiryValue& a) {
  const double A = a.ai;
  const double B = a.aip;
  const double d2 = d * d;
  const double c0 = B * B - m * A * A;
  const double c2 = (A * B + 2.0 * m * B * B - 2.0 * m * m * A * A) / 3.0;
  const double c4 = (3.0 * A * A + 4.0 * m * A * B + 8.0 * m * m * B * B - 8.0 * m * m * m * A * A) / 60.0;
  return c0 + d2 * (c2 + d2 * c4);
}

}  // namespace

double airy_kernel(double u, double v) {
  if (std::abs(u - v) > kAiryNearDiagonal) {
    const auto a = airy(u);
    const auto b = airy(v);
    return (a.ai * b.aip - a.aip * b.ai) / (u - v);
  }
  const double m = 0.5 * (u + v);
  return airy_kernel_near_diagonal(m, 0.5 * (v - u), airy(m));
}

double fredholm_det(const Kernel& kernel, double x, const QuadratureRule& rule, double L) {
  const std::size_t m = rule.order();
  if (m < 10) throw ValidationError("fredholm_det needs at least 10 quadrature nodes");
  if (!(L > 0.0)) throw ValidationError("fredholm_det needs a positive truncation length");
  const auto q = rule.mapped(x, x + L);
  Eigen::MatrixXd k(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) k(i, j) = kernel(q.nodes[i], q.nodes[j]);
  }
  const double asym = (k - k.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8) {
    throw ValidationError("fredholm_det: kernel sample is not symmetric (max asymmetry " + fmt17(asym) + ")");
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) a(i, j) -= std::sqrt(q.weights[i] * q.weights[j]) * k(i, j);
  }
  return a.partialPivLu().determinant();
}

double airy_truncation(double x) { return std::max(12.0, 3.0 * std::abs(x)); }

std::vector<double> airy_nystrom_matrix(double x, const QuadratureRule& rule, double L) {
  const std::size_t m = rule.order();
  const auto q = rule.mapped(x, x + L);
  std::vector<AiryValue> ai(m);
  for (std::size_t i = 0; i < m; ++i) ai[i] = airy(q.nodes[i]);
  std::vector<double> s(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double dx = q.nodes[i] - q.nodes[j];
      double kij;
      if (i == j) {
        kij = ai[i].aip * ai[i].aip - q.nodes[i] * ai[i].ai * ai[i].ai;
      } else if (std::abs(dx) > kAiryNearDiagonal) {
        kij = (ai[i].ai * ai[j].aip - ai[i].aip * ai[j].ai) / dx;
      } else {
        kij = airy_kernel(q.nodes[i], q.nodes[j]);
      }
      const double v = std::sqrt(q.weights[i] * q.weights[j]) * kij;
      s[i * m + j] = v;
      s[j * m + i] = v;
    }
  }
  return s;
}

std::vector<std::complex<double>> airy_det_at(double x, const std::vector<std::complex<double>>& zs,
                                              std::size_t m, double L) {
  if (L <= 0.0) L = airy_truncation(x);
  const auto s = airy_nystrom_matrix(x, gauss_legendre(m), L);
  const Eigen::Map<const Eigen::MatrixXd> sm(s.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sm, Eigen::EigenvaluesOnly);
  const auto& lambda = eig.eigenvalues();
  std::vector<std::complex<double>> out;
  out.reserve(zs.size());
  for (const auto& z : zs) {
    std::complex<double> d = 1.0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) d *= 1.0 - z * lambda(i);
    out.push_back(d);
  }
  return out;
}

double tw_cdf(double x, int k, std::size_t m) {
  if (k < 1) throw ValidationError("tw_cdf needs k >= 1");
  if (k > 4) throw ValidationError("tw_cdf: k > 4 is not certified");
  if (k == 1) {
    const auto s = airy_nystrom_matrix(x, gauss_legendre(m), airy_truncation(x));
    const Eigen::Map<const Eigen::MatrixXd> sm(s.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m) - sm;
    return std::clamp(a.partialPivLu().determinant(), 0.0, 1.0);
  }
  // Taylor coefficients of D(z) = det(1 - z A_x) at z = 1 by the trapezoid
  // rule on a circle: D^{(j)}(1)/j! = mean of D(1 + r e^{i phi}) e^{-i j phi} / r^j.
  constexpr int kPoints = 16;
  constexpr double kRadius = 0.5;
  std::vector<std::complex<double>> zs(kPoints);
  for (int p = 0; p < kPoints; ++p) zs[p] = 1.0 + std::polar(kRadius, 2.0 * M_PI * p / kPoints);
  const auto d = airy_det_at(x, zs, m);
  double total = 0.0;
  for (int j = 0; j < k; ++j) {
    std::complex<double> c = 0.0;
    for (int p = 0; p < kPoints; ++p) c += d[p] * std::polar(1.0, -2.0 * M_PI * j * p / kPoints);
    c /= kPoints * std::pow(kRadius, j);
    total += (j % 2 == 0 ? 1.0 : -1.0) * c.real();
  }
  return std::clamp(total, 0.0, 1.0);
}

double gk_cdf(double x, int k) {
  if (k < 1) throw ValidationError("gk_cdf needs k >= 1");
  if (k > 6) throw ValidationError("gk_cdf: k > 6 is not supported");
  using ld = long double;
  // Monomial coefficients of the orthonormal polynomials He_n / sqrt(sqrt(2 pi) n!).
  std::vector<std::vector<ld>> he(k, std::vector<ld>(k, 0.0L));
  he[0][0] = 1.0L;
  if (k > 1) he[1][1] = 1.0L;
  for (int n = 1; n + 1 < k; ++n) {
    for (int j = 0; j < k; ++j) {
      ld v = -n * he[n - 1][j];
      if (j > 0) v += he[n][j - 1];
      he[n + 1][j] = v;
    }
  }
  ld fact = 1.0L;
  for (int n = 0; n < k; ++n) {
    if (n > 0) fact *= n;
    const ld norm = std::sqrt(std::sqrt(2.0L * M_PIl) * fact);
    for (auto& c : he[n]) c /= norm;
  }
  // Tail moments T_j(a) = integral over (a, inf) of xi^j exp(-xi^2/2).
  const bool upper = x >= 0.0;
  const ld a = upper ? static_cast<ld>(x) : -static_cast<ld>(x);
  const int jmax = 2 * k - 2;
  std::vector<ld> t(jmax + 1);
  const ld g = std::exp(-a * a / 2.0L);
  t[0] = std::sqrt(M_PIl / 2.0L) * std::erfc(a / std::sqrt(2.0L));
  if (jmax >= 1) t[1] = g;
  for (int j = 2; j <= jmax; ++j) t[j] = std::pow(a, static_cast<ld>(j - 1)) * g + (j - 1) * t[j - 2];
  // Below x the moments are (-1)^j T_j(-x).
  if (!upper) {
    for (int j = 1; j <= jmax; j += 2) t[j] = -t[j];
  }
  Eigen::Matrix<ld, Eigen::Dynamic, Eigen::Dynamic> jm(k, k);
  for (int m = 0; m < k; ++m) {
    for (int n = 0; n < k; ++n) {
      ld s = 0.0L;
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) s += he[m][i] * he[n][j] * t[i + j];
      }
      jm(m, n) = upper ? ((m == n ? 1.0L : 0.0L) - s) : s;
    }
  }
  const double det = static_cast<double>(jm.partialPivLu().determinant());
  return std::clamp(det, 0.0, 1.0);
}

namespace {

struct ContourNodes {
  std::vector<std::complex<double>> point;
  std::vector<std::complex<double>> weight;  // includes dt or ds
};

double pearcey_radius(double c, double linear) {
  // Smallest R with c R^4 - linear (R + 1) >= 45.
  double r = std::pow(45.0 / c, 0.25);
  for (int it = 0; it < 100; ++it) r = std::pow((45.0 + linear * (r + 1.0)) / c, 0.25);
  return r;
}

ContourNodes t_contour(double radius, double delta, std::size_t segments, std::size_t m) {
  const auto rule = composite_gauss(0.0, radius, segments, m);
  const std::complex<double> e1 = std::polar(1.0, M_PI / 4.0);
  const std::complex<double> e2 = std::polar(1.0, -M_PI / 4.0);
  const std::complex<double> e3 = std::polar(1.0, -3.0 * M_PI / 4.0);
  const std::complex<double> e4 = std::polar(1.0, 3.0 * M_PI / 4.0);
  ContourNodes out;
  // Right branch comes in along e1 and leaves along e2 through +delta; the
  // left branch comes in along e3 and leaves along e4 through -delta.
  const struct {
    std::complex<double> in, out;
    double shift;
  } branches[2] = {{e1, e2, delta}, {e3, e4, -delta}};
  for (const auto& b : branches) {
    for (std::size_t i = 0; i < rule.order(); ++i) {
      out.point.push_back(b.shift + rule.nodes[i] * b.in);
      out.weight.push_back(-b.in * rule.weights[i]);
      out.point.push_back(b.shift + rule.nodes[i] * b.out);
      out.weight.push_back(b.out * rule.weights[i]);
    }
  }
  return out;
}

ContourNodes s_contour(double radius, std::size_t segments, std::size_t m) {
  const auto rule = composite_gauss(-radius, radius, segments, m);
  ContourNodes out;
  for (std::size_t i = 0; i < rule.order(); ++i) {
    out.point.emplace_back(0.0, rule.nodes[i]);
    out.weight.emplace_back(0.0, rule.weights[i]);
  }
  return out;
}

}  // namespace

double pearcey_kernel(double x, double y, const PearceyOptions& opt) {
  if (std::abs(x) > 20.0 || std::abs(y) > 20.0) throw ValidationError("pearcey_kernel needs |x|, |y| <= 20");
  if (!(opt.quartic > 0.0)) throw ValidationError("pearcey quartic coefficient must be positive");
  const double c = opt.quartic;
  const double radius = pearcey_radius(c, std::abs(x) + std::abs(y));
  const bool alt = opt.scheme != 0;
  const double delta = alt ? 0.35 : 0.5;
  if (opt.refine < 1) throw ValidationError("pearcey refine factor must be positive");
  const std::size_t f = static_cast<std::size_t>(opt.refine);
  const auto tc = alt ? t_contour(radius, delta, 10 * f, 20) : t_contour(radius, delta, 12 * f, 16);
  const auto sc = alt ? s_contour(radius, 20 * f, 20) : s_contour(radius, 24 * f, 16);

  std::vector<std::complex<double>> ft(tc.point.size());
  for (std::size_t i = 0; i < ft.size(); ++i) {
    const auto t = tc.point[i];
    const auto t2 = t * t;
    ft[i] = std::exp(c * t2 * t2 + x * t) * tc.weight[i];
  }
  std::vector<std::complex<double>> fs(sc.point.size());
  for (std::size_t j = 0; j < fs.size(); ++j) {
    const auto s = sc.point[j];
    const auto s2 = s * s;
    fs[j] = std::exp(-c * s2 * s2 - y * s) * sc.weight[j];
  }
  std::complex<double> total = 0.0;
  if (!alt) {
    for (std::size_t i = 0; i < ft.size(); ++i) {
      std::complex<double> inner = 0.0;
      for (std::size_t j = 0; j < fs.size(); ++j) inner += fs[j] / (sc.point[j] - tc.point[i]);
      total += ft[i] * inner;
    }
  } else {
    for (std::size_t j = 0; j < fs.size(); ++j) {
      std::complex<double> inner = 0.0;
      for (std::size_t i = 0; i < ft.size(); ++i) inner += ft[i] / (sc.point[j] - tc.point[i]);
      total += fs[j] * inner;
    }
  }
  // 1/(2 pi i)^2 = -1/(4 pi^2)
  total /= -4.0 * M_PI * M_PI;
  if (std::abs(total.imag()) > 1e-7) {
    throw IllConditionedError("pearcey_kernel: imaginary residue " + fmt17(total.imag()) +
                              " signals a contour or sign misconfiguration");
  }
  return total.real();
}

double pearcey_intensity(double s, double quartic, std::size_t nodes) {
  if (s < 0.0) throw ValidationError("window half-width must be nonnegative");
  if (s == 0.0) return 0.0;
  const auto rule = gauss_legendre(nodes).mapped(-s, s);
  std::vector<double> vals(rule.order());
  const PearceyOptions opt{quartic, 0, 1};
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < rule.order(); ++i) vals[i] = pearcey_kernel(rule.nodes[i], rule.nodes[i], opt);
  double total = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) total += rule.weights[i] * vals[i];
  return total;
}

std::string KernelTable::to_csv() const {
  std::ostringstream os;
  os << "# kernel=" << id << '\n';
  for (const auto& [k, v] : metadata) os << "# " << k << '=' << v << '\n';
  for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << fmt17(row[c]);
    os << '\n';
  }
  return os.str();
}

std::vector<double> GridSpec::points() const {
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + static_cast<double>(i) * step;
  return out;
}

GridSpec parse_grid(const std::string& text) {
  GridSpec g{};
  char extra = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%lf%c", &g.lo, &g.hi, &g.step, &extra) != 3) {
    throw ValidationError("grid must be lo:hi:step, got '" + text + "'");
  }
  if (!std::isfinite(g.lo) || !std::isfinite(g.hi) || !(g.step > 0.0) || g.hi < g.lo) {
    throw ValidationError("grid needs finite lo <= hi and step > 0, got '" + text + "'");
  }
  if ((g.hi - g.lo) / g.step > 1e5) throw ValidationError("grid has more than 1e5 points");
  return g;
}

KernelTable tabulate_airy(const GridSpec& grid) {
  KernelTable t{"airy", {"x", "Ai", "Aiprime"}, {}, {{"method", "series |x|<=8, asymptotic beyond"}}};
  const auto xs = grid.points();
  t.rows.resize(xs.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto a = airy(xs[i]);
    t.rows[i] = {xs[i], a.ai, a.aip};
  }
  return t;
}

KernelTable tabulate_tw(const GridSpec& grid, int k, std::size_t m) {
  KernelTable t{"tw", {"x", "F"}, {}, {{"k", std::to_string(k)}, {"m", std::to_string(m)}, {"L", "max(12,3|x|)"}}};
  if (k >= 2) t.metadata.emplace_back("scheme", "Cauchy circle r=0.5, 16 points");
  const auto xs = grid.points();
  t.rows.resize(xs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < xs.size(); ++i) t.rows[i] = {xs[i], tw_cdf(xs[i], k, m)};
  return t;
}

KernelTable tabulate_gk(const GridSpec& grid, int k) {
  KernelTable t{"gk", {"x", "G"}, {}, {{"k", std::to_string(k)}, {"scheme", "k x k Gram determinant"}}};
  const auto xs = grid.points();
  t.rows.resize(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) t.rows[i] = {xs[i], gk_cdf(xs[i], k)};
  return t;
}

KernelTable tabulate_pearcey(const GridSpec& grid, double quartic) {
  KernelTable t{"pearcey",
                {"x", "y", "K", "K_alt", "abs_diff"},
                {},
                {{"quartic", fmt17(quartic)},
                 {"scheme", "ray-then-axis 12x16 / axis-then-ray 10x20"},
                 {"truncation", "c R^4 - (|x|+|y|)(R+1) >= 45"}}};
  const auto xs = grid.points();
  const std::size_t n = xs.size();
  t.rows.resize(n * n);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t idx = 0; idx < n * n; ++idx) {
    const double x = xs[idx / n];
    const double y = xs[idx % n];
    const double a = pearcey_kernel(x, y, {quartic, 0, 1});
    const double b = pearcey_kernel(x, y, {quartic, 1, 1});
    t.rows[idx] = {x, y, a, b, std::abs(a - b)};
  }
  return t;
}

}  // namespace dgue
