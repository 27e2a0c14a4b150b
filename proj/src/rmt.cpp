#include "dgue/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <optional>
#include <sstream>

#include "dgue/errors.hpp"
#include "dgue/kernels.hpp"
#include "dgue/rng.hpp"
#include "dgue/subordination.hpp"

namespace dgue {

namespace {

constexpr double kTieTolerance = 1e-9;
constexpr double kMaxDiscardRate = 0.05;

// Runs f(trial) for every trial and returns the results in trial order. Each
// trial owns its random stream, so the two execution modes agree bit for bit.
template <typename F>
auto run_trials(std::size_t trials, Execution exec, F&& f) -> std::vector<decltype(f(std::size_t{0}))> {
  using R = decltype(f(std::size_t{0}));
  std::vector<R> out(trials);
  std::vector<std::exception_ptr> errors(trials);
  if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::size_t t = 0; t < trials; ++t) {
      try {
        out[t] = f(t);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  } else {
    for (std::size_t t = 0; t < trials; ++t) {
      try {
        out[t] = f(t);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

void require_trials(std::size_t trials) {
  if (trials == 0) throw ValidationError("empty experiment");
}

// Index of the support component nearest to u, or nullopt when two
// components are equally near within the tie tolerance.
std::optional<std::size_t> assign_component(const std::vector<SupportComponent>& comps, double u) {
  double best = std::numeric_limits<double>::infinity();
  double second = best;
  std::size_t idx = 0;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const auto& r = comps[c].u_range;
    const double d = (u >= r.lo && u <= r.hi) ? 0.0 : std::min(std::abs(u - r.lo), std::abs(u - r.hi));
    if (d < best) {
      second = best;
      best = d;
      idx = c;
    } else if (d < second) {
      second = d;
    }
  }
  if (best > 0.0 && second - best <= kTieTolerance) return std::nullopt;
  return idx;
}

struct ComponentPick {
  std::vector<double> values;  // descending
  bool ambiguous = false;
};

ComponentPick pick_component(const std::vector<double>& eig, const std::vector<SupportComponent>& comps,
                             std::size_t target) {
  ComponentPick p;
  for (auto it = eig.rbegin(); it != eig.rend(); ++it) {
    const auto c = assign_component(comps, *it);
    if (!c) {
      p.ambiguous = true;
      continue;
    }
    if (*c == target) p.values.push_back(*it);
  }
  return p;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

HermitianMatrix sample_matrix(std::span<const double> a, std::uint64_t seed, std::uint64_t trial) {
  const std::size_t n = a.size();
  HermitianMatrix h(n);
  NormalStream g(seed, trial);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  const double so = s * std::sqrt(0.5);
  for (std::size_t j = 0; j < n; ++j) {
    h.set(j, j, a[j] + s * g.next());
    for (std::size_t i = j + 1; i < n; ++i) {
      const double re = so * g.next();
      const double im = so * g.next();
      h.set_hermitian(i, j, {re, im});
    }
  }
  return h;
}

SampledSpectrum sample_spectrum(const DeformationModel& model, std::uint64_t seed, std::uint64_t trial) {
  const auto a = model.spectrum();
  auto h = sample_matrix(a, seed, trial);
  return {hermitian_eigenvalues_inplace(h), seed, trial};
}

std::vector<std::vector<double>> sample_spectra(const DeformationModel& model, std::size_t trials,
                                                std::uint64_t seed, Execution exec) {
  const auto a = model.spectrum();
  return run_trials(trials, exec, [&](std::size_t t) {
    auto h = sample_matrix(a, seed, t);
    return hermitian_eigenvalues_inplace(h);
  });
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw ValidationError("ks_distance of an empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, std::abs((i + 1) / n - f), std::abs(i / n - f)});
  }
  return std::min(d, 1.0);
}

ExperimentResult run_edge_experiment(const DeformationModel& model_in, const EdgeReport& edge_in, int k,
                                     std::size_t trials, std::uint64_t seed, double threshold,
                                     Execution exec) {
  require_trials(trials);
  if (edge_in.kind != EdgeKind::kRightEdge && edge_in.kind != EdgeKind::kLeftEdge) {
    throw ValidationError("edge experiment needs a RightEdge or LeftEdge report");
  }
  if (k < 1 || k > 4) throw ValidationError("edge experiment supports 1 <= k <= 4");
  const bool reflect = edge_in.kind == EdgeKind::kLeftEdge;
  const DeformationModel model = reflect ? model_in.reflected() : model_in;
  EdgeReport edge = edge_in;
  if (reflect) {
    edge.kind = EdgeKind::kRightEdge;
    edge.t0 = -edge.t0;
    edge.u0 = -edge.u0;
    if (edge.extras.contains("bracket")) edge.extras = {{"bracket", edge_in.extras["bracket"]}};
  }
  const auto fe = finite_n_edge(model, edge);
  const BianeMap finite(model.spectral_measure());
  const auto& comps = finite.support_components();
  std::size_t target = 0;
  for (std::size_t c = 1; c < comps.size(); ++c) {
    if (std::abs(comps[c].u_range.hi - fe.u0N) < std::abs(comps[target].u_range.hi - fe.u0N)) target = c;
  }
  const double n = model.n();
  // Steepest descent at the degenerate point gives the Airy window (|F'''| / 2)^{1/3} N^{-2/3},
  // which is the reciprocal of alpha.
  const double window = 1.0 / edge.scale;
  const double factor = std::pow(n, 2.0 / 3.0) / window;
  const auto a = model.spectrum();

  struct Trial {
    std::vector<double> stats;
    bool kept = false;
  };
  const auto per_trial = run_trials(trials, exec, [&](std::size_t t) {
    auto h = sample_matrix(a, seed, t);
    const auto eig = hermitian_eigenvalues_inplace(h);
    const auto pick = pick_component(eig, comps, target);
    Trial out;
    if (pick.ambiguous || pick.values.size() < static_cast<std::size_t>(k)) return out;
    for (int j = 0; j < k; ++j) out.stats.push_back(factor * (pick.values[j] - fe.u0N));
    out.kept = true;
    return out;
  });

  ExperimentResult r;
  r.statistic = "edge";
  r.reference = "tw_cdf";
  r.trials = trials;
  r.seed = seed;
  r.samples.assign(k, {});
  for (const auto& t : per_trial) {
    if (!t.kept) {
      ++r.discarded;
      continue;
    }
    for (int j = 0; j < k; ++j) r.samples[j].push_back(t.stats[j]);
  }
  if (r.samples[0].empty()) throw NotFoundError("edge experiment: every trial was discarded");
  for (int j = 0; j < k; ++j) {
    r.ks.push_back(ks_distance(r.samples[j], [j](double x) { return tw_cdf(x, j + 1); }));
  }
  const double discard_rate = static_cast<double>(r.discarded) / trials;
  r.passed = discard_rate <= kMaxDiscardRate &&
             std::all_of(r.ks.begin(), r.ks.end(), [&](double d) { return d <= threshold; });
  r.details = {{"N", model.n()},
               {"kind", to_string(edge_in.kind)},
               {"reflected", reflect},
               {"alpha", edge.scale},
               {"window", window},
               {"u0", edge_in.u0},
               {"u0N", reflect ? -fe.u0N : fe.u0N},
               {"t0N", reflect ? -fe.t0N : fe.t0N},
               {"k", k},
               {"threshold", threshold},
               {"discard_rate", discard_rate}};
  return r;
}

ExperimentResult run_outlier_experiment(const DeformationModel& model, const EdgeReport& spike,
                                        std::size_t trials, std::uint64_t seed, double threshold,
                                        Execution exec) {
  require_trials(trials);
  if (spike.kind != EdgeKind::kOutlier) {
    throw ValidationError("outlier experiment needs an Outlier report; theta = " + fmt17(spike.t0) +
                          " is " + to_string(spike.kind));
  }
  const double theta = spike.t0;
  const int k = spike.multiplicity;
  const double rho = rho_n(model, theta);
  const double c = c_n(model, theta);
  const BianeMap finite(model.spectral_measure());
  const auto& comps = finite.support_components();
  const auto target = assign_component(comps, rho);
  if (!target) throw IllConditionedError("rho_N is equidistant from two support components");
  // lambda fluctuates about rho_N with standard deviation c_N / sqrt(N) when k = 1.
  const double scale = std::sqrt(static_cast<double>(model.n())) / c;
  const auto a = model.spectrum();

  const auto per_trial = run_trials(trials, exec, [&](std::size_t t) {
    auto h = sample_matrix(a, seed, t);
    const auto eig = hermitian_eigenvalues_inplace(h);
    const auto pick = pick_component(eig, comps, *target);
    if (pick.ambiguous || pick.values.size() < static_cast<std::size_t>(k)) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    return scale * (pick.values.front() - rho);
  });

  ExperimentResult r;
  r.statistic = "outlier";
  r.reference = "gk_cdf";
  r.trials = trials;
  r.seed = seed;
  r.samples.assign(1, {});
  for (double v : per_trial) {
    if (std::isnan(v)) {
      ++r.discarded;
    } else {
      r.samples[0].push_back(v);
    }
  }
  if (r.samples[0].empty()) throw NotFoundError("outlier experiment: every trial was discarded");
  r.ks.push_back(ks_distance(r.samples[0], [k](double x) { return gk_cdf(x, k); }));
  const double discard_rate = static_cast<double>(r.discarded) / trials;
  r.passed = discard_rate <= kMaxDiscardRate && r.ks[0] <= threshold;
  r.details = {{"N", model.n()},   {"theta", theta},         {"k", k},
               {"rhoN", rho},      {"cN", c},                {"c", spike.scale},
               {"u0", spike.u0},   {"threshold", threshold}, {"discard_rate", discard_rate}};
  return r;
}

double pearcey_quartic_for(double kappa) { return std::pow(kappa, 8) / 24.0; }

ExperimentResult run_merge_experiment(const DeformationModel& model, const EdgeReport& merge, double s,
                                      std::size_t trials, std::uint64_t seed, double tolerance, double quartic,
                                      Execution exec) {
  require_trials(trials);
  if (merge.kind != EdgeKind::kMergePoint) throw ValidationError("merge experiment needs a MergePoint report");
  if (s < 0.0) throw ValidationError("window half-width must be nonnegative");
  const double kappa = merge.scale;
  if (quartic <= 0.0) quartic = pearcey_quartic_for(kappa);
  const auto fm = finite_n_merge(model, merge);
  const double factor = kappa * std::pow(static_cast<double>(model.n()), 0.75);
  const auto a = model.spectrum();

  const auto counts = run_trials(trials, exec, [&](std::size_t t) {
    auto h = sample_matrix(a, seed, t);
    const auto eig = hermitian_eigenvalues_inplace(h);
    double count = 0.0;
    for (double l : eig) {
      if (std::abs(factor * (l - fm.u0N)) <= s) count += 1.0;
    }
    return count;
  });

  double mean = 0.0;
  for (double c : counts) mean += c;
  mean /= trials;
  double var = 0.0;
  for (double c : counts) var += (c - mean) * (c - mean);
  var = trials > 1 ? var / (trials - 1) : 0.0;
  const double se = std::sqrt(var / trials);
  const double integral = pearcey_intensity(s, quartic);
  const double rel = integral > 0.0 ? std::abs(mean - integral) / integral : (mean == 0.0 ? 0.0 : 1.0);
  // Under-powered runs cannot certify the tolerance and fail.
  const bool powered = trials > 1 && se <= tolerance * integral / 3.0;

  ExperimentResult r;
  r.statistic = "merge_count";
  r.reference = "pearcey_intensity";
  r.trials = trials;
  r.seed = seed;
  r.samples = {counts};
  r.passed = rel <= tolerance && (integral == 0.0 ? mean == 0.0 : powered);
  r.details = {{"N", model.n()},
               {"kappa", kappa},
               {"quartic", quartic},
               {"window", s},
               {"u0N", fm.u0N},
               {"t0N", fm.t0N},
               {"nondegenerate_at_N", fm.nondegenerate},
               {"mean_count", mean},
               {"variance", var},
               {"standard_error", se},
               {"kernel_integral", integral},
               {"relative_error", rel},
               {"tolerance", tolerance},
               {"powered", powered}};
  return r;
}

LocalizationResult localization_check(const DeformationModel& model, std::size_t trials, double epsilon,
                                      std::uint64_t seed, Execution exec) {
  require_trials(trials);
  if (!(epsilon > 0.0)) throw ValidationError("localization epsilon must be positive");
  const BianeMap finite(model.spectral_measure());
  const auto a = model.spectrum();
  LocalizationResult out;
  out.max_distance = run_trials(trials, exec, [&](std::size_t t) {
    auto h = sample_matrix(a, seed, t);
    const auto eig = hermitian_eigenvalues_inplace(h);
    double worst = 0.0;
    for (double l : eig) worst = std::max(worst, finite.distance_to_support(l));
    return worst;
  });
  std::size_t inside = 0;
  for (double d : out.max_distance) inside += d <= epsilon ? 1 : 0;
  out.fraction = static_cast<double>(inside) / trials;
  return out;
}

nlohmann::json to_json(const ExperimentResult& r) {
  nlohmann::json j;
  j["statistic"] = r.statistic;
  j["reference"] = r.reference;
  j["trials"] = r.trials;
  j["discarded"] = r.discarded;
  j["seed"] = r.seed;
  j["ks"] = r.ks;
  j["passed"] = r.passed;
  j["sample_count"] = r.samples.empty() ? 0 : r.samples[0].size();
  j["details"] = r.details;
  return j;
}

std::string samples_csv(const ExperimentResult& r) {
  std::ostringstream os;
  os << "# statistic=" << r.statistic << "\n# reference=" << r.reference << "\n# seed=" << r.seed << '\n';
  os << "index";
  for (std::size_t j = 0; j < r.samples.size(); ++j) os << ",stat_" << (j + 1);
  os << '\n';
  const std::size_t rows = r.samples.empty() ? 0 : r.samples[0].size();
  for (std::size_t i = 0; i < rows; ++i) {
    os << i;
    for (const auto& col : r.samples) os << ',' << fmt17(col[i]);
    os << '\n';
  }
  return os.str();
}

}  // namespace dgue
