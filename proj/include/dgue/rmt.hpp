#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dgue/edges.hpp"
#include "dgue/eigensolver.hpp"
#include "dgue/measure.hpp"
#include "json.hpp"

namespace dgue {

enum class Execution { kParallel, kSerial };

struct SampledSpectrum {
  std::vector<double> eigenvalues;
  std::uint64_t seed;
  std::uint64_t trial;
};

/// W/sqrt(N) + diag(a) for the stream (seed, trial).
HermitianMatrix sample_matrix(std::span<const double> a, std::uint64_t seed, std::uint64_t trial);
SampledSpectrum sample_spectrum(const DeformationModel& model, std::uint64_t seed, std::uint64_t trial = 0);

/// Eigenvalue spectra of trials 0..trials-1, ordered by trial index.
std::vector<std::vector<double>> sample_spectra(const DeformationModel& model, std::size_t trials,
                                                std::uint64_t seed, Execution exec);

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

struct ExperimentResult {
  std::string statistic;
  std::string reference;
  std::vector<std::vector<double>> samples;  // one list per statistic
  std::vector<double> ks;                    // one KS distance per statistic
  std::size_t trials = 0;
  std::size_t discarded = 0;
  std::uint64_t seed = 0;
  bool passed = false;
  nlohmann::json details = nlohmann::json::object();
};

/// The k extreme eigenvalues of the component ending at the edge, rescaled by
/// N^{2/3} alpha about u0N, i.e. by the Airy window 1/alpha; left edges go through the reflected model.
ExperimentResult run_edge_experiment(const DeformationModel& model, const EdgeReport& edge, int k,
                                     std::size_t trials, std::uint64_t seed, double threshold = 0.05,
                                     Execution exec = Execution::kParallel);

/// sqrt(N) (lambda - rho_N) / c_N for the largest eigenvalue of the outlier
/// component, against G_k.
ExperimentResult run_outlier_experiment(const DeformationModel& model, const EdgeReport& spike,
                                        std::size_t trials, std::uint64_t seed, double threshold = 0.05,
                                        Execution exec = Execution::kParallel);

/// Default quartic coefficient of the Pearcey kernel in the window
/// kappa N^{3/4} (lambda - u0N): kappa^8 / 24.
double pearcey_quartic_for(double kappa);

/// Mean count of eigenvalues with kappa N^{3/4} |lambda - u0N| <= s against the
/// integral of K_P(x, x) over [-s, s].
ExperimentResult run_merge_experiment(const DeformationModel& model, const EdgeReport& merge, double s,
                                      std::size_t trials, std::uint64_t seed, double tolerance = 0.15,
                                      double quartic = -1.0, Execution exec = Execution::kParallel);

struct LocalizationResult {
  double fraction;
  std::vector<double> max_distance;  // per trial
};

LocalizationResult localization_check(const DeformationModel& model, std::size_t trials, double epsilon,
                                      std::uint64_t seed, Execution exec = Execution::kParallel);

nlohmann::json to_json(const ExperimentResult& result);
std::string samples_csv(const ExperimentResult& result);

}  // namespace dgue
