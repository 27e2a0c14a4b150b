#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace dgue {

struct Atom {
  double x;
  double w;
};

/// Probability measure with finitely many atoms.
///
/// Atoms are kept sorted ascending with positions closer than
/// `kMergeTolerance` merged. Weights must be strictly positive and sum to one
/// within `kMassTolerance`; anything else is rejected at construction.
class DiscreteMeasure {
 public:
  static constexpr double kMassTolerance = 1e-12;
  static constexpr double kMergeTolerance = 1e-12;

  explicit DiscreteMeasure(std::vector<Atom> atoms);

  static DiscreteMeasure dirac(double x);
  /// Empirical measure of `xs`: weight count/n per distinct value.
  static DiscreteMeasure empirical(std::span<const double> xs);
  /// Midpoint grid of `m` equal atoms on [lo, hi].
  static DiscreteMeasure uniform_grid(double lo, double hi, std::size_t m);

  std::span<const Atom> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  double min() const { return atoms_.front().x; }
  double max() const { return atoms_.back().x; }
  double diameter() const { return max() - min(); }
  double mean() const;
  double variance() const;

  /// Distance from t to the nearest atom.
  double distance_to_atoms(double t) const;
  /// Index of the first atom with position >= t.
  std::size_t lower_index(double t) const;

  DiscreteMeasure reflected() const;
  DiscreteMeasure shifted(double c) const;

 private:
  struct Unchecked {};
  DiscreteMeasure(std::vector<Atom> atoms, Unchecked) : atoms_(std::move(atoms)) {}

  std::vector<Atom> atoms_;
};

/// Plain integral of dmu(x) / (z - x)^(order + 1) for order 0..3.
/// Real z must sit farther than 1e-14 from every atom.
double stieltjes(const DiscreteMeasure& mu, double z, int order);
std::complex<double> stieltjes(const DiscreteMeasure& mu, std::complex<double> z, int order);

/// F^{-1}((i - 1/2) / m) for i = 1..m, F the distribution function of nu.
std::vector<double> quantile_discretize(const DiscreteMeasure& nu, std::size_t m);

struct Spike {
  double theta;
  int k;
};

/// Spiked eigenvalues with multiplicities, thetas strictly decreasing.
class SpikeSet {
 public:
  SpikeSet() = default;
  explicit SpikeSet(std::vector<Spike> spikes);

  std::span<const Spike> spikes() const { return spikes_; }
  bool empty() const { return spikes_.empty(); }
  int rank() const;
  std::optional<Spike> find(double theta) const;

 private:
  std::vector<Spike> spikes_;
};

/// nu, the spikes, N and the rule producing the N - r bulk eigenvalues.
class DeformationModel {
 public:
  enum class BulkRule { kQuantile, kExplicit };

  /// Bulk from quantiles of nu.
  DeformationModel(DiscreteMeasure nu, SpikeSet spikes, int n);
  /// Bulk given explicitly (length n - r).
  DeformationModel(DiscreteMeasure nu, SpikeSet spikes, int n, std::vector<double> bulk);

  const DiscreteMeasure& nu() const { return nu_; }
  const SpikeSet& spikes() const { return spikes_; }
  int n() const { return n_; }
  int r() const { return spikes_.rank(); }
  BulkRule bulk_rule() const { return rule_; }
  std::span<const double> bulk() const { return bulk_; }

  /// All N eigenvalues of A_N, ascending.
  std::vector<double> spectrum() const;
  /// mu_{A_N}.
  DiscreteMeasure spectral_measure() const;
  /// Largest distance from a bulk eigenvalue to supp(nu).
  double max_bulk_distance() const;

  DeformationModel with_n(int n) const;
  DeformationModel reflected() const;
  DeformationModel shifted(double c) const;

 private:
  void validate() const;

  DiscreteMeasure nu_;
  SpikeSet spikes_;
  int n_;
  BulkRule rule_;
  std::vector<double> bulk_;
};

DeformationModel load_model(const nlohmann::json& document);
DeformationModel load_model_file(const std::filesystem::path& path);
/// CSV alternative: `x,w` rows for nu, optional `theta,k` sidecar for spikes.
DeformationModel load_model_csv(const std::filesystem::path& measure_csv,
                                const std::optional<std::filesystem::path>& spikes_csv,
                                int n);
nlohmann::json to_json(const DeformationModel& model);

}  // namespace dgue
