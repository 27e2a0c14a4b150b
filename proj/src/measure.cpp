#include "dgue/measure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "dgue/errors.hpp"
#include "dgue/summation.hpp"

namespace dgue {

namespace {

constexpr double kAtomClearance = 1e-14;

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(std::vector<Atom> atoms) {
  if (atoms.empty()) throw ValidationError("measure has no atoms");
  CompensatedSum<double> mass;
  for (const auto& a : atoms) {
    if (!std::isfinite(a.x)) throw ValidationError("atom position is not finite");
    if (!(a.w > 0.0) || !std::isfinite(a.w)) {
      throw ValidationError("atom weight must be positive, got " + fmt_double(a.w));
    }
    mass.add(a.w);
  }
  if (std::abs(mass.value() - 1.0) > kMassTolerance) {
    throw ValidationError("mass ≠ 1 (total weight " + fmt_double(mass.value()) + ")");
  }
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.x < b.x; });
  atoms_.reserve(atoms.size());
  for (const auto& a : atoms) {
    if (!atoms_.empty() && a.x - atoms_.back().x <= kMergeTolerance) {
      auto& last = atoms_.back();
      double w = last.w + a.w;
      last.x = (last.x * last.w + a.x * a.w) / w;
      last.w = w;
    } else {
      atoms_.push_back(a);
    }
  }
}

DiscreteMeasure DiscreteMeasure::dirac(double x) { return DiscreteMeasure({{x, 1.0}}); }

DiscreteMeasure DiscreteMeasure::empirical(std::span<const double> xs) {
  if (xs.empty()) throw ValidationError("empirical measure of an empty sample");
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<Atom> atoms;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] - sorted[i] <= kMergeTolerance) ++j;
    atoms.push_back({sorted[i], static_cast<double>(j - i) / n});
    i = j;
  }
  // Weights are exact count/n ratios, so the constructor's mass check only
  // sees rounding from the divisions.
  return DiscreteMeasure(std::move(atoms));
}

DiscreteMeasure DiscreteMeasure::uniform_grid(double lo, double hi, std::size_t m) {
  if (m == 0 || !(hi > lo)) throw ValidationError("uniform_grid needs m >= 1 and hi > lo");
  std::vector<Atom> atoms(m);
  const double h = (hi - lo) / static_cast<double>(m);
  for (std::size_t j = 0; j < m; ++j) {
    atoms[j] = {lo + (static_cast<double>(j) + 0.5) * h, 1.0 / static_cast<double>(m)};
  }
  return DiscreteMeasure(std::move(atoms));
}

double DiscreteMeasure::mean() const {
  CompensatedSum<double> s;
  for (const auto& a : atoms_) s.add(a.w * a.x);
  return s.value();
}

double DiscreteMeasure::variance() const {
  const double m = mean();
  CompensatedSum<double> s;
  for (const auto& a : atoms_) s.add(a.w * (a.x - m) * (a.x - m));
  return s.value();
}

std::size_t DiscreteMeasure::lower_index(double t) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), t,
                             [](const Atom& a, double v) { return a.x < v; });
  return static_cast<std::size_t>(it - atoms_.begin());
}

double DiscreteMeasure::distance_to_atoms(double t) const {
  const std::size_t i = lower_index(t);
  double d = std::numeric_limits<double>::infinity();
  if (i < atoms_.size()) d = std::min(d, std::abs(atoms_[i].x - t));
  if (i > 0) d = std::min(d, std::abs(t - atoms_[i - 1].x));
  return d;
}

DiscreteMeasure DiscreteMeasure::reflected() const {
  std::vector<Atom> out(atoms_.rbegin(), atoms_.rend());
  for (auto& a : out) a.x = -a.x;
  return DiscreteMeasure(std::move(out), Unchecked{});
}

DiscreteMeasure DiscreteMeasure::shifted(double c) const {
  std::vector<Atom> out = atoms_;
  for (auto& a : out) a.x += c;
  return DiscreteMeasure(std::move(out), Unchecked{});
}

double stieltjes(const DiscreteMeasure& mu, double z, int order) {
  if (order < 0 || order > 3) throw ValidationError("stieltjes order must be in 0..3");
  if (mu.distance_to_atoms(z) <= kAtomClearance) {
    throw ValidationError("stieltjes: z = " + fmt_double(z) + " coincides with an atom");
  }
  CompensatedSum<double> s;
  for (const auto& a : mu.atoms()) {
    const double r = 1.0 / (z - a.x);
    double p = r;
    for (int i = 0; i < order; ++i) p *= r;
    s.add(a.w * p);
  }
  return s.value();
}

std::complex<double> stieltjes(const DiscreteMeasure& mu, std::complex<double> z, int order) {
  if (order < 0 || order > 3) throw ValidationError("stieltjes order must be in 0..3");
  if (z.imag() == 0.0) return stieltjes(mu, z.real(), order);
  CompensatedSum<std::complex<double>> s;
  for (const auto& a : mu.atoms()) {
    const std::complex<double> r = 1.0 / (z - a.x);
    std::complex<double> p = r;
    for (int i = 0; i < order; ++i) p *= r;
    s.add(a.w * p);
  }
  return s.value();
}

std::vector<double> quantile_discretize(const DiscreteMeasure& nu, std::size_t m) {
  if (m == 0) throw ValidationError("quantile_discretize needs m >= 1");
  // Tolerance on ties q == F(x): the cumulative sums carry rounding, while
  // genuine gaps between q and F are at least 1/(2 m n_atoms).
  constexpr double kTieTolerance = 1e-12;
  const auto atoms = nu.atoms();
  std::vector<double> cdf(atoms.size());
  CompensatedSum<double> acc;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    acc.add(atoms[j].w);
    cdf[j] = acc.value();
  }
  std::vector<double> out(m);
  std::size_t j = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double q = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
    while (j + 1 < atoms.size() && cdf[j] < q - kTieTolerance) ++j;
    out[i] = atoms[j].x;
  }
  return out;
}

SpikeSet::SpikeSet(std::vector<Spike> spikes) : spikes_(std::move(spikes)) {
  std::sort(spikes_.begin(), spikes_.end(),
            [](const Spike& a, const Spike& b) { return a.theta > b.theta; });
  for (std::size_t i = 0; i < spikes_.size(); ++i) {
    if (!std::isfinite(spikes_[i].theta)) throw ValidationError("spike theta is not finite");
    if (spikes_[i].k <= 0) throw ValidationError("spike multiplicity must be positive");
    if (i > 0 && spikes_[i - 1].theta - spikes_[i].theta <= DiscreteMeasure::kMergeTolerance) {
      throw ValidationError("spike thetas must be pairwise distinct");
    }
  }
}

int SpikeSet::rank() const {
  int r = 0;
  for (const auto& s : spikes_) r += s.k;
  return r;
}

std::optional<Spike> SpikeSet::find(double theta) const {
  for (const auto& s : spikes_) {
    if (std::abs(s.theta - theta) <= DiscreteMeasure::kMergeTolerance) return s;
  }
  return std::nullopt;
}

DeformationModel::DeformationModel(DiscreteMeasure nu, SpikeSet spikes, int n)
    : nu_(std::move(nu)), spikes_(std::move(spikes)), n_(n), rule_(BulkRule::kQuantile) {
  if (n_ <= r()) throw ValidationError("N must exceed the spike rank r");
  bulk_ = quantile_discretize(nu_, static_cast<std::size_t>(n_ - r()));
  validate();
}

DeformationModel::DeformationModel(DiscreteMeasure nu, SpikeSet spikes, int n,
                                   std::vector<double> bulk)
    : nu_(std::move(nu)),
      spikes_(std::move(spikes)),
      n_(n),
      rule_(BulkRule::kExplicit),
      bulk_(std::move(bulk)) {
  if (n_ <= r()) throw ValidationError("N must exceed the spike rank r");
  if (bulk_.size() != static_cast<std::size_t>(n_ - r())) {
    throw ValidationError("explicit bulk must list N - r = " + std::to_string(n_ - r()) +
                          " eigenvalues, got " + std::to_string(bulk_.size()));
  }
  for (double b : bulk_) {
    if (!std::isfinite(b)) throw ValidationError("bulk eigenvalue is not finite");
  }
  std::sort(bulk_.begin(), bulk_.end());
  validate();
}

void DeformationModel::validate() const {
  for (const auto& s : spikes_.spikes()) {
    if (nu_.distance_to_atoms(s.theta) <= DiscreteMeasure::kMergeTolerance) {
      throw ValidationError("spike " + fmt_double(s.theta) + " lies on supp(nu)");
    }
    auto it = std::lower_bound(bulk_.begin(), bulk_.end(), s.theta);
    const bool hit =
        (it != bulk_.end() && std::abs(*it - s.theta) <= DiscreteMeasure::kMergeTolerance) ||
        (it != bulk_.begin() &&
         std::abs(*std::prev(it) - s.theta) <= DiscreteMeasure::kMergeTolerance);
    if (hit) {
      throw ValidationError("spike " + fmt_double(s.theta) + " coincides with a bulk eigenvalue");
    }
  }
}

std::vector<double> DeformationModel::spectrum() const {
  std::vector<double> out(bulk_.begin(), bulk_.end());
  for (const auto& s : spikes_.spikes()) out.insert(out.end(), static_cast<std::size_t>(s.k), s.theta);
  std::sort(out.begin(), out.end());
  return out;
}

DiscreteMeasure DeformationModel::spectral_measure() const {
  const auto spec = spectrum();
  return DiscreteMeasure::empirical(spec);
}

double DeformationModel::max_bulk_distance() const {
  double d = 0.0;
  for (double b : bulk_) d = std::max(d, nu_.distance_to_atoms(b));
  return d;
}

DeformationModel DeformationModel::with_n(int n) const {
  if (rule_ == BulkRule::kExplicit) {
    throw ValidationError("cannot resize a model with an explicit bulk");
  }
  return DeformationModel(nu_, spikes_, n);
}

DeformationModel DeformationModel::reflected() const {
  std::vector<Spike> sp;
  for (const auto& s : spikes_.spikes()) sp.push_back({-s.theta, s.k});
  std::vector<double> bulk(bulk_.rbegin(), bulk_.rend());
  for (double& b : bulk) b = -b;
  return DeformationModel(nu_.reflected(), SpikeSet(std::move(sp)), n_, std::move(bulk));
}

DeformationModel DeformationModel::shifted(double c) const {
  std::vector<Spike> sp;
  for (const auto& s : spikes_.spikes()) sp.push_back({s.theta + c, s.k});
  std::vector<double> bulk = bulk_;
  for (double& b : bulk) b += c;
  return DeformationModel(nu_.shifted(c), SpikeSet(std::move(sp)), n_, std::move(bulk));
}

DeformationModel load_model(const nlohmann::json& doc) {
  try {
    if (!doc.is_object()) throw ValidationError("model document must be a JSON object");
    const auto& atoms_json = doc.at("nu").at("atoms");
    if (!atoms_json.is_array()) throw ValidationError("nu.atoms must be an array");
    std::vector<Atom> atoms;
    for (const auto& a : atoms_json) atoms.push_back({a.at("x").get<double>(), a.at("w").get<double>()});
    std::vector<Spike> spikes;
    if (doc.contains("spikes")) {
      for (const auto& s : doc.at("spikes")) {
        spikes.push_back({s.at("theta").get<double>(), s.at("k").get<int>()});
      }
    }
    const int n = doc.at("N").get<int>();
    const std::string rule = doc.value("bulk_rule", std::string("quantile"));
    DiscreteMeasure nu(std::move(atoms));
    SpikeSet spike_set(std::move(spikes));
    if (rule == "quantile") return DeformationModel(std::move(nu), std::move(spike_set), n);
    if (rule == "explicit") {
      auto bulk = doc.at("bulk").get<std::vector<double>>();
      return DeformationModel(std::move(nu), std::move(spike_set), n, std::move(bulk));
    }
    throw ValidationError("unknown bulk_rule '" + rule + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed model document: ") + e.what());
  }
}

DeformationModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed model document: " + std::string(e.what()));
  }
  return load_model(doc);
}

namespace {

std::vector<std::vector<std::string>> read_csv_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

double parse_number(const std::string& s, const std::filesystem::path& path) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("non-numeric cell '" + s + "' in " + path.string());
  }
}

bool is_header(const std::vector<std::string>& row) {
  if (row.empty()) return false;
  try {
    std::size_t pos = 0;
    (void)std::stod(row[0], &pos);
    return false;
  } catch (const std::exception&) {
    return true;
  }
}

}  // namespace

DeformationModel load_model_csv(const std::filesystem::path& measure_csv,
                                const std::optional<std::filesystem::path>& spikes_csv, int n) {
  auto rows = read_csv_rows(measure_csv);
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i == 0 && is_header(rows[i])) continue;
    if (rows[i].size() != 2) throw ValidationError("measure CSV rows must be x,w");
    atoms.push_back({parse_number(rows[i][0], measure_csv), parse_number(rows[i][1], measure_csv)});
  }
  std::vector<Spike> spikes;
  if (spikes_csv) {
    auto srows = read_csv_rows(*spikes_csv);
    for (std::size_t i = 0; i < srows.size(); ++i) {
      if (i == 0 && is_header(srows[i])) continue;
      if (srows[i].size() != 2) throw ValidationError("spike CSV rows must be theta,k");
      spikes.push_back({parse_number(srows[i][0], *spikes_csv),
                        static_cast<int>(parse_number(srows[i][1], *spikes_csv))});
    }
  }
  return DeformationModel(DiscreteMeasure(std::move(atoms)), SpikeSet(std::move(spikes)), n);
}

nlohmann::json to_json(const DeformationModel& model) {
  nlohmann::json doc;
  auto& atoms = doc["nu"]["atoms"] = nlohmann::json::array();
  for (const auto& a : model.nu().atoms()) atoms.push_back({{"x", a.x}, {"w", a.w}});
  doc["spikes"] = nlohmann::json::array();
  for (const auto& s : model.spikes().spikes()) doc["spikes"].push_back({{"theta", s.theta}, {"k", s.k}});
  doc["N"] = model.n();
  if (model.bulk_rule() == DeformationModel::BulkRule::kQuantile) {
    doc["bulk_rule"] = "quantile";
  } else {
    doc["bulk_rule"] = "explicit";
    doc["bulk"] = std::vector<double>(model.bulk().begin(), model.bulk().end());
  }
  return doc;
}

}  // namespace dgue
