#pragma once

#include <string>
#include <vector>

#include "dgue/measure.hpp"
#include "dgue/subordination.hpp"
#include "json.hpp"

namespace dgue {

enum class EdgeKind { kRightEdge, kLeftEdge, kMergePoint, kOutlier, kSticking };

std::string to_string(EdgeKind kind);

/// Second to fourth derivatives of F at t: 1 - m2, 2 m3, -6 m4 with
/// m_p = integral of dmu/(t-x)^p.
struct FDerivatives {
  double order2;
  double order3;
  double order4;
};

FDerivatives f_derivatives(const DiscreteMeasure& mu, double t);

struct EdgeReport {
  EdgeKind kind;
  double t0;     // preimage under psi, or theta for spikes
  double u0;     // limiting location
  double u0N;    // finite-N location, NaN until attached
  double scale;  // alpha, kappa or c
  int multiplicity = 0;
  nlohmann::json extras = nlohmann::json::object();
};

inline constexpr double kMergeThreshold = 1e-9;
inline constexpr double kIllConditionedThreshold = 1e-6;
inline constexpr double kEdgeThreshold = 1e-9;

/// Every finite endpoint or tangency of U, ordered along the line.
std::vector<EdgeReport> classify_boundary_points(const BianeMap& map);
std::vector<EdgeReport> classify_boundary_points(const DiscreteMeasure& nu);

double edge_scale_alpha(const DiscreteMeasure& mu, double t0);
double merge_scale_kappa(const DiscreteMeasure& mu, double t0);
EdgeReport outlier_report(const DiscreteMeasure& nu, const Spike& spike);

double rho_n(const DeformationModel& model, double theta);
/// sqrt(1 - (1/N) sum over y != theta of 1/(theta - y)^2).
double c_n(const DeformationModel& model, double theta);

struct FiniteNEdge {
  double t0N;
  double u0N;
  double predicted_u0N;
  double eps;
  double eps_prime;
};

/// eps_N(t) = (1/N) sum over bulk of 1/(t - beta) - m_nu(t) and its t-derivative.
std::pair<double, double> eps_n(const DeformationModel& model, double t);

FiniteNEdge finite_n_edge(const DeformationModel& model, const EdgeReport& edge);

struct FiniteNMerge {
  double t0N;
  double u0N;
  double second_moment_gap;  // integral of dmu_AN/(t0N-x)^2 - 1
  bool nondegenerate;
};

FiniteNMerge finite_n_merge(const DeformationModel& model, const EdgeReport& merge);

struct OutlierComponent {
  double t1N;
  double t2N;
  double LN;
  double DN;
  double LN_asymptotic;
  double DN_asymptotic;
  double rhoN;
  double midpoint_gap;  // |(LN + DN)/2 - rhoN|
};

OutlierComponent outlier_component_n(const DeformationModel& model, const Spike& spike);

/// Limiting reports for the boundary of U_nu and for every spike, with the
/// finite-N data of the model attached.
std::vector<EdgeReport> analyze_edges(const DeformationModel& model);

nlohmann::json to_json(const EdgeReport& report);
std::string edges_csv(const std::vector<EdgeReport>& reports);

}  // namespace dgue
