#ifndef SMOOTHCHECK_SMOOTHNESS_HPP
#define SMOOTHCHECK_SMOOTHNESS_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "smoothcheck/field.hpp"

namespace smoothcheck {

/// Derivative jumps at one interface, raw and in both scalings:
///   d[alpha]       = J^alpha / h^{p+1-|alpha|}
///   d_tilde[alpha] = J^alpha / (h^{p+1} h_min^{-|alpha|})
/// so d_tilde = d * (h_min/h)^{|alpha|} identically. Entries follow the
/// graded multi-index order for |alpha| <= p.
struct JumpVector {
  int interface_id = -1;
  Vec3 evaluation_point;
  std::vector<double> raw;
  std::vector<double> d;
  std::vector<double> d_tilde;
  double norm_d = 0;        // Euclidean over all entries
  double norm_d_tilde = 0;
  double max_abs_d = 0;
  std::vector<double> norm_d_per_order;  // diagnostics, one entry per k
};

JumpVector scaled_jump_vector(const PiecewisePolyField& field, const Interface& itf);

/// Type A indicator: sum_i h^n ||D_i||^s for finite s, max_i ||D_i|| for inf.
double type_a_indicator(const PiecewisePolyField& field, NormKind s);

/// Interior data at one sample point: scaled derivative differences F (needs
/// the target) and derivative magnitudes M (field only).
struct InteriorVector {
  int element = -1;
  Vec3 point;
  std::vector<double> raw_diff;  // d^alpha (u - u_h), empty without a target
  std::vector<double> f;         // raw_diff / h^{p+1-|alpha|}
  std::vector<double> m;         // |d^alpha u_h|
  double norm_f = 0;
  double max_m = 0;
};

enum class SampleRule { centroid, vertex_average, user_points };
std::string to_string(SampleRule r);

InteriorVector interior_vector(const PiecewisePolyField& field, const TargetFunction* u, int element,
                               const Vec3& point);

double type_i_indicator(const PiecewisePolyField& field, const TargetFunction& u, NormKind s,
                        SampleRule rule = SampleRule::centroid,
                        const std::vector<Vec3>* user_points = nullptr);

/// Flagging policy. Unset D-threshold means the default: flag interfaces
/// with ||D_i|| above ten times the median (a heuristic, not a convergence
/// statement). Unset M-threshold disables magnitude flags.
struct Thresholds {
  std::optional<double> d_norm;
  std::optional<double> m_abs;
};

struct SmoothnessReport {
  int degree = 0;
  int dim = 1;
  double h = 0, h_min = 0;
  SampleRule sample_rule = SampleRule::centroid;
  Thresholds thresholds;          // as supplied
  double d_threshold_used = 0;    // resolved value
  std::optional<double> m_threshold_used;

  std::vector<JumpVector> jumps;            // per interface, sorted by id
  std::vector<InteriorVector> interior;     // per element
  std::map<std::string, double> type_a;     // keys "1", "2", "inf"
  std::map<std::string, double> type_i;     // present when a target was given
  double max_d_norm = 0;
  double max_m = 0;
  std::vector<int> flagged_interfaces;
  std::vector<int> flagged_elements;
  std::string verdict;  // "smooth" or "flagged"

  nlohmann::json to_json() const;
  std::string to_csv() const;  // one row per interface
};

SmoothnessReport smoothness_report(const PiecewisePolyField& field, const TargetFunction* u,
                                   const Thresholds& thresholds = {},
                                   SampleRule rule = SampleRule::centroid,
                                   const std::vector<Vec3>* user_points = nullptr);

}  // namespace smoothcheck

#endif
