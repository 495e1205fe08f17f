#ifndef SMOOTHCHECK_BOUNDS_HPP
#define SMOOTHCHECK_BOUNDS_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "smoothcheck/field.hpp"
#include "smoothcheck/qform.hpp"
#include "smoothcheck/smoothness.hpp"

namespace smoothcheck {

/// One safe disk at one interface: the minimum over degree-p polynomials of
/// the squared L2 distance to the field equals h_min^n h^{2p+2} Q(D~) after
/// rotating the jump data into the interface frame; any single-polynomial
/// dual field bounds that minimum from above. The identity is exact up to
/// quadrature because the field restricted to each half-disk is its own
/// degree-p Taylor expansion at the evaluation point.
struct LocalBoundCheck {
  double lhs = 0;           // || u_I - u_R ||^2 over the disk
  double min_residual = 0;  // min over P_p of || v - u_R ||^2 over the disk
  double q_value = 0;       // h_min^n h^{2p+2} Q(D~)
  double ratio = 0;         // min_residual / q_value
  double identity_rel_err = 0;
  bool inequality_ok = false;
};

LocalBoundCheck local_lower_bound_check(const PiecewisePolyField& field, const DualField& dual_field,
                                        const Interface& itf, double delta);

/// Global lower-bound report: error >= C1 h^{p+1} (indicator - seminorm).
/// C1 is not computable, so the report carries the ratio
/// error / (h^{p+1} max(bracket, 0)) and never passes or fails on its own.
struct GlobalBoundReport {
  NormKind s = NormKind::l2;
  double error = 0;
  double indicator_term = 0;  // (sum h^n ||D||^s)^{1/s} or max ||D||
  double seminorm = 0;
  double bracket = 0;  // indicator_term - seminorm
  std::optional<double> ratio;
  double cp = 0;  // positivity constant of the supplied form, for context
  std::string note;
};

GlobalBoundReport global_lower_bound_report(const TargetFunction& u, const PiecewisePolyField& field,
                                            NormKind s, const QuadraticForm& qf);

// --- refinement studies ------------------------------------------------------

enum class ApproxMethod { lagrange_interpolant, l2_element_fit, from_files };
std::string to_string(ApproxMethod m);
ApproxMethod approx_method_from_string(const std::string& s);

struct StudyConfig {
  std::string target = "sin_pi_x";
  nlohmann::json target_params;
  ElementKind kind = ElementKind::interval;
  int degree = 1;
  ApproxMethod method = ApproxMethod::lagrange_interpolant;
  int levels = 5;
  int base_divisions = 0;  // 0: kind-dependent default (8 in 1D, 4 otherwise)
  std::vector<NormKind> norms = {NormKind::l2};
  std::vector<std::string> field_files;  // for ApproxMethod::from_files
  SampleRule sample_rule = SampleRule::centroid;
  bool inject_jump = false;  // corrupt one element per level by an O(1) bump
  // seeded interior-vertex jitter of the base mesh, as a fraction of h_min;
  // nonzero values give a generic quasi-uniform family free of the
  // superconvergence that exact grids show at symmetric evaluation points
  double base_jitter = 0.0;
  std::uint64_t jitter_seed = 12345;
};

struct StudyLevel {
  int level = 0;
  double h = 0, h_min = 0;
  int n_elements = 0, n_interfaces = 0;
  std::map<std::string, double> error;   // by norm name
  std::map<std::string, double> type_a;  // "1", "2", "inf"
  std::map<std::string, double> type_i;  // empty when no target
  std::vector<double> max_jump_per_order;
  double max_d_norm = 0;
};

/// Log-log least-squares fit over the finest levels. Quantities below the
/// floating floor (1e-13) are excluded; an all-floor quantity is flagged
/// trivially zero instead of fitted.
struct RateFit {
  double rate = 0;
  double residual = 0;  // rms of log residuals
  int points = 0;
  bool trivially_zero = false;
  bool valid() const { return trivially_zero || points >= 2; }
};

struct StudyResult {
  int degree = 0;
  int dim = 1;
  std::string target, method;
  std::vector<StudyLevel> levels;
  std::map<std::string, RateFit> rates;  // error_<s>, max_jump_k<k>, max_d_norm

  std::string to_csv() const;
  static StudyResult from_csv(const std::string& csv, int degree, int dim);
  nlohmann::json rates_json() const;
};

StudyResult convergence_study(const StudyConfig& cfg);

/// Recomputes the rate fits from the stored levels (used after CSV replay).
void fit_study_rates(StudyResult& result);

// --- verdict -----------------------------------------------------------------

struct VerdictOptions {
  double rate_tol = 0.2;    // slack on p+1 and on the blow-up rate -1
  double ratio_tol = 0.5;   // "bounded" = consecutive-level ratio <= 1.5
  int window = 3;           // levels inspected for boundedness
};

/// Evaluates two implications and nothing stronger:
///   optimal error rate  =>  Type A and Type I indicators bounded;
///   indicator rate <= -(1 - tol)  =>  error rate below optimal.
/// The converse of the first is unproven and is not asserted.
struct Verdict {
  enum class Status { PASS, FAIL, INCONCLUSIVE };
  Status status = Status::INCONCLUSIVE;
  bool error_optimal = false;
  bool indicators_bounded = false;
  bool remark_fired = false;
  std::string detail;
};

Verdict necessary_condition_verdict(const StudyResult& result, const VerdictOptions& opt = {});
std::string to_string(Verdict::Status s);

// --- 1D jump bound -------------------------------------------------------------

/// Both sides of |J^(k)| <= C h^{-k} ( h^{p+1} |u|_{W^{p+1}_inf} + ||u_R - u||_inf )
/// evaluated with C = 1; the interesting output is the ratio trend across a
/// refinement family, which must stay in a bounded band.
struct AppendixCheck {
  double max_jump = 0;
  double bound = 0;
  double ratio = 0;
  bool trivial = false;  // jump at the floating floor; nothing to compare
};

AppendixCheck appendix_jump_bound_check(const TargetFunction& u, const PiecewisePolyField& field, int k);

}  // namespace smoothcheck

#endif
