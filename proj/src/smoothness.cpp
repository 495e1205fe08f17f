#include "smoothcheck/smoothness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "smoothcheck/parallel.hpp"

namespace smoothcheck {

std::string to_string(SampleRule r) {
  switch (r) {
    case SampleRule::centroid: return "centroid";
    case SampleRule::vertex_average: return "vertex_average";
    case SampleRule::user_points: return "user_points";
  }
  return "?";
}

JumpVector scaled_jump_vector(const PiecewisePolyField& field, const Interface& itf) {
  const Mesh& m = field.mesh();
  const int p = field.degree();
  const double h = m.h(), hmin = m.h_min();
  const auto idx = enumerate_multi_indices(m.dimension(), p);

  JumpVector jv;
  jv.interface_id = itf.id;
  jv.evaluation_point = itf.evaluation_point;
  jv.raw.resize(idx.size());
  jv.d.resize(idx.size());
  jv.d_tilde.resize(idx.size());
  jv.norm_d_per_order.assign(p + 1, 0.0);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const int k = idx[i].order();
    const double J = interface_jump(field, itf, idx[i]);
    jv.raw[i] = J;
    jv.d[i] = J / std::pow(h, p + 1 - k);
    // identical to J h_min^k / h^{p+1}; this form collapses exactly onto d
    // when h == h_min
    jv.d_tilde[i] = jv.d[i] * std::pow(hmin / h, k);
    jv.norm_d += jv.d[i] * jv.d[i];
    jv.norm_d_tilde += jv.d_tilde[i] * jv.d_tilde[i];
    jv.norm_d_per_order[k] += jv.d[i] * jv.d[i];
    jv.max_abs_d = std::max(jv.max_abs_d, std::abs(jv.d[i]));
  }
  jv.norm_d = std::sqrt(jv.norm_d);
  jv.norm_d_tilde = std::sqrt(jv.norm_d_tilde);
  for (double& v : jv.norm_d_per_order) v = std::sqrt(v);
  return jv;
}

namespace {

std::vector<JumpVector> all_jumps(const PiecewisePolyField& field) {
  const auto& itfs = field.mesh().interfaces();
  std::vector<JumpVector> out(itfs.size());
  parallel_for(itfs.size(), [&](std::size_t i) { out[i] = scaled_jump_vector(field, itfs[i]); });
  return out;
}

double aggregate(const std::vector<double>& norms, NormKind s, int dim, double h) {
  if (s == NormKind::linf) {
    double mx = 0;
    for (double v : norms) mx = std::max(mx, v);
    return mx;
  }
  const double hn = std::pow(h, dim);
  double acc = 0;
  for (double v : norms) acc += hn * (s == NormKind::l1 ? v : v * v);
  return acc;
}

}  // namespace

double type_a_indicator(const PiecewisePolyField& field, NormKind s) {
  const auto jumps = all_jumps(field);
  std::vector<double> norms(jumps.size());
  for (std::size_t i = 0; i < jumps.size(); ++i) norms[i] = jumps[i].norm_d;
  return aggregate(norms, s, field.mesh().dimension(), field.mesh().h());
}

InteriorVector interior_vector(const PiecewisePolyField& field, const TargetFunction* u, int element,
                               const Vec3& point) {
  const Mesh& m = field.mesh();
  if (!m.element_contains(element, point, 1e-9 * m.element_diameter(element)))
    throw std::invalid_argument("interior_vector: sample point outside element");
  const int p = field.degree();
  const double h = m.h();
  const auto idx = enumerate_multi_indices(m.dimension(), p);

  InteriorVector iv;
  iv.element = element;
  iv.point = point;
  iv.m.resize(idx.size());
  if (u) {
    iv.raw_diff.resize(idx.size());
    iv.f.resize(idx.size());
  }
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const int k = idx[i].order();
    const double duh = field.eval_derivative_unchecked(element, point, idx[i]);
    iv.m[i] = std::abs(duh);
    iv.max_m = std::max(iv.max_m, iv.m[i]);
    if (u) {
      iv.raw_diff[i] = u->derivative(point, idx[i]) - duh;
      iv.f[i] = iv.raw_diff[i] / std::pow(h, p + 1 - k);
      iv.norm_f += iv.f[i] * iv.f[i];
    }
  }
  iv.norm_f = std::sqrt(iv.norm_f);
  return iv;
}

namespace {

Vec3 sample_point(const Mesh& m, int e, SampleRule rule, const std::vector<Vec3>* user_points) {
  switch (rule) {
    case SampleRule::centroid:
      return m.element_centroid(e);
    case SampleRule::vertex_average: {
      Vec3 c{0, 0, 0};
      const auto pts = m.element_vertices(e);
      for (const auto& p : pts) c += p;
      return c / static_cast<double>(pts.size());
    }
    case SampleRule::user_points:
      if (!user_points || user_points->size() != static_cast<std::size_t>(m.element_count()))
        throw std::invalid_argument("user sample points: one per element required");
      return (*user_points)[e];
  }
  throw std::logic_error("sample_point: unreachable");
}

std::vector<InteriorVector> all_interior(const PiecewisePolyField& field, const TargetFunction* u,
                                         SampleRule rule, const std::vector<Vec3>* user_points) {
  const Mesh& m = field.mesh();
  std::vector<InteriorVector> out(m.element_count());
  parallel_for(m.element_count(), [&](std::size_t e) {
    out[e] = interior_vector(field, u, static_cast<int>(e),
                             sample_point(m, static_cast<int>(e), rule, user_points));
  });
  return out;
}

}  // namespace

double type_i_indicator(const PiecewisePolyField& field, const TargetFunction& u, NormKind s,
                        SampleRule rule, const std::vector<Vec3>* user_points) {
  const auto ivs = all_interior(field, &u, rule, user_points);
  std::vector<double> norms(ivs.size());
  for (std::size_t i = 0; i < ivs.size(); ++i) norms[i] = ivs[i].norm_f;
  return aggregate(norms, s, field.mesh().dimension(), field.mesh().h());
}

SmoothnessReport smoothness_report(const PiecewisePolyField& field, const TargetFunction* u,
                                   const Thresholds& thresholds, SampleRule rule,
                                   const std::vector<Vec3>* user_points) {
  const Mesh& m = field.mesh();
  SmoothnessReport r;
  r.degree = field.degree();
  r.dim = m.dimension();
  r.h = m.h();
  r.h_min = m.h_min();
  r.sample_rule = rule;
  r.thresholds = thresholds;

  r.jumps = all_jumps(field);
  r.interior = all_interior(field, u, rule, user_points);

  std::vector<double> dnorms(r.jumps.size());
  for (std::size_t i = 0; i < r.jumps.size(); ++i) {
    dnorms[i] = r.jumps[i].norm_d;
    r.max_d_norm = std::max(r.max_d_norm, dnorms[i]);
  }
  for (const auto& s : {NormKind::l1, NormKind::l2, NormKind::linf})
    r.type_a[to_string(s)] = aggregate(dnorms, s, r.dim, r.h);

  if (u) {
    std::vector<double> fnorms(r.interior.size());
    for (std::size_t i = 0; i < r.interior.size(); ++i) fnorms[i] = r.interior[i].norm_f;
    for (const auto& s : {NormKind::l1, NormKind::l2, NormKind::linf})
      r.type_i[to_string(s)] = aggregate(fnorms, s, r.dim, r.h);
  }
  for (const auto& iv : r.interior) r.max_m = std::max(r.max_m, iv.max_m);

  // default D threshold: ten times the median interface norm
  if (thresholds.d_norm) {
    r.d_threshold_used = *thresholds.d_norm;
  } else {
    std::vector<double> sorted = dnorms;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted.empty() ? 0.0 : sorted[sorted.size() / 2];
    r.d_threshold_used = 10.0 * median;
  }
  r.m_threshold_used = thresholds.m_abs;

  for (const auto& jv : r.jumps)
    if (jv.norm_d > r.d_threshold_used) r.flagged_interfaces.push_back(jv.interface_id);
  if (r.m_threshold_used)
    for (const auto& iv : r.interior)
      if (iv.max_m > *r.m_threshold_used) r.flagged_elements.push_back(iv.element);

  r.verdict = (r.flagged_interfaces.empty() && r.flagged_elements.empty()) ? "smooth" : "flagged";
  return r;
}

namespace {
std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

nlohmann::json SmoothnessReport::to_json() const {
  nlohmann::json j;
  j["degree"] = degree;
  j["dimension"] = dim;
  j["h"] = h;
  j["h_min"] = h_min;
  j["sample_rule"] = to_string(sample_rule);
  j["type_a"] = type_a;
  if (!type_i.empty()) j["type_i"] = type_i;
  j["max_d_norm"] = max_d_norm;
  j["max_m"] = max_m;
  j["d_threshold"] = d_threshold_used;
  if (m_threshold_used) j["m_threshold"] = *m_threshold_used;
  j["flagged_interfaces"] = flagged_interfaces;
  j["flagged_elements"] = flagged_elements;
  j["verdict"] = verdict;
  nlohmann::json detail = nlohmann::json::array();
  for (const auto& jv : jumps) {
    nlohmann::json row;
    row["id"] = jv.interface_id;
    row["x"] = std::vector<double>{jv.evaluation_point.x, jv.evaluation_point.y, jv.evaluation_point.z};
    row["norm_d"] = jv.norm_d;
    row["norm_d_tilde"] = jv.norm_d_tilde;
    row["max_abs_d"] = jv.max_abs_d;
    detail.push_back(row);
  }
  j["interfaces"] = detail;
  return j;
}

std::string SmoothnessReport::to_csv() const {
  std::ostringstream out;
  out << "id";
  for (int d = 0; d < dim; ++d) out << ",x" << d;
  out << ",norm_d,max_abs_d,flag\n";
  for (const auto& jv : jumps) {
    out << jv.interface_id;
    for (int d = 0; d < dim; ++d) out << "," << fmt17(jv.evaluation_point[d]);
    const bool flagged =
        std::find(flagged_interfaces.begin(), flagged_interfaces.end(), jv.interface_id) !=
        flagged_interfaces.end();
    out << "," << fmt17(jv.norm_d) << "," << fmt17(jv.max_abs_d) << "," << (flagged ? 1 : 0) << "\n";
  }
  return out.str();
}

}  // namespace smoothcheck
