#include "smoothcheck/bounds.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "smoothcheck/dual_mesh.hpp"
#include "smoothcheck/parallel.hpp"
#include "smoothcheck/polynomial.hpp"

namespace smoothcheck {

namespace {

constexpr double kFloor = 1e-13;

double interface_distance(const Mesh& m, const Interface& itf, const Vec3& p) {
  const int n = m.dimension();
  if (n == 1) return dist(itf.evaluation_point, p);
  if (n == 2)
    return point_segment_distance(p, m.vertex(itf.facet_vertices[0]), m.vertex(itf.facet_vertices[1]));
  double d = point_triangle_distance(p, m.vertex(itf.facet_vertices[0]), m.vertex(itf.facet_vertices[1]),
                                     m.vertex(itf.facet_vertices[2]));
  if (itf.facet_vertices.size() == 4)
    d = std::min(d, point_triangle_distance(p, m.vertex(itf.facet_vertices[0]),
                                            m.vertex(itf.facet_vertices[2]), m.vertex(itf.facet_vertices[3])));
  return d;
}

}  // namespace

LocalBoundCheck local_lower_bound_check(const PiecewisePolyField& field, const DualField& dual_field,
                                        const Interface& itf, double delta) {
  const Mesh& m = field.mesh();
  if (&dual_field.dual().parent() != &m)
    throw std::invalid_argument("local_lower_bound_check: dual field built on a different mesh");
  const int n = m.dimension();
  const int p = field.degree();
  const double h = m.h(), hmin = m.h_min();
  const double r_hat = delta / hmin;
  if (!(r_hat > 0 && r_hat < 1))
    throw std::invalid_argument("local_lower_bound_check: delta/h_min = " + std::to_string(r_hat) +
                                " outside (0, 1)");
  for (const auto& other : m.interfaces())
    if (other.id != itf.id && interface_distance(m, other, itf.evaluation_point) < delta * (1 - 1e-12))
      throw std::invalid_argument("local_lower_bound_check: disk crosses a second interface");

  const auto idx = enumerate_multi_indices(n, p);
  const int mm = static_cast<int>(idx.size());
  const Vec3& xi = itf.evaluation_point;

  // jump polynomial in the offset variable z = x - x_i, rotated so the
  // interface normal becomes the first axis
  Polynomial diff(n, p);
  for (const auto& a : idx) diff.coefficient(a) = interface_jump(field, itf, a) / a.factorial();
  const Frame frame = Frame::from_first_axis(itf.normal, n);
  const Polynomial rotated = diff.compose_affine(Vec3{0, 0, 0}, frame);

  std::vector<double> d_tilde(mm);
  for (int j = 0; j < mm; ++j) {
    const int k = idx[j].order();
    const double jump_rot = rotated.coefficient(idx[j]) * idx[j].factorial();
    d_tilde[j] = jump_rot * std::pow(hmin, k) / std::pow(h, p + 1);
  }
  const QuadraticForm qf = assemble_qform({n, p, r_hat});

  LocalBoundCheck out;
  out.q_value = std::pow(hmin, n) * std::pow(h, 2 * p + 2) * qf.eval(d_tilde);

  // least-squares minimum of || v - u_R ||^2 over the split disk
  const QuadRule neg = half_ball_rule_nd(n, xi, itf.normal, delta, 2 * p + 2, -1);
  const QuadRule pos = half_ball_rule_nd(n, xi, itf.normal, delta, 2 * p + 2, +1);
  const std::size_t rows = neg.size() + pos.size();
  Eigen::MatrixXd X(rows, mm);
  Eigen::VectorXd y(rows);
  double lhs = 0;
  std::size_t r = 0;
  for (const auto* half : {&neg, &pos}) {
    const int elem = (half == &neg) ? itf.left_element : itf.right_element;
    for (const auto& q : *half) {
      const double sw = std::sqrt(q.w);
      const Vec3 zl = (q.x - xi) / delta;
      for (int j = 0; j < mm; ++j) {
        double mono = 1;
        for (int d = 0; d < n; ++d)
          for (int k = 0; k < idx[j][d]; ++k) mono *= zl[d];
        X(r, j) = sw * mono;
      }
      const double ur = field.eval_derivative_unchecked(elem, q.x, MultiIndex::zero(n));
      y(r) = sw * ur;
      const double diff_ui = dual_field.eval(itf.id, q.x) - ur;
      lhs += q.w * diff_ui * diff_ui;
      ++r;
    }
  }
  const Eigen::VectorXd c = X.colPivHouseholderQr().solve(y);
  out.min_residual = (X * c - y).squaredNorm();
  out.lhs = lhs;
  out.ratio = out.q_value > 0 ? out.min_residual / out.q_value : (out.min_residual == 0 ? 1.0 : 0.0);
  out.identity_rel_err = std::abs(out.min_residual - out.q_value) / (1 + out.q_value);
  out.inequality_ok = lhs >= out.min_residual * (1 - 1e-9) - 1e-13;
  return out;
}

GlobalBoundReport global_lower_bound_report(const TargetFunction& u, const PiecewisePolyField& field,
                                            NormKind s, const QuadraticForm& qf) {
  const Mesh& m = field.mesh();
  const int p = field.degree();
  GlobalBoundReport out;
  out.s = s;
  out.cp = qf.cp();
  out.error = error_norm(u, field, s);
  const double ind = type_a_indicator(field, s);
  out.indicator_term = s == NormKind::linf ? ind : std::pow(ind, 1.0 / (s == NormKind::l1 ? 1.0 : 2.0));
  out.seminorm = sobolev_seminorm(u, m, p + 1, s);
  out.bracket = out.indicator_term - out.seminorm;
  // brackets at the floating floor count as nonpositive
  const double floor = 1e-12 * (1 + out.indicator_term + out.seminorm);
  if (out.bracket > floor) {
    out.ratio = out.error / (std::pow(m.h(), p + 1) * out.bracket);
    out.note = "ratio = error / (h^{p+1} * bracket); the hidden constant keeps it away from zero";
  } else {
    out.note = "bracket <= 0: indicator below the seminorm, bound holds trivially";
  }
  return out;
}

// ---------------------------------------------------------------------------
// studies

std::string to_string(ApproxMethod m) {
  switch (m) {
    case ApproxMethod::lagrange_interpolant: return "interpolant";
    case ApproxMethod::l2_element_fit: return "l2_fit";
    case ApproxMethod::from_files: return "files";
  }
  return "?";
}

ApproxMethod approx_method_from_string(const std::string& s) {
  if (s == "interpolant" || s == "lagrange") return ApproxMethod::lagrange_interpolant;
  if (s == "l2_fit" || s == "l2" || s == "best_fit") return ApproxMethod::l2_element_fit;
  if (s == "files") return ApproxMethod::from_files;
  throw std::invalid_argument("unknown approximation method: " + s);
}

namespace {

RateFit fit_rate(const std::vector<double>& hs, const std::vector<double>& qs, int levels_total) {
  RateFit fit;
  // finest max(L-1, 3) levels enter the fit
  const int use = std::min<int>(static_cast<int>(hs.size()), std::max(levels_total - 1, 3));
  std::vector<double> lx, ly;
  bool any_above_floor = false;
  for (std::size_t i = hs.size() - use; i < hs.size(); ++i) {
    if (qs[i] >= kFloor) {
      any_above_floor = true;
      lx.push_back(std::log(hs[i]));
      ly.push_back(std::log(qs[i]));
    }
  }
  if (!any_above_floor) {
    // also check the levels outside the window before declaring zero
    bool all_zero = true;
    for (double q : qs) all_zero = all_zero && q < kFloor;
    fit.trivially_zero = all_zero;
    return fit;
  }
  fit.points = static_cast<int>(lx.size());
  if (fit.points < 2) return fit;
  double mx = 0, my = 0;
  for (int i = 0; i < fit.points; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= fit.points;
  my /= fit.points;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < fit.points; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  fit.rate = sxy / sxx;
  double rss = 0;
  for (int i = 0; i < fit.points; ++i) {
    const double pred = my + fit.rate * (lx[i] - mx);
    rss += (ly[i] - pred) * (ly[i] - pred);
  }
  fit.residual = std::sqrt(rss / fit.points);
  return fit;
}

}  // namespace

void fit_study_rates(StudyResult& result) {
  result.rates.clear();
  const int L = static_cast<int>(result.levels.size());
  std::vector<double> hs;
  for (const auto& lv : result.levels) hs.push_back(lv.h);

  auto fit_quantity = [&](const std::string& name, const std::function<double(const StudyLevel&)>& get) {
    std::vector<double> qs;
    for (const auto& lv : result.levels) qs.push_back(get(lv));
    result.rates[name] = fit_rate(hs, qs, L);
  };

  if (!result.levels.empty()) {
    for (const auto& [name, v] : result.levels.back().error)
      fit_quantity("error_" + name, [&name](const StudyLevel& lv) { return lv.error.at(name); });
    const int orders = static_cast<int>(result.levels.back().max_jump_per_order.size());
    for (int k = 0; k < orders; ++k)
      fit_quantity("max_jump_k" + std::to_string(k),
                   [k](const StudyLevel& lv) { return lv.max_jump_per_order[k]; });
    fit_quantity("max_d_norm", [](const StudyLevel& lv) { return lv.max_d_norm; });
  }
}

StudyResult convergence_study(const StudyConfig& cfg) {
  const int dim = element_dimension(cfg.kind);
  if (cfg.levels < 1) throw std::invalid_argument("study: at least one level required");
  if (cfg.method == ApproxMethod::lagrange_interpolant && dim != 1)
    throw std::invalid_argument("study: the Lagrange interpolant method needs a 1D mesh");
  if (cfg.method == ApproxMethod::from_files &&
      static_cast<int>(cfg.field_files.size()) != cfg.levels)
    throw std::invalid_argument("study: one field file per level required");

  const int base = cfg.base_divisions > 0 ? cfg.base_divisions : (dim == 1 ? 8 : 4);
  const Box unit{{0, 0, 0}, {1, 1, 1}};
  Mesh base_mesh = Mesh::structured(unit, dim, {base, base, base}, cfg.kind);
  if (cfg.base_jitter > 0) base_mesh = jitter_vertices(base_mesh, cfg.base_jitter, cfg.jitter_seed);

  // discontinuous targets default to a cut through element interiors on
  // every level: offset one third of the coarsest spacing
  nlohmann::json tparams = cfg.target_params;
  if (cfg.target == "step" && !tparams.contains("loc")) tparams["loc"] = 0.5 + base_mesh.h() / 3.0;
  const TargetFunction u = TargetFunction::make(cfg.target, dim, tparams);

  StudyResult result;
  result.degree = cfg.degree;
  result.dim = dim;
  result.target = cfg.target;
  result.method = to_string(cfg.method);

  auto mesh = std::make_shared<const Mesh>(std::move(base_mesh));
  for (int level = 0; level < cfg.levels; ++level) {
    if (level > 0) mesh = std::make_shared<const Mesh>(mesh->refined_uniform());

    PiecewisePolyField field = [&] {
      switch (cfg.method) {
        case ApproxMethod::lagrange_interpolant: return lagrange_interpolant_1d(u, mesh, cfg.degree);
        case ApproxMethod::l2_element_fit: return l2_best_fit(u, mesh, cfg.degree);
        case ApproxMethod::from_files: return PiecewisePolyField::load(cfg.field_files[level]);
      }
      throw std::logic_error("unreachable");
    }();
    if (cfg.method == ApproxMethod::from_files && field.degree() != cfg.degree)
      throw std::invalid_argument("study: field file degree does not match the configuration");

    if (cfg.inject_jump) {
      // O(1) bump on the constant mode of one interior element
      field.coefficients()[field.mesh().element_count() / 2][0] += 1.0;
    }

    const Mesh& mref = field.mesh();
    StudyLevel lv;
    lv.level = level;
    lv.h = mref.h();
    lv.h_min = mref.h_min();
    lv.n_elements = mref.element_count();
    lv.n_interfaces = static_cast<int>(mref.interfaces().size());

    for (NormKind s : cfg.norms) lv.error[to_string(s)] = error_norm(u, field, s);
    for (NormKind s : {NormKind::l1, NormKind::l2, NormKind::linf})
      lv.type_a[to_string(s)] = type_a_indicator(field, s);
    if (cfg.method != ApproxMethod::from_files || !cfg.target.empty())
      for (NormKind s : {NormKind::l1, NormKind::l2, NormKind::linf})
        lv.type_i[to_string(s)] = type_i_indicator(field, u, s, cfg.sample_rule);

    lv.max_jump_per_order.assign(cfg.degree + 1, 0.0);
    const auto idx = enumerate_multi_indices(dim, cfg.degree);
    const auto& itfs = mref.interfaces();
    std::vector<std::vector<double>> per_itf(itfs.size());
    parallel_for(itfs.size(), [&](std::size_t i) {
      std::vector<double> maxk(cfg.degree + 1, 0.0);
      for (const auto& a : idx)
        maxk[a.order()] = std::max(maxk[a.order()], std::abs(interface_jump(field, itfs[i], a)));
      per_itf[i] = std::move(maxk);
    });
    for (const auto& mk : per_itf)
      for (int k = 0; k <= cfg.degree; ++k) lv.max_jump_per_order[k] = std::max(lv.max_jump_per_order[k], mk[k]);
    lv.max_d_norm = lv.type_a["inf"];

    result.levels.push_back(std::move(lv));
  }

  fit_study_rates(result);
  return result;
}

// ---------------------------------------------------------------------------
// verdict

std::string to_string(Verdict::Status s) {
  switch (s) {
    case Verdict::Status::PASS: return "PASS";
    case Verdict::Status::FAIL: return "FAIL";
    case Verdict::Status::INCONCLUSIVE: return "INCONCLUSIVE";
  }
  return "?";
}

Verdict necessary_condition_verdict(const StudyResult& result, const VerdictOptions& opt) {
  if (result.levels.size() < 3)
    throw std::invalid_argument("necessary_condition_verdict: at least three levels required");
  const int p = result.degree;
  Verdict v;

  // error rate: prefer the L2 norm
  const RateFit* err = nullptr;
  std::string err_name;
  for (const char* cand : {"error_2", "error_inf", "error_1"}) {
    auto it = result.rates.find(cand);
    if (it != result.rates.end()) {
      err = &it->second;
      err_name = cand;
      break;
    }
  }
  if (!err || !err->valid()) {
    v.status = Verdict::Status::INCONCLUSIVE;
    v.detail = "error rate not fittable";
    return v;
  }
  v.error_optimal = err->trivially_zero || err->rate >= p + 1 - opt.rate_tol;

  // boundedness of the indicators over the final window; the zero floor for
  // a scaled indicator is the roundoff floor amplified by h^{-(p+1)}
  const int L = static_cast<int>(result.levels.size());
  const int w = std::min(opt.window, L);
  auto floor_at = [&](const StudyLevel& lv) { return kFloor * std::pow(lv.h, -(p + 1)); };
  auto bounded = [&](const std::function<double(const StudyLevel&)>& get) {
    for (int i = L - w; i + 1 < L; ++i) {
      const double a = get(result.levels[i]), b = get(result.levels[i + 1]);
      if (a < floor_at(result.levels[i]) && b < floor_at(result.levels[i + 1])) continue;
      if (a < floor_at(result.levels[i])) return false;
      if (b / a > 1 + opt.ratio_tol) return false;
    }
    return true;
  };
  v.indicators_bounded = bounded([](const StudyLevel& lv) { return lv.type_a.at("inf"); }) &&
                         bounded([](const StudyLevel& lv) { return lv.type_a.at("2"); });
  if (!result.levels.back().type_i.empty())
    v.indicators_bounded =
        v.indicators_bounded && bounded([](const StudyLevel& lv) { return lv.type_i.at("inf"); });

  const auto dit = result.rates.find("max_d_norm");
  const RateFit* dfit = dit == result.rates.end() ? nullptr : &dit->second;
  v.remark_fired = dfit && dfit->valid() && !dfit->trivially_zero && dfit->rate <= -1 + opt.rate_tol;

  const bool imp1 = !v.error_optimal || v.indicators_bounded;
  const bool imp2 = !v.remark_fired || !v.error_optimal;
  v.status = (imp1 && imp2) ? Verdict::Status::PASS : Verdict::Status::FAIL;

  std::ostringstream detail;
  detail << err_name << " rate "
         << (err->trivially_zero ? std::string("exact (below floor)") : std::to_string(err->rate))
         << "; optimal=" << (v.error_optimal ? "yes" : "no")
         << "; indicators bounded=" << (v.indicators_bounded ? "yes" : "no");
  if (dfit && dfit->valid() && !dfit->trivially_zero) detail << "; max||D|| rate " << dfit->rate;
  detail << "; blow-up implication " << (v.remark_fired ? "fired" : "idle");
  v.detail = detail.str();
  return v;
}

// ---------------------------------------------------------------------------
// 1D jump bound

AppendixCheck appendix_jump_bound_check(const TargetFunction& u, const PiecewisePolyField& field, int k) {
  const Mesh& m = field.mesh();
  if (m.dimension() != 1) throw std::invalid_argument("appendix_jump_bound_check: 1D mesh required");
  const int p = field.degree();
  if (k < 0 || k > p) throw std::invalid_argument("appendix_jump_bound_check: need 0 <= k <= p");

  AppendixCheck out;
  MultiIndex a = MultiIndex::zero(1);
  a[0] = k;
  for (const auto& itf : m.interfaces())
    out.max_jump = std::max(out.max_jump, std::abs(interface_jump(field, itf, a)));

  const double semi = sobolev_seminorm(u, m, p + 1, NormKind::linf);
  const double err_inf = error_norm(u, field, NormKind::linf);
  out.bound = std::pow(m.h(), -k) * (std::pow(m.h(), p + 1) * semi + err_inf);
  out.trivial = out.max_jump < kFloor;
  out.ratio = out.trivial ? 0.0 : out.max_jump / out.bound;
  return out;
}

// ---------------------------------------------------------------------------
// CSV round trip

namespace {
std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

std::string StudyResult::to_csv() const {
  std::ostringstream out;
  out << "level,h,h_min,elements,interfaces";
  for (const char* s : {"1", "2", "inf"}) out << ",error_" << s;
  for (const char* s : {"1", "2", "inf"}) out << ",typea_" << s;
  for (const char* s : {"1", "2", "inf"}) out << ",typei_" << s;
  out << ",max_d_norm";
  for (int k = 0; k <= degree; ++k) out << ",max_jump_k" << k;
  out << "\n";
  for (const auto& lv : levels) {
    out << lv.level << "," << fmt17(lv.h) << "," << fmt17(lv.h_min) << "," << lv.n_elements << ","
        << lv.n_interfaces;
    for (const std::string s : {"1", "2", "inf"})
      out << "," << (lv.error.count(s) ? fmt17(lv.error.at(s)) : "");
    for (const std::string s : {"1", "2", "inf"})
      out << "," << (lv.type_a.count(s) ? fmt17(lv.type_a.at(s)) : "");
    for (const std::string s : {"1", "2", "inf"})
      out << "," << (lv.type_i.count(s) ? fmt17(lv.type_i.at(s)) : "");
    out << "," << fmt17(lv.max_d_norm);
    for (int k = 0; k <= degree; ++k) out << "," << fmt17(lv.max_jump_per_order[k]);
    out << "\n";
  }
  return out.str();
}

StudyResult StudyResult::from_csv(const std::string& csv, int degree, int dim) {
  StudyResult r;
  r.degree = degree;
  r.dim = dim;
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("study CSV: empty");
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    cells.resize(15 + degree + 1);  // tolerate trailing empties
    StudyLevel lv;
    lv.level = std::stoi(cells[0]);
    lv.h = std::stod(cells[1]);
    lv.h_min = std::stod(cells[2]);
    lv.n_elements = std::stoi(cells[3]);
    lv.n_interfaces = std::stoi(cells[4]);
    const char* names[3] = {"1", "2", "inf"};
    for (int i = 0; i < 3; ++i)
      if (!cells[5 + i].empty()) lv.error[names[i]] = std::stod(cells[5 + i]);
    for (int i = 0; i < 3; ++i)
      if (!cells[8 + i].empty()) lv.type_a[names[i]] = std::stod(cells[8 + i]);
    for (int i = 0; i < 3; ++i)
      if (!cells[11 + i].empty()) lv.type_i[names[i]] = std::stod(cells[11 + i]);
    lv.max_d_norm = std::stod(cells[14]);
    for (int k = 0; k <= degree; ++k) lv.max_jump_per_order.push_back(std::stod(cells[15 + k]));
    r.levels.push_back(std::move(lv));
  }
  fit_study_rates(r);
  return r;
}

nlohmann::json StudyResult::rates_json() const {
  nlohmann::json j;
  for (const auto& [name, fit] : rates) {
    nlohmann::json f;
    if (fit.trivially_zero) {
      f["trivially_zero"] = true;
    } else if (fit.points >= 2) {
      f["rate"] = fit.rate;
      f["residual"] = fit.residual;
      f["points"] = fit.points;
    } else {
      f["unfittable"] = true;
    }
    j[name] = f;
  }
  return j;
}

}  // namespace smoothcheck
