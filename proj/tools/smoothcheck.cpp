// Command-line front end: mesh checks, smoothness indicators, positivity
// tables for the jump quadratic form, angle-lemma verification, lower-bound
// reports and refinement studies.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "smoothcheck/bounds.hpp"
#include "smoothcheck/dual_mesh.hpp"
#include "smoothcheck/field.hpp"
#include "smoothcheck/mesh.hpp"
#include "smoothcheck/parallel.hpp"
#include "smoothcheck/qform.hpp"
#include "smoothcheck/smoothness.hpp"

using namespace smoothcheck;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "missing";
  std::ostringstream ss;
  ss << in.rdbuf();
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(ss.str())));
  return buf;
}

std::string timestamp() {
  char buf[64];
  const std::time_t t = std::time(nullptr);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

/// Provenance block shared by all reports. The timestamp is the only field
/// excluded from the determinism contract.
struct Provenance {
  std::string command_line;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, hash
  std::vector<std::pair<std::string, std::string>> options;

  json to_json() const {
    json j;
    j["tool"] = std::string("smoothcheck ") + kVersion;
    j["command"] = command_line;
    j["timestamp"] = timestamp();
    for (const auto& [path, hash] : inputs) j["inputs"][path] = hash;
    for (const auto& [k, v] : options) j["options"][k] = v;
    return j;
  }
  std::string to_csv_header() const {
    std::ostringstream out;
    out << "# tool: smoothcheck " << kVersion << "\n# command: " << command_line
        << "\n# timestamp: " << timestamp() << "\n";
    for (const auto& [path, hash] : inputs) out << "# input: " << path << " " << hash << "\n";
    for (const auto& [k, v] : options) out << "# option: " << k << " = " << v << "\n";
    return out.str();
  }
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

json target_params_from_string(const std::string& s) {
  // "key=value,key=value", numbers parsed as doubles
  json j = json::object();
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--target-params expects key=value pairs");
    const std::string key = item.substr(0, eq);
    const std::string val = item.substr(eq + 1);
    try {
      std::size_t used = 0;
      const double num = std::stod(val, &used);
      if (used == val.size()) {
        j[key] = num;
        continue;
      }
    } catch (...) {
    }
    j[key] = val;
  }
  return j;
}

std::vector<NormKind> parse_norms(const std::string& s) {
  std::vector<NormKind> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(norm_kind_from_string(item));
  if (out.empty()) throw CLI::ValidationError("--norms needs at least one of 1,2,inf");
  return out;
}

// ---------------------------------------------------------------------------

int run_check_mesh(const std::string& mesh_path, double gamma, const std::string& out, Provenance prov) {
  const auto mesh = std::make_shared<const Mesh>(Mesh::load(mesh_path));
  const QualityReport q = quality_metrics(*mesh, gamma);
  const DualMesh dual = build_dual_covolume(mesh);

  json j;
  j["provenance"] = prov.to_json();
  j["dimension"] = mesh->dimension();
  j["kind"] = to_string(mesh->kind());
  j["elements"] = mesh->element_count();
  j["vertices"] = mesh->vertices().size();
  j["interior_interfaces"] = mesh->interfaces().size();
  j["boundary_facets"] = mesh->boundary_facet_count();
  j["h"] = mesh->h();
  j["h_min"] = mesh->h_min();
  j["quasi_uniformity_ratio"] = q.quasi_uniformity_ratio;
  if (q.min_solid_angle) j["min_solid_angle"] = *q.min_solid_angle;
  if (q.min_dihedral_angle) j["min_dihedral_angle"] = *q.min_dihedral_angle;
  if (q.sigma) j["sigma"] = *q.sigma;
  if (q.safe_radius)
    j["safe_radius"] = *q.safe_radius;
  else
    j["safe_radius_note"] = q.safe_radius_note;
  j["gamma"] = q.gamma;
  j["dual_covolumes"] = dual.covolume_count();
  j["dual_covered_measure"] = dual.covered_measure();
  write_text(out, j.dump(2) + "\n");
  return 0;
}

int run_indicator(const std::string& mesh_path, const std::string& field_path, const std::string& target,
                  const json& target_params, const std::string& sample_rule, double d_threshold,
                  double m_threshold, const std::string& out, const std::string& csv_out, Provenance prov) {
  std::shared_ptr<const Mesh> mesh;
  if (!mesh_path.empty()) mesh = std::make_shared<const Mesh>(Mesh::load(mesh_path));
  const PiecewisePolyField field = PiecewisePolyField::load(field_path, mesh);

  std::optional<TargetFunction> u;
  if (!target.empty()) u = TargetFunction::make(target, field.mesh().dimension(), target_params);

  Thresholds th;
  if (d_threshold >= 0) th.d_norm = d_threshold;
  if (m_threshold >= 0) th.m_abs = m_threshold;
  SampleRule rule = SampleRule::centroid;
  if (sample_rule == "vertex_average") rule = SampleRule::vertex_average;

  const SmoothnessReport rep = smoothness_report(field, u ? &*u : nullptr, th, rule);
  json j = rep.to_json();
  j["provenance"] = prov.to_json();
  write_text(out, j.dump(2) + "\n");
  if (!csv_out.empty()) write_text(csv_out, prov.to_csv_header() + rep.to_csv());
  return rep.verdict == "smooth" ? 0 : 2;
}

int run_cp_table(const std::vector<int>& ns, const std::vector<int>& ps, const std::vector<double>& rhats,
                 const std::string& out, Provenance prov) {
  std::ostringstream csv;
  csv << prov.to_csv_header() << "n,p,r_hat,C_p,matrix_dim,cond\n";
  for (int n : ns)
    for (int p : ps)
      for (double r : rhats) {
        const QuadraticForm qf = assemble_qform({n, p, r});
        csv << n << "," << p << "," << fmt17(r) << "," << fmt17(cp_constant(qf)) << "," << qf.size() << ","
            << fmt17(qf.condition()) << "\n";
      }
  write_text(out, csv.str());
  return 0;
}

int run_verify_lemmas(int count, std::uint64_t seed, const std::string& out, Provenance prov) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_real_distribution<double> pos(0.05, 1.5);

  // dihedral-angle identity over random configurations
  double max_resid_stated = 0, max_resid_equal = 0;
  int identity_trials = 0;
  while (identity_trials < count) {
    const Vec3 A{u(rng), u(rng), u(rng)}, D{u(rng), u(rng), u(rng)};
    const Vec3 C{u(rng), u(rng), u(rng)}, G{u(rng), u(rng), u(rng)};
    try {
      const auto r = verify_angle_identity(A, D, C, G);
      max_resid_stated = std::max(max_resid_stated, r.residual);
      max_resid_equal = std::max(max_resid_equal, r.residual_equal);
      ++identity_trials;
    } catch (const std::invalid_argument&) {
    }
  }

  // strict angle inequality over admissible configurations
  double min_ratio = std::numeric_limits<double>::max(), max_ratio = 0;
  int inequality_trials = 0, violations = 0;
  while (inequality_trials < count) {
    const Vec3 A{0, 0, pos(rng)}, D{0, 0, 0};
    const Vec3 C{pos(rng), 0, u(rng)};
    const Vec3 E{pos(rng), (u(rng) > 0 ? 1 : -1) * pos(rng), u(rng)};
    try {
      const auto r = verify_angle_inequality(A, D, C, E);
      if (!r.applicable) continue;
      ++inequality_trials;
      min_ratio = std::min(min_ratio, r.ratio);
      max_ratio = std::max(max_ratio, r.ratio);
      if (!(r.ratio > 1.0)) ++violations;
    } catch (const std::invalid_argument&) {
    }
  }

  const bool stated_identity_ok = max_resid_stated <= 1e-10;
  const bool construction_identity_ok = max_resid_equal <= 1e-10;
  const bool inequality_ok = violations == 0;

  json j;
  j["provenance"] = prov.to_json();
  j["angle_identity"] = {
      {"trials", identity_trials},
      {"max_residual_one_third", max_resid_stated},
      {"max_residual_equal_angles", max_resid_equal},
      {"one_third_identity_ok", stated_identity_ok},
      {"equal_angles_identity_ok", construction_identity_ok},
      {"note", "the feet construction reproduces the dihedral angle itself; the one-third-scaled "
               "comparison does not hold for this construction"}};
  j["angle_inequality"] = {{"trials", inequality_trials},
                           {"violations", violations},
                           {"min_ratio", min_ratio},
                           {"max_ratio", max_ratio},
                           {"strict_inequality_ok", inequality_ok}};
  j["verdict"] = (stated_identity_ok && inequality_ok) ? "PASS" : "FAIL";
  write_text(out, j.dump(2) + "\n");
  return (stated_identity_ok && inequality_ok) ? 0 : 2;
}

int run_lower_bound(const std::string& target, const json& target_params, ElementKind kind, int degree,
                    int levels, int base_div, NormKind s, const std::string& out, Provenance prov) {
  const int dim = element_dimension(kind);
  const Box unit{{0, 0, 0}, {1, 1, 1}};
  const int base = base_div > 0 ? base_div : (dim == 1 ? 8 : 4);
  auto mesh = std::make_shared<const Mesh>(Mesh::structured(unit, dim, {base, base, base}, kind));

  json jp = target_params;
  if (target == "step" && !jp.contains("loc")) jp["loc"] = 0.5 + mesh->h() / 3.0;
  const TargetFunction u = TargetFunction::make(target, dim, jp);

  std::ostringstream csv;
  csv << prov.to_csv_header()
      << "level,h,error,indicator_term,seminorm,bracket,ratio,local_max_rel_err,local_checked,local_skipped\n";
  bool local_ok = true;
  for (int level = 0; level < levels; ++level) {
    if (level > 0) mesh = std::make_shared<const Mesh>(mesh->refined_uniform());
    const PiecewisePolyField field = (dim == 1 && degree >= 1 && target != "step")
                                         ? lagrange_interpolant_1d(u, mesh, degree)
                                         : l2_best_fit(u, mesh, degree);
    const double delta = safe_disk_radius(*mesh);
    const QuadraticForm qf = assemble_qform({dim, degree, delta / mesh->h_min()});
    const GlobalBoundReport rep = global_lower_bound_report(u, field, s, qf);

    // local identity across interfaces, against the projection of the field
    const auto dual = std::make_shared<const DualMesh>(build_dual_covolume(mesh));
    const auto shared = std::make_shared<const PiecewisePolyField>(field);
    const DualField uI = local_l2_project_dual(TargetFunction::from_field(shared), dual, degree).field;
    double worst = 0;
    int checked = 0, skipped = 0;
    for (const auto& itf : mesh->interfaces()) {
      try {
        const auto chk = local_lower_bound_check(field, uI, itf, delta);
        worst = std::max(worst, chk.identity_rel_err);
        ++checked;
      } catch (const std::invalid_argument&) {
        ++skipped;
      }
    }
    local_ok = local_ok && worst <= 1e-9;
    csv << level << "," << fmt17(mesh->h()) << "," << fmt17(rep.error) << "," << fmt17(rep.indicator_term)
        << "," << fmt17(rep.seminorm) << "," << fmt17(rep.bracket) << ","
        << (rep.ratio ? fmt17(*rep.ratio) : "") << "," << fmt17(worst) << "," << checked << "," << skipped
        << "\n";
  }
  write_text(out, csv.str());
  return local_ok ? 0 : 2;
}

int run_study(StudyConfig cfg, const std::string& out_csv, const std::string& out_json, Provenance prov) {
  const StudyResult result = convergence_study(cfg);
  const Verdict verdict = necessary_condition_verdict(result);

  write_text(out_csv, prov.to_csv_header() + result.to_csv());

  json j;
  j["provenance"] = prov.to_json();
  j["target"] = result.target;
  j["method"] = result.method;
  j["degree"] = result.degree;
  j["dimension"] = result.dim;
  j["rates"] = result.rates_json();
  j["verdict"] = to_string(verdict.status);
  j["error_optimal"] = verdict.error_optimal;
  j["indicators_bounded"] = verdict.indicators_bounded;
  j["blow_up_implication_fired"] = verdict.remark_fired;
  j["detail"] = verdict.detail;
  if (!out_json.empty()) write_text(out_json, j.dump(2) + "\n");

  switch (verdict.status) {
    case Verdict::Status::PASS: return 0;
    case Verdict::Status::FAIL: return 2;
    case Verdict::Status::INCONCLUSIVE: return 3;
  }
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("smoothcheck ") + kVersion +
               " - numerical smoothness indicators for piecewise polynomial fields"};
  app.require_subcommand(1);

  std::ostringstream cmdline;
  for (int i = 0; i < argc; ++i) cmdline << (i ? " " : "") << argv[i];

  // check-mesh ---------------------------------------------------------------
  auto* cm = app.add_subcommand("check-mesh", "validate a mesh and report its quality metrics");
  std::string cm_mesh, cm_out = "-";
  double cm_gamma = 1.0;
  cm->add_option("--mesh", cm_mesh, "mesh JSON file")->required();
  cm->add_option("--gamma", cm_gamma, "3D safe-radius calibration constant");
  cm->add_option("--out", cm_out, "report path (default stdout)");

  // indicator ----------------------------------------------------------------
  auto* ind = app.add_subcommand("indicator", "smoothness indicators for a field");
  std::string in_mesh, in_field, in_target, in_params, in_rule = "centroid", in_out = "-", in_csv;
  double in_dthr = -1, in_mthr = -1;
  ind->add_option("--mesh", in_mesh, "mesh JSON (optional when the field embeds one)");
  ind->add_option("--field", in_field, "field JSON file")->required();
  ind->add_option("--target", in_target, "built-in target for the interior differences");
  ind->add_option("--target-params", in_params, "target parameters, key=value[,key=value]");
  ind->add_option("--sample-rule", in_rule, "centroid|vertex_average")
      ->check(CLI::IsMember({"centroid", "vertex_average"}));
  ind->add_option("--d-threshold", in_dthr, "flag ||D_i|| above this (default: 10x median)");
  ind->add_option("--m-threshold", in_mthr, "flag |d^a u_h| above this (default: off)");
  ind->add_option("--out", in_out, "JSON report path (default stdout)");
  ind->add_option("--csv", in_csv, "per-interface CSV path");

  // cp-table -----------------------------------------------------------------
  auto* cp = app.add_subcommand("cp-table", "positivity constants of the jump quadratic form");
  std::vector<int> cp_n{1}, cp_p{0};
  std::vector<double> cp_r{0.25};
  std::string cp_out = "-";
  cp->add_option("--n", cp_n, "dimensions")->delimiter(',');
  cp->add_option("--p", cp_p, "degrees")->delimiter(',');
  cp->add_option("--r-hat", cp_r, "scaled radii in (0,1)")->delimiter(',');
  cp->add_option("--out", cp_out, "CSV path (default stdout)");

  // verify-lemmas --------------------------------------------------------------
  auto* vl = app.add_subcommand("verify-lemmas", "randomized checks of the dihedral-angle relations");
  int vl_count = 1000;
  std::uint64_t vl_seed = 7;
  std::string vl_out = "-";
  vl->add_option("--count", vl_count, "configurations per lemma");
  vl->add_option("--seed", vl_seed, "random seed");
  vl->add_option("--out", vl_out, "JSON report path (default stdout)");

  // lower-bound -----------------------------------------------------------------
  auto* lb = app.add_subcommand("lower-bound", "global bound report plus the local disk identity");
  std::string lb_target = "sin_pi_x", lb_params, lb_kind = "interval", lb_s = "2", lb_out = "-";
  int lb_p = 1, lb_levels = 4, lb_base = 0;
  lb->add_option("--target", lb_target, "built-in target");
  lb->add_option("--target-params", lb_params, "target parameters");
  lb->add_option("--kind", lb_kind, "element kind");
  lb->add_option("--p", lb_p, "polynomial degree");
  lb->add_option("--levels", lb_levels, "refinement levels");
  lb->add_option("--base-div", lb_base, "coarsest divisions per axis");
  lb->add_option("--s", lb_s, "norm: 1, 2 or inf");
  lb->add_option("--out", lb_out, "CSV path (default stdout)");

  // study -------------------------------------------------------------------
  auto* st = app.add_subcommand("study", "refinement study with the necessary-condition verdict");
  std::string st_target = "sin_pi_x", st_params, st_kind = "interval", st_method = "interpolant";
  std::string st_norms = "2", st_rule = "centroid", st_csv = "-", st_json;
  std::vector<std::string> st_files;
  int st_p = 1, st_levels = 5, st_base = 0;
  bool st_inject = false;
  st->add_option("--target", st_target, "built-in target");
  st->add_option("--target-params", st_params, "target parameters, key=value[,key=value]");
  st->add_option("--kind", st_kind, "element kind");
  st->add_option("--p", st_p, "polynomial degree")->check(CLI::Range(0, 4));
  st->add_option("--levels", st_levels, "refinement levels")->check(CLI::Range(3, 12));
  st->add_option("--base-div", st_base, "coarsest divisions per axis");
  st->add_option("--method", st_method, "interpolant|l2_fit|files");
  st->add_option("--fields", st_files, "field files, one per level (method=files)")->delimiter(',');
  st->add_option("--norms", st_norms, "error norms, comma separated");
  st->add_option("--sample-rule", st_rule, "centroid|vertex_average")
      ->check(CLI::IsMember({"centroid", "vertex_average"}));
  st->add_flag("--inject-jump", st_inject, "corrupt one element per level by an O(1) bump");
  st->add_option("--out-csv", st_csv, "per-level CSV path (default stdout)");
  st->add_option("--out-json", st_json, "verdict JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors collapse to exit 1; --help stays 0
  }

  try {
    Provenance prov;
    prov.command_line = cmdline.str();

    if (cm->parsed()) {
      prov.inputs = {{cm_mesh, file_hash(cm_mesh)}};
      prov.options = {{"gamma", fmt17(cm_gamma)}};
      return run_check_mesh(cm_mesh, cm_gamma, cm_out, prov);
    }
    if (ind->parsed()) {
      if (!in_mesh.empty()) prov.inputs.push_back({in_mesh, file_hash(in_mesh)});
      prov.inputs.push_back({in_field, file_hash(in_field)});
      prov.options = {{"target", in_target},
                      {"sample_rule", in_rule},
                      {"d_threshold", in_dthr >= 0 ? fmt17(in_dthr) : "default"},
                      {"m_threshold", in_mthr >= 0 ? fmt17(in_mthr) : "off"}};
      return run_indicator(in_mesh, in_field, in_target,
                           in_params.empty() ? json::object() : target_params_from_string(in_params),
                           in_rule, in_dthr, in_mthr, in_out, in_csv, prov);
    }
    if (cp->parsed()) {
      auto join = [](const auto& v) {
        std::ostringstream s;
        for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
        return s.str();
      };
      prov.options = {{"n", join(cp_n)}, {"p", join(cp_p)}, {"r_hat", join(cp_r)}};
      return run_cp_table(cp_n, cp_p, cp_r, cp_out, prov);
    }
    if (vl->parsed()) {
      prov.options = {{"count", std::to_string(vl_count)}, {"seed", std::to_string(vl_seed)}};
      return run_verify_lemmas(vl_count, vl_seed, vl_out, prov);
    }
    if (lb->parsed()) {
      prov.options = {{"target", lb_target},
                      {"kind", lb_kind},
                      {"p", std::to_string(lb_p)},
                      {"s", lb_s},
                      {"levels", std::to_string(lb_levels)}};
      return run_lower_bound(lb_target,
                             lb_params.empty() ? json::object() : target_params_from_string(lb_params),
                             element_kind_from_string(lb_kind), lb_p, lb_levels, lb_base,
                             norm_kind_from_string(lb_s), lb_out, prov);
    }
    if (st->parsed()) {
      StudyConfig cfg;
      cfg.target = st_target;
      if (!st_params.empty()) cfg.target_params = target_params_from_string(st_params);
      cfg.kind = element_kind_from_string(st_kind);
      cfg.degree = st_p;
      cfg.levels = st_levels;
      cfg.base_divisions = st_base;
      cfg.method = approx_method_from_string(st_method);
      cfg.field_files = st_files;
      cfg.norms = parse_norms(st_norms);
      cfg.sample_rule = st_rule == "vertex_average" ? SampleRule::vertex_average : SampleRule::centroid;
      cfg.inject_jump = st_inject;
      prov.options = {{"target", st_target},
                      {"kind", st_kind},
                      {"p", std::to_string(st_p)},
                      {"levels", std::to_string(st_levels)},
                      {"method", st_method},
                      {"norms", st_norms},
                      {"sample_rule", st_rule}};
      for (const auto& f : st_files) prov.inputs.push_back({f, file_hash(f)});
      return run_study(cfg, st_csv, st_json, prov);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 1;
}
