// gpm: command line front end for the particle operator library.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gpm/compat.hpp"
#include "gpm/geometry.hpp"
#include "gpm/harness.hpp"
#include "gpm/indicators.hpp"
#include "gpm/io.hpp"
#include "gpm/voronoi.hpp"
#include "gpm/weights.hpp"

namespace {

using nlohmann::json;

std::string json_scalar(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

const json* lookup(const json& obj, const std::string& name) {
  if (!obj.is_object()) return nullptr;
  std::string alt = name;
  for (char& c : alt) {
    if (c == '-') c = '_';
  }
  for (const std::string& key : {name, alt}) {
    const auto it = obj.find(key);
    if (it != obj.end() && !it->is_object()) return &*it;
  }
  return nullptr;
}

// Config keys are long flag names (dashes or underscores). Top-level keys
// apply to every subcommand; an object keyed by a subcommand name overrides
// them for that subcommand.
void apply_config(CLI::App& app, const json& flat, const json& scoped) {
  for (CLI::Option* opt : app.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    const json* v = lookup(scoped, name);
    if (v == nullptr) v = lookup(flat, name);
    if (v == nullptr) continue;
    opt->required(false);
    opt->default_val(json_scalar(*v));
  }
  for (CLI::App* sub : app.get_subcommands({})) {
    const auto it = scoped.is_object() ? scoped.find(sub->get_name()) : scoped.end();
    apply_config(*sub, flat, it != scoped.end() ? *it : json::object());
  }
}

json load_config(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    std::string path;
    if (arg == "--config" && i + 1 < argc) {
      path = argv[i + 1];
    } else if (arg.rfind("--config=", 0) == 0) {
      path = arg.substr(9);
    } else {
      continue;
    }
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    json cfg = json::parse(in);
    if (!cfg.is_object()) throw std::runtime_error("config must be a JSON object");
    return cfg;
  }
  return json::object();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "N/A"; }

// gen
struct GenOptions {
  double dx = 1.0 / 32.0;
  std::uint64_t seed = 0;
  double noise = 0.25;
  double extension = 0.1;
  std::string out = "pts.csv";
  std::string diagram;
};

void run_gen(const GenOptions& o) {
  const gpm::RectDomain domain = gpm::RectDomain::unit_square(o.extension);
  gpm::PointSet pts = gpm::perturbed_lattice(o.dx, o.noise, o.seed, domain);
  const auto volumes = gpm::uniform_volumes(pts.size(), domain);
  gpm::write_points_csv(o.out, pts, volumes);
  std::cout << "wrote " << pts.size() << " particles to " << o.out << '\n';
  if (!o.diagram.empty()) {
    gpm::write_diagram_csv(o.diagram, gpm::voronoi_decompose(pts, domain.extended()));
    std::cout << "wrote Voronoi cells to " << o.diagram << '\n';
  }
}

// indicators
struct IndicatorOptions {
  std::string pts;
  std::size_t exact_lp_cap = 40;
  double extension = 0.1;
  double h = 0.0;
  double dx = 0.0;
  double m = 5.0;
  std::string out;
};

void run_indicators(const IndicatorOptions& o) {
  const gpm::RectDomain domain = gpm::RectDomain::unit_square(o.extension);
  gpm::PointTable table = gpm::read_points_csv(o.pts);
  double h = o.h;
  if (!(h > 0.0)) {
    if (!(o.dx > 0.0)) throw std::runtime_error("indicators: give --h or --dx");
    h = gpm::influence_radius(o.dx, o.m, domain.extension());
  }
  const gpm::ParticleSystem ps(domain, std::move(table.points), std::move(table.volumes), h);
  const gpm::VoronoiDiagram diagram = gpm::voronoi_decompose(ps);

  gpm::IndicatorRow row;
  row.dx = o.dx;
  row.h = h;
  row.n = ps.size();
  row.r_n = gpm::covering_radius(diagram, ps.points());
  const gpm::DeviationResult bound = gpm::voronoi_deviation_bound(ps, diagram);
  row.d_n_kind = bound.kind;
  row.d_n = bound.value;
  if (ps.size() <= o.exact_lp_cap) {
    const gpm::DeviationResult exact = gpm::voronoi_deviation_exact(ps, diagram, o.exact_lp_cap);
    row.d_n_kind = exact.kind;
    row.d_n = exact.value;
  }
  const gpm::RegularityReport reg = gpm::regularity_report(row.r_n, row.d_n, h, o.m);
  if (!reg.unbounded) row.c0 = reg.c0;

  std::cout << "N        " << row.n << "\nh        " << fmt(h) << "\nr_N      " << fmt(row.r_n) << "\nd_N      "
            << fmt(row.d_n) << " (" << gpm::to_string(row.d_n_kind) << ")\n";
  if (row.d_n_kind != gpm::DeviationKind::exact) {
    std::cout << "         exact LP skipped: N > --exact-lp-cap " << o.exact_lp_cap << '\n';
  }
  std::cout << "c0_m" << o.m << "    " << fmt(row.c0) << '\n';
  if (!o.out.empty()) gpm::write_indicators_csv(o.out, o.m, {row});
}

// weights
void run_weights_check(const std::string& name, bool as_json) {
  const gpm::RadialWeight& w = gpm::catalog_weight(name);
  if (as_json) {
    std::cout << gpm::to_json(w) << '\n';
    return;
  }
  const gpm::AdmissibilityReport adm = gpm::check_admissible(w);
  std::cout << "weight       " << w.name() << " (d=" << w.dim() << ", claimed n=" << w.moment_order() << ", k="
            << (w.smooth_order() ? std::to_string(*w.smooth_order()) : std::string("none")) << ")\n";
  std::cout << "scale        " << fmt(w.scale()) << '\n';
  std::cout << "bounded      " << (adm.bounded ? "yes" : "no") << '\n';
  std::cout << "continuous   " << (adm.continuous ? "yes" : "no") << " (max jump " << fmt(adm.max_jump) << ")\n";
  std::cout << "support      " << (adm.support ? "yes" : "no") << '\n';
  std::cout << "mass         " << fmt(adm.integral) << '\n';
  std::cout << "admissible   " << (adm.admissible() ? "yes" : "no") << '\n';
  for (int n : {1, 3, 5}) {
    const gpm::MomentCheck mc = gpm::check_moment_order(w, n);
    std::cout << "moment n=" << n << "   " << (mc.satisfied ? "pass" : "fail");
    for (double r : mc.residuals) std::cout << ' ' << fmt(r);
    std::cout << '\n';
  }
  for (int k : {0, 1}) {
    std::cout << "smooth k=" << k << "   " << (gpm::check_smoothness_order(w, k) ? "pass" : "fail") << '\n';
  }
  for (const std::string& note : gpm::catalog_corrections()) {
    if (note.rfind(w.name() + ":", 0) == 0 || note.find(w.name()) != std::string::npos) {
      std::cout << "note         " << note << '\n';
    }
  }
}

void run_weights_construct(int d, int n, int p) {
  const gpm::RadialWeight w = gpm::construct_polynomial_weight(d, n, p);
  std::cout << "gamma        " << fmt(w.scale()) << '\n';
  const auto a = gpm::polynomial_coefficients(w);
  for (std::size_t l = 0; l < a.size(); ++l) std::cout << "a_" << l + 1 << "          " << fmt(a[l]) << '\n';
  const gpm::MomentCheck mc = gpm::check_moment_order(w, n);
  std::cout << "moment n=" << n << "   " << (mc.satisfied ? "pass" : "fail") << '\n';
  std::cout << gpm::to_json(w) << '\n';
}

// convergence
struct ConvergenceOptions {
  double m = 5.0;
  std::string weight = "I1";
  std::string op = "interp";
  std::string dx_levels = "2^-5..2^-9";
  std::uint64_t seed = 7;
  std::string function = "sin2pi";
  double noise = 0.25;
  double extension = 0.1;
  bool no_indicators = false;
  std::string out = "study.csv";
  std::string plot;
};

int run_convergence(const ConvergenceOptions& o) {
  gpm::StudyConfig cfg;
  cfg.dx_levels = gpm::parse_dx_levels(o.dx_levels);
  cfg.m = o.m;
  cfg.weight_name = o.weight;
  cfg.op = gpm::parse_operator(o.op);
  cfg.seed = o.seed;
  cfg.test_function = o.function;
  cfg.noise = o.noise;
  cfg.domain = gpm::RectDomain::unit_square(o.extension);
  cfg.indicators = !o.no_indicators;

  const gpm::StudyResult result = gpm::run_study(cfg);
  std::printf("%-12s %-12s %-9s %-12s %-12s %-14s %-8s\n", "dx", "h", "N", "r_N", "d_N", "rel_error", "rate");
  int failures = 0;
  for (const gpm::StudyLevel& l : result.levels) {
    std::printf("%-12s %-12s %-9zu %-12s %-12s %-14s %-8s\n", fmt(l.dx).c_str(), fmt(l.h).c_str(), l.n,
                fmt(l.r_n).c_str(), l.d_n ? fmt(l.d_n->value).c_str() : "N/A", fmt(l.rel_error).c_str(),
                fmt(l.rate_observed).c_str());
    if (!l.failure.empty()) {
      std::printf("  level failed: %s\n", l.failure.c_str());
      ++failures;
    }
  }
  std::printf("theoretical rate: %s\n", fmt(result.rate_theoretical).c_str());
  gpm::write_study_csv(result, o.out);
  const std::string plot = o.plot.empty() ? o.out + ".dat" : o.plot;
  gpm::write_study_plot(result, plot);
  std::printf("wrote %s and %s\n", o.out.c_str(), plot.c_str());
  return failures == 0 ? 0 : 1;
}

// compat-check
int run_compat(const gpm::EquivalenceOptions& o) {
  const auto results = gpm::check_equivalences(o);
  std::printf("%-18s %-14s %-8s %s\n", "identity", "max |diff|", "evals", "result");
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%-18s %-14.3e %-8zu %s\n", r.name.c_str(), r.max_abs_diff, r.evaluations, r.passed ? "PASS" : "FAIL");
    ok = ok && r.passed;
  }
  const bool transform = gpm::same_profile(gpm::sph_transform(gpm::catalog_weight("spline2d")),
                                           gpm::catalog_weight("G2"));
  std::printf("%-18s %-14s %-8s %s\n", "sph_transform=G2", "exact", "1", transform ? "PASS" : "FAIL");
  return ok && transform ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized particle method operators, indicators and convergence studies"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON file whose keys mirror the long flags");

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Perturbed lattice with uniform volumes, written as CSV");
  gen_cmd->add_option("--dx", gen.dx, "Lattice spacing")->required();
  gen_cmd->add_option("--seed", gen.seed, "Noise seed");
  gen_cmd->add_option("--noise", gen.noise, "Perturbation bound as a fraction of dx")->capture_default_str();
  gen_cmd->add_option("--extension", gen.extension, "Width H of the layer around the unit square")
      ->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Points CSV (id,x,y,volume)")->capture_default_str();
  gen_cmd->add_option("--diagram", gen.diagram, "Also write Voronoi cells (id,vertex_index,vx,vy)");

  IndicatorOptions ind;
  auto* ind_cmd = app.add_subcommand("indicators", "Covering radius, Voronoi deviation and c0 for a point file");
  ind_cmd->set_help_flag("--help", "Print this help message and exit");
  ind_cmd->add_option("--pts", ind.pts, "Points CSV")->required();
  ind_cmd->add_option("--exact-lp-cap", ind.exact_lp_cap, "Largest N solved by the exact LP")->capture_default_str();
  ind_cmd->add_option("--h", ind.h, "Influence radius");
  ind_cmd->add_option("--dx", ind.dx, "Lattice spacing, used for h when --h is absent");
  ind_cmd->add_option("--m", ind.m, "Regularity order for c0")->capture_default_str();
  ind_cmd->add_option("--extension", ind.extension, "Width H of the layer around the unit square")
      ->capture_default_str();
  ind_cmd->add_option("--out", ind.out, "Indicators CSV");

  auto* weights_cmd = app.add_subcommand("weights", "Inspect catalog weights or construct polynomial ones");
  weights_cmd->require_subcommand(1);
  std::string weight_name;
  bool weight_json = false;
  auto* check_cmd = weights_cmd->add_subcommand("check", "Admissibility, moments and smoothness of a catalog weight");
  check_cmd->add_option("--name", weight_name, "I1..I3, G1..G3, L1..L3, spline2d, mps-classic")->required();
  check_cmd->add_flag("--json", weight_json, "Print the weight definition as JSON");
  int cd = 2;
  int cn = 3;
  int cp = 3;
  auto* construct_cmd = weights_cmd->add_subcommand("construct", "Minimal polynomial weight of moment order n");
  construct_cmd->add_option("--d", cd, "Dimension")->capture_default_str();
  construct_cmd->add_option("--n", cn, "Moment order")->capture_default_str();
  construct_cmd->add_option("--p", cp, "Polynomial degree")->capture_default_str();

  ConvergenceOptions conv;
  auto* conv_cmd = app.add_subcommand("convergence", "Truncation-error convergence study");
  conv_cmd->add_option("--m", conv.m, "Regularity order in h = 2.6 2^(5/m-5) dx^(1/m)")->capture_default_str();
  conv_cmd->add_option("--weight", conv.weight, "Catalog weight")->capture_default_str();
  conv_cmd->add_option("--op", conv.op, "interp, grad or lap")->capture_default_str();
  conv_cmd->add_option("--dx-levels", conv.dx_levels, "2^-a..2^-b or a comma list")->capture_default_str();
  conv_cmd->add_option("--seed", conv.seed, "Noise seed")->capture_default_str();
  conv_cmd->add_option("--function", conv.function, "sin2pi, linear, quadratic or zero")->capture_default_str();
  conv_cmd->add_option("--noise", conv.noise, "Perturbation bound as a fraction of dx")->capture_default_str();
  conv_cmd->add_option("--extension", conv.extension, "Width H of the layer around the unit square")
      ->capture_default_str();
  conv_cmd->add_flag("--no-indicators", conv.no_indicators, "Skip covering radius and d_N");
  conv_cmd->add_option("--out", conv.out, "Study CSV")->capture_default_str();
  conv_cmd->add_option("--plot", conv.plot, "h vs error file (default <out>.dat)");

  gpm::EquivalenceOptions eq;
  auto* compat_cmd = app.add_subcommand("compat-check", "SPH/MPS versus generalized operator identities");
  compat_cmd->add_option("--seed", eq.seed, "Random seed")->capture_default_str();
  compat_cmd->add_option("--configs", eq.configs, "Random configurations")->capture_default_str();
  compat_cmd->add_option("--particles", eq.particles, "Particles per configuration")->capture_default_str();
  compat_cmd->add_option("--tolerance", eq.tolerance, "Max-abs difference allowed")->capture_default_str();

  try {
    const json cfg = load_config(argc, argv);
    apply_config(app, cfg, cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) run_gen(gen);
    if (*ind_cmd) run_indicators(ind);
    if (*check_cmd) run_weights_check(weight_name, weight_json);
    if (*construct_cmd) run_weights_construct(cd, cn, cp);
    if (*conv_cmd) return run_convergence(conv);
    if (*compat_cmd) return run_compat(eq);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
