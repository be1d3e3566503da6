#include "gpm/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "gpm/voronoi.hpp"

namespace gpm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(std::string_view s) {
  const std::string t = trim(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw StudyError("not a number: '" + t + "'");
  }
  if (used != t.size()) throw StudyError("not a number: '" + t + "'");
  return v;
}

int parse_power_of_two(std::string_view s) {
  const std::string t = trim(s);
  if (t.rfind("2^", 0) != 0) throw StudyError("expected 2^<int>, got '" + t + "'");
  int e = 0;
  const char* first = t.data() + 2;
  const char* last = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(first, last, e);
  if (ec != std::errc() || ptr != last) throw StudyError("expected 2^<int>, got '" + t + "'");
  return e;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string("NA"); }

}  // namespace

double influence_radius(double dx, double m, std::optional<double> extension) {
  if (!(dx > 0.0) || !(m > 0.0)) throw StudyError("influence_radius: dx and m must be positive");
  const double h = 2.6 * std::pow(2.0, 5.0 / m - 5.0) * std::pow(dx, 1.0 / m);
  if (extension && h >= *extension) {
    throw StudyError("influence_radius: h = " + fmt(h) + " is not below the extension width H = " + fmt(*extension));
  }
  return h;
}

AnalyticField test_function(std::string_view id) {
  if (id == "sin2pi") {
    return AnalyticField{
        [](std::span<const double> p) { return std::sin(kTwoPi * (p[0] + p[1])); },
        [](std::span<const double> p) {
          const double g = kTwoPi * std::cos(kTwoPi * (p[0] + p[1]));
          return std::vector<double>{g, g};
        },
        [](std::span<const double> p) { return -2.0 * kTwoPi * kTwoPi * std::sin(kTwoPi * (p[0] + p[1])); }};
  }
  if (id == "linear") {
    return AnalyticField{[](std::span<const double> p) { return 1.0 + 2.0 * p[0] - 3.0 * p[1]; },
                         [](std::span<const double>) { return std::vector<double>{2.0, -3.0}; },
                         [](std::span<const double>) { return 0.0; }};
  }
  if (id == "quadratic") {
    return AnalyticField{
        [](std::span<const double> p) { return p[0] * p[0] + p[0] * p[1] - 2.0 * p[1] * p[1]; },
        [](std::span<const double> p) { return std::vector<double>{2.0 * p[0] + p[1], p[0] - 4.0 * p[1]}; },
        [](std::span<const double>) { return -2.0; }};
  }
  if (id == "zero") {
    return AnalyticField{[](std::span<const double>) { return 0.0; },
                         [](std::span<const double>) { return std::vector<double>{0.0, 0.0}; },
                         [](std::span<const double>) { return 0.0; }};
  }
  throw StudyError("unknown test function '" + std::string(id) + "'");
}

const std::vector<std::string>& test_function_ids() {
  static const std::vector<std::string> ids{"sin2pi", "linear", "quadratic", "zero"};
  return ids;
}

OperatorKind parse_operator(std::string_view name) {
  if (name == "interp") return OperatorKind::interpolant;
  if (name == "grad") return OperatorKind::gradient;
  if (name == "lap") return OperatorKind::laplacian;
  throw StudyError("unknown operator '" + std::string(name) + "' (interp, grad, lap)");
}

std::string operator_name(OperatorKind op) {
  switch (op) {
    case OperatorKind::interpolant:
      return "interp";
    case OperatorKind::gradient:
      return "grad";
    case OperatorKind::laplacian:
      return "lap";
  }
  return "?";
}

double relative_error(const ParticleSystem& ps, const RadialWeight& w, const AnalyticField& f, OperatorKind op,
                      int samples) {
  if (ps.dim() != 2) throw StudyError("relative_error: only d = 2 is supported");
  if (samples < 2) throw StudyError("relative_error: need at least 2 samples per axis");

  auto true_norm = [&](std::span<const double> p) {
    switch (op) {
      case OperatorKind::interpolant:
        return std::abs(f.value(p));
      case OperatorKind::gradient: {
        const auto g = f.gradient(p);
        return std::hypot(g[0], g[1]);
      }
      case OperatorKind::laplacian:
        return std::abs(f.laplacian(p));
    }
    return 0.0;
  };

  const Box inner = ps.domain().inner();
  double denom = 0.0;
  for (int j = 0; j < samples; ++j) {
    for (int i = 0; i < samples; ++i) {
      const double p[2] = {inner.lower[0] + inner.extent(0) * i / (samples - 1),
                           inner.lower[1] + inner.extent(1) * j / (samples - 1)};
      denom = std::max(denom, true_norm(p));
    }
  }
  if (!(denom > 0.0)) throw StudyError("relative_error: the exact operator vanishes on the domain");

  PointSet inside(ps.dim(), {});
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (inner.contains_open(ps.point(i))) inside.push_back(ps.point(i));
  }
  if (inside.empty()) throw StudyError("relative_error: no particle lies inside the domain");

  const FieldSamples samples_f = FieldSamples::sample(ps, f);
  const auto approx = evaluate_field(ps, w, samples_f, inside, op);

  double num = 0.0;
  for (std::size_t k = 0; k < inside.size(); ++k) {
    const auto p = inside[k];
    double err = 0.0;
    switch (op) {
      case OperatorKind::interpolant:
        err = std::abs(f.value(p) - approx[k][0]);
        break;
      case OperatorKind::gradient: {
        const auto g = f.gradient(p);
        err = std::hypot(g[0] - approx[k][0], g[1] - approx[k][1]);
        break;
      }
      case OperatorKind::laplacian:
        err = std::abs(f.laplacian(p) - approx[k][0]);
        break;
    }
    num = std::max(num, err);
  }
  return num / denom;
}

double observed_rate(double e1, double h1, double e2, double h2) {
  if (!(e1 > 0.0) || !(e2 > 0.0) || !(h1 > 0.0) || !(h2 > 0.0)) {
    throw StudyError("observed_rate: errors and radii must be positive");
  }
  if (h1 == h2) throw StudyError("observed_rate: radii must differ");
  return std::log(e1 / e2) / std::log(h1 / h2);
}

std::optional<double> theoretical_rate(OperatorKind op, double m, int n) {
  const double cap = static_cast<double>(n) + 1.0;
  const double rate = op == OperatorKind::laplacian ? std::min(m - 2.0, cap) : std::min(m - 1.0, cap);
  if (!(rate > 0.0)) return std::nullopt;
  return rate;
}

std::optional<double> theoretical_rate(OperatorKind op, double m, const RadialWeight& w) {
  const auto k = w.smooth_order();
  if (op == OperatorKind::gradient && !(k && *k >= 0)) return std::nullopt;
  if (op == OperatorKind::laplacian && !(k && *k >= 1)) return std::nullopt;
  return theoretical_rate(op, m, w.moment_order());
}

std::vector<double> parse_dx_levels(std::string_view text) {
  std::vector<double> out;
  const auto range = text.find("..");
  if (range != std::string_view::npos) {
    const int a = parse_power_of_two(text.substr(0, range));
    const int b = parse_power_of_two(text.substr(range + 2));
    const int step = b >= a ? 1 : -1;
    for (int e = a;; e += step) {
      out.push_back(std::ldexp(1.0, e));
      if (e == b) break;
    }
    return out;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    const std::string t = trim(item);
    if (t.empty()) throw StudyError("empty entry in dx level list");
    out.push_back(t.rfind("2^", 0) == 0 ? std::ldexp(1.0, parse_power_of_two(t)) : parse_double(t));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void StudyConfig::validate() const {
  if (dx_levels.empty()) throw StudyError("study needs at least one dx level");
  for (std::size_t i = 0; i < dx_levels.size(); ++i) {
    if (!(dx_levels[i] > 0.0)) throw StudyError("dx levels must be positive");
    if (i > 0 && !(dx_levels[i] < dx_levels[i - 1])) throw StudyError("dx levels must be strictly decreasing");
    influence_radius(dx_levels[i], m, domain.extension());
  }
  if (!(noise >= 0.0 && noise < 0.5)) throw StudyError("noise must lie in [0, 0.5)");
  if (domain.dim() != 2) throw StudyError("studies run in d = 2");
  catalog_weight(weight_name);
  gpm::test_function(test_function);
}

std::optional<double> StudyResult::finest_rate() const {
  if (levels.size() < 2) return std::nullopt;
  return levels.back().rate_observed;
}

StudyResult run_study(const StudyConfig& cfg) {
  cfg.validate();
  const RadialWeight& w = catalog_weight(cfg.weight_name);
  const AnalyticField f = test_function(cfg.test_function);

  StudyResult result;
  result.config = cfg;
  result.rate_theoretical = theoretical_rate(cfg.op, cfg.m, w);

  for (double dx : cfg.dx_levels) {
    StudyLevel level;
    level.dx = dx;
    try {
      level.h = influence_radius(dx, cfg.m, cfg.domain.extension());
      PointSet pts = perturbed_lattice(dx, cfg.noise, cfg.seed, cfg.domain);
      level.n = pts.size();
      auto volumes = uniform_volumes(pts.size(), cfg.domain);
      const ParticleSystem ps(cfg.domain, std::move(pts), std::move(volumes), level.h);
      level.rel_error = relative_error(ps, w, f, cfg.op);
      if (cfg.indicators) {
        const VoronoiDiagram diagram = voronoi_decompose(ps);
        level.r_n = covering_radius(diagram, ps.points());
        DeviationResult dn = voronoi_deviation_bound(ps, diagram);
        dn.plan.reset();
        level.d_n = std::move(dn);
      }
    } catch (const std::exception& e) {
      level.failure = e.what();
    }
    if (!result.levels.empty()) {
      const StudyLevel& prev = result.levels.back();
      if (prev.rel_error && level.rel_error && *prev.rel_error > 0.0 && *level.rel_error > 0.0 &&
          std::isfinite(*prev.rel_error) && std::isfinite(*level.rel_error)) {
        level.rate_observed = observed_rate(*prev.rel_error, prev.h, *level.rel_error, level.h);
      }
    }
    result.levels.push_back(std::move(level));
  }
  return result;
}

void write_study_csv(const StudyResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw StudyError("cannot open '" + path + "' for writing");
  out << "dx,h,N,r_N,dN_kind,dN,rel_error,rate_observed,rate_theoretical\n";
  for (const StudyLevel& l : result.levels) {
    out << fmt(l.dx) << ',' << fmt(l.h) << ',' << l.n << ',' << fmt(l.r_n) << ','
        << (l.d_n ? to_string(l.d_n->kind) : std::string("NA")) << ','
        << (l.d_n ? fmt(l.d_n->value) : std::string("NA")) << ',' << fmt(l.rel_error) << ','
        << fmt(l.rate_observed) << ',' << fmt(result.rate_theoretical) << '\n';
  }
  if (!out) throw StudyError("failed writing '" + path + "'");
}

void write_study_plot(const StudyResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw StudyError("cannot open '" + path + "' for writing");
  out << "# weight " << result.config.weight_name << ", op " << operator_name(result.config.op) << ", m "
      << result.config.m << "\n# h rel_error\n";
  for (const StudyLevel& l : result.levels) {
    if (l.rel_error) out << fmt(l.h) << ' ' << fmt(*l.rel_error) << '\n';
  }
  if (!out) throw StudyError("failed writing '" + path + "'");
}

}  // namespace gpm
