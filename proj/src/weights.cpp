#include "gpm/weights.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <json.hpp>

namespace gpm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kContinuityTol = 1e-12;
constexpr double kUnitMassTol = 1e-10;
constexpr double kMomentTol = 1e-10;

// 30 nodes integrate polynomials up to degree 59 exactly.
using Gauss = boost::math::quadrature::gauss<double, 30>;

double ipow(double r, int e) {
  if (e == 0) return 1.0;
  if (e > 0) {
    double out = 1.0;
    for (int k = 0; k < e; ++k) out *= r;
    return out;
  }
  return 1.0 / ipow(r, -e);
}

}  // namespace

double PolyPiece::eval(double r) const {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * r + *it;
  return min_power == 0 ? acc : acc * ipow(r, min_power);
}

double PolyPiece::eval_derivative(double r) const {
  double acc = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 0;) {
    const int e = min_power + static_cast<int>(k);
    if (e != 0) acc += static_cast<double>(e) * coeffs[k] * ipow(r, e - 1);
  }
  return acc;
}

int PolyPiece::lowest_degree() const {
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (coeffs[k] != 0.0) return min_power + static_cast<int>(k);
  }
  return INT_MAX;
}

RadialWeight::RadialWeight(std::string name, int dim, double scale, std::vector<PolyPiece> pieces, int moment_order,
                           std::optional<int> smooth_order)
    : name_(std::move(name)),
      dim_(dim),
      scale_(scale),
      pieces_(std::move(pieces)),
      moment_order_(moment_order),
      smooth_order_(smooth_order) {
  if (dim_ < 1) throw WeightError("RadialWeight: dimension must be >= 1");
  if (!std::isfinite(scale_)) throw WeightError("RadialWeight: scale must be finite");
  if (pieces_.empty()) throw WeightError("RadialWeight: at least one piece required");
  if (pieces_.front().lo != 0.0 || pieces_.back().hi != 1.0) {
    throw WeightError("RadialWeight: pieces must cover [0, 1]");
  }
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    PolyPiece& p = pieces_[k];
    if (!(p.lo < p.hi)) throw WeightError("RadialWeight: empty piece interval");
    if (k > 0 && pieces_[k - 1].hi != p.lo) throw WeightError("RadialWeight: pieces must be contiguous");
    if (p.coeffs.empty()) p.coeffs.push_back(0.0);
    while (p.min_power > 0) {
      p.coeffs.insert(p.coeffs.begin(), 0.0);
      --p.min_power;
    }
    while (p.coeffs.size() > 1 && p.coeffs.back() == 0.0) p.coeffs.pop_back();
  }
}

const PolyPiece* RadialWeight::piece_at(double r) const {
  if (!(r >= 0.0) || r >= 1.0) return nullptr;
  for (const PolyPiece& p : pieces_) {
    if (r < p.hi) return &p;
  }
  return nullptr;
}

double RadialWeight::evaluate(double r) const {
  const PolyPiece* p = piece_at(r);
  return p == nullptr ? 0.0 : scale_ * p->eval(r);
}

double RadialWeight::derivative(double r) const {
  const PolyPiece* p = piece_at(r);
  return p == nullptr ? 0.0 : scale_ * p->eval_derivative(r);
}

RadialWeight RadialWeight::with_scale(double scale) const {
  RadialWeight w = *this;
  w.scale_ = scale;
  return w;
}

RadialWeight RadialWeight::with_name(std::string name) const {
  RadialWeight w = *this;
  w.name_ = std::move(name);
  return w;
}

RadialWeight RadialWeight::with_claims(int moment_order, std::optional<int> smooth_order) const {
  RadialWeight w = *this;
  w.moment_order_ = moment_order;
  w.smooth_order_ = smooth_order;
  return w;
}

double evaluate_scaled(const RadialWeight& w, double h, double r) {
  if (!(h > 0.0)) throw WeightError("evaluate_scaled: h must be positive");
  return w.evaluate(r / h) / ipow(h, w.dim());
}

double unit_sphere_measure(int dim) {
  if (dim < 1) throw WeightError("unit_sphere_measure: dimension must be >= 1");
  const double half = 0.5 * static_cast<double>(dim);
  return 2.0 * std::pow(kPi, half) / std::tgamma(half);
}

double radial_moment(const RadialWeight& w, int power) {
  double total = 0.0;
  for (const PolyPiece& p : w.pieces()) {
    if (p.lo == 0.0 && p.lowest_degree() != INT_MAX && p.lowest_degree() + power <= -1) {
      return std::numeric_limits<double>::infinity();
    }
    total += Gauss::integrate([&](double r) { return ipow(r, power) * p.eval(r); }, p.lo, p.hi);
  }
  return w.scale() * total;
}

double mass(const RadialWeight& w) { return unit_sphere_measure(w.dim()) * radial_moment(w, w.dim() - 1); }

double second_moment(const RadialWeight& w, int dim) { return unit_sphere_measure(dim) * radial_moment(w, dim + 1); }

AdmissibilityReport check_admissible(const RadialWeight& w) {
  AdmissibilityReport report;
  const auto& pieces = w.pieces();

  report.bounded = std::all_of(pieces.begin(), pieces.end(), [](const PolyPiece& p) {
    return p.lowest_degree() >= 0 || (p.lo > 0.0);
  });

  double jump = 0.0;
  for (std::size_t k = 1; k < pieces.size(); ++k) {
    const double b = pieces[k].lo;
    jump = std::max(jump, std::abs(w.scale() * (pieces[k - 1].eval(b) - pieces[k].eval(b))));
  }
  const double tail = std::abs(w.scale() * pieces.back().eval(1.0));
  report.max_jump = std::max(jump, tail);
  report.continuous = report.bounded && report.max_jump <= kContinuityTol;

  const bool nonzero_tail = w.scale() != 0.0 && pieces.back().lowest_degree() != INT_MAX;
  report.support = tail <= kContinuityTol && nonzero_tail;

  report.integral = report.bounded ? mass(w) : std::numeric_limits<double>::infinity();
  report.unit_integral = std::abs(report.integral - 1.0) <= kUnitMassTol;
  return report;
}

MomentCheck check_moment_order(const RadialWeight& w, int n) {
  if (n < 1) throw WeightError("check_moment_order: n must be >= 1");
  MomentCheck out;
  out.satisfied = true;
  const int d = w.dim();
  const double sphere = unit_sphere_measure(d);
  for (int j = 1; j <= n / 2; ++j) {
    const double residual = sphere * radial_moment(w, d + 2 * j - 1);
    out.residuals.push_back(residual);
    if (!(std::abs(residual) < kMomentTol)) out.satisfied = false;
  }
  return out;
}

int lowest_degree_at_origin(const RadialWeight& w) { return w.pieces().front().lowest_degree(); }

double derivative_jump(const RadialWeight& w) {
  const auto& pieces = w.pieces();
  double jump = 0.0;
  for (std::size_t k = 1; k < pieces.size(); ++k) {
    const double b = pieces[k].lo;
    jump = std::max(jump, std::abs(w.scale() * (pieces[k - 1].eval_derivative(b) - pieces[k].eval_derivative(b))));
  }
  return jump;
}

bool check_smoothness_order(const RadialWeight& w, int k) {
  if (k < 0) throw WeightError("check_smoothness_order: k must be >= 0");
  const auto& pieces = w.pieces();
  const bool bounded = std::all_of(pieces.begin(), pieces.end(), [](const PolyPiece& p) {
    return p.lowest_degree() >= 0;
  });
  if (!bounded || derivative_jump(w) > kContinuityTol) return false;
  const int p0 = lowest_degree_at_origin(w);
  return p0 == INT_MAX || p0 >= k + 1;
}

RadialWeight construct_polynomial_weight(int dim, int n, int p) {
  if (dim < 1) throw WeightError("construct_polynomial_weight: dimension must be >= 1");
  if (n < 1) throw WeightError("construct_polynomial_weight: n must be >= 1");
  const int conditions = n / 2;
  if (p < conditions + 2) {
    throw WeightError("construct_polynomial_weight: degree p must be at least floor(n/2) + 2");
  }

  // Rows: w(1) = 0, w'(1) = 0, then one radial moment condition per j.
  const int rows = 2 + conditions;
  Eigen::MatrixXd a(rows, p);
  Eigen::VectorXd rhs(rows);
  for (int l = 1; l <= p; ++l) {
    a(0, l - 1) = 1.0;
    a(1, l - 1) = static_cast<double>(l);
  }
  rhs(0) = -1.0;
  rhs(1) = 0.0;
  for (int j = 1; j <= conditions; ++j) {
    const double dj = static_cast<double>(dim + 2 * j);
    for (int l = 1; l <= p; ++l) a(1 + j, l - 1) = dj / (dj + static_cast<double>(l));
    rhs(1 + j) = -1.0;
  }

  const Eigen::VectorXd coef = a.completeOrthogonalDecomposition().solve(rhs);
  const double residual = (a * coef - rhs).norm();
  if (!coef.allFinite() || residual > 1e-9) {
    throw WeightError("construct_polynomial_weight: inconsistent linear system");
  }

  PolyPiece piece{0.0, 1.0, 0, {1.0}};
  for (int l = 0; l < p; ++l) piece.coeffs.push_back(coef(l));

  std::ostringstream name;
  name << "poly-d" << dim << "-n" << n << "-p" << p;
  RadialWeight shape(name.str(), dim, 1.0, {piece}, n, std::nullopt);
  const double m = mass(shape);
  if (!(std::abs(m) > 0.0)) throw WeightError("construct_polynomial_weight: profile has zero mass");
  return shape.with_scale(1.0 / m);
}

std::vector<double> polynomial_coefficients(const RadialWeight& w) {
  const PolyPiece& p = w.pieces().front();
  if (p.min_power != 0 || p.coeffs.front() == 0.0) {
    throw WeightError("polynomial_coefficients: profile has no constant term");
  }
  std::vector<double> out;
  for (std::size_t k = 1; k < p.coeffs.size(); ++k) out.push_back(p.coeffs[k] / p.coeffs.front());
  return out;
}

namespace {

struct CatalogData {
  std::vector<RadialWeight> weights;
  std::vector<std::string> corrections;
};

PolyPiece poly(double lo, double hi, std::vector<double> c, int min_power = 0) {
  return PolyPiece{lo, hi, min_power, std::move(c)};
}

CatalogData build_catalog() {
  const std::vector<PolyPiece> spline = {poly(0.0, 0.5, {1.0, 0.0, -6.0, 6.0}),
                                         poly(0.5, 1.0, {2.0, -6.0, 6.0, -2.0})};
  const std::vector<PolyPiece> spline_gradient = {poly(0.0, 0.5, {0.0, 0.0, 6.0, -9.0}),
                                                  poly(0.5, 1.0, {0.0, 3.0, -6.0, 3.0})};
  const double spline_c = 40.0 / (7.0 * kPi);

  std::vector<RadialWeight> printed = {
      {"I1", 2, 3.0 / kPi, {poly(0.0, 1.0, {1.0, -1.0})}, 1, std::nullopt},
      {"I2", 2, spline_c, spline, 1, std::nullopt},
      {"I3", 2, 5.0 / kPi, {poly(0.0, 1.0, {2.0, -5.0, 3.0})}, 3, std::nullopt},
      {"G1", 2, 6.0 / kPi, {poly(0.0, 1.0, {0.0, 1.0, -1.0})}, 1, 0},
      {"G2", 2, spline_c, spline_gradient, 1, 0},
      {"G3", 2, 15.0 / (2.0 * kPi), {poly(0.0, 1.0, {0.0, 5.0, -12.0, 7.0})}, 3, 0},
      {"L1", 2, 10.0 / kPi, {poly(0.0, 1.0, {0.0, 0.0, 1.0, -1.0})}, 1, 1},
      {"L2", 2, spline_c, spline_gradient, 1, 1},
      {"L3", 2, 30.0 / kPi, {poly(0.0, 1.0, {0.0, 0.0, 3.0, -7.0, 4.0})}, 3, 1},
      {"spline2d", 2, spline_c, spline, 1, std::nullopt},
      {"mps-classic", 2, 1.0, {poly(0.0, 1.0, {1.0, -1.0}, -1)}, 1, std::nullopt},
  };

  CatalogData data;
  for (RadialWeight& w : printed) {
    const AdmissibilityReport report = check_admissible(w);
    if (report.bounded && report.continuous && std::abs(report.integral - 1.0) > 1e-8) {
      const double corrected = w.scale() / report.integral;
      std::ostringstream msg;
      msg.precision(12);
      msg << w.name() << ": printed constant " << w.scale() << " gives mass " << report.integral
          << "; rescaled to " << corrected;
      data.corrections.push_back(msg.str());
      w = w.with_scale(corrected);
    }
    data.weights.push_back(std::move(w));
  }
  return data;
}

const CatalogData& catalog_data() {
  static const CatalogData data = build_catalog();
  return data;
}

}  // namespace

const std::vector<RadialWeight>& catalog() { return catalog_data().weights; }

const std::vector<std::string>& catalog_corrections() { return catalog_data().corrections; }

const RadialWeight& catalog_weight(std::string_view name) {
  for (const RadialWeight& w : catalog()) {
    if (w.name() == name) return w;
  }
  throw WeightError("unknown weight '" + std::string(name) + "'");
}

RadialWeight sph_transform(const RadialWeight& w_sph) {
  for (const PolyPiece& p : w_sph.pieces()) {
    if (p.min_power < 0 && p.lowest_degree() < 0) throw WeightError("sph_transform: profile is singular at 0");
  }
  if (derivative_jump(w_sph) > kContinuityTol) {
    throw WeightError("sph_transform: profile is not differentiable at a piece break");
  }
  const double inv_d = 1.0 / static_cast<double>(w_sph.dim());
  std::vector<PolyPiece> pieces;
  for (const PolyPiece& p : w_sph.pieces()) {
    PolyPiece q{p.lo, p.hi, p.min_power, std::vector<double>(p.coeffs.size(), 0.0)};
    // r * d/dr (c r^e) = e c r^e
    for (std::size_t k = 0; k < p.coeffs.size(); ++k) {
      const int e = p.min_power + static_cast<int>(k);
      q.coeffs[k] = e == 0 ? 0.0 : -(static_cast<double>(e) * p.coeffs[k]) * inv_d;
    }
    pieces.push_back(std::move(q));
  }
  return RadialWeight("sph(" + w_sph.name() + ")", w_sph.dim(), w_sph.scale(), std::move(pieces), 1, std::nullopt);
}

MpsLaplacianTransform mps_laplacian_transform(const RadialWeight& w_mps, int dim) {
  const double lambda = second_moment(w_mps, dim);
  if (!std::isfinite(lambda)) throw WeightError("mps_laplacian_transform: r^2 w is not integrable");
  if (lambda == 0.0) throw WeightError("mps_laplacian_transform: vanishing second moment");
  std::vector<PolyPiece> pieces = w_mps.pieces();
  for (PolyPiece& p : pieces) p.min_power += 2;
  RadialWeight w("mps-lap(" + w_mps.name() + ")", dim, w_mps.scale() / lambda, std::move(pieces), 1, std::nullopt);
  return {std::move(w), lambda};
}

bool same_profile(const RadialWeight& a, const RadialWeight& b) {
  if (a.dim() != b.dim() || a.scale() != b.scale() || a.pieces().size() != b.pieces().size()) return false;
  for (std::size_t k = 0; k < a.pieces().size(); ++k) {
    const PolyPiece& p = a.pieces()[k];
    const PolyPiece& q = b.pieces()[k];
    if (p.lo != q.lo || p.hi != q.hi) return false;
    // Compare exponent by exponent so differing min_power paddings still match.
    const int lo = std::min(p.min_power, q.min_power);
    const int hi = std::max(p.min_power + static_cast<int>(p.coeffs.size()),
                            q.min_power + static_cast<int>(q.coeffs.size()));
    auto coef = [](const PolyPiece& s, int e) {
      const int k = e - s.min_power;
      return k < 0 || k >= static_cast<int>(s.coeffs.size()) ? 0.0 : s.coeffs[static_cast<std::size_t>(k)];
    };
    for (int e = lo; e < hi; ++e) {
      if (coef(p, e) != coef(q, e)) return false;
    }
  }
  return true;
}

std::string to_json(const RadialWeight& w) {
  nlohmann::json j;
  j["name"] = w.name();
  j["d"] = w.dim();
  j["n"] = w.moment_order();
  j["k"] = w.smooth_order() ? nlohmann::json(*w.smooth_order()) : nlohmann::json(nullptr);
  j["scale"] = w.scale();
  j["pieces"] = nlohmann::json::array();
  for (const PolyPiece& p : w.pieces()) {
    j["pieces"].push_back({{"from", p.lo}, {"to", p.hi}, {"min_power", p.min_power}, {"coefficients", p.coeffs}});
  }
  return j.dump(2);
}

RadialWeight weight_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    std::vector<PolyPiece> pieces;
    for (const auto& p : j.at("pieces")) {
      pieces.push_back(PolyPiece{p.at("from").get<double>(), p.at("to").get<double>(), p.value("min_power", 0),
                                 p.at("coefficients").get<std::vector<double>>()});
    }
    std::optional<int> k;
    if (j.contains("k") && !j.at("k").is_null()) k = j.at("k").get<int>();
    return RadialWeight(j.at("name").get<std::string>(), j.at("d").get<int>(), j.value("scale", 1.0),
                        std::move(pieces), j.value("n", 1), k);
  } catch (const nlohmann::json::exception& e) {
    throw WeightError(std::string("weight_from_json: ") + e.what());
  }
}

}  // namespace gpm
