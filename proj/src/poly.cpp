#include "polymrf/poly.hpp"

#include "polymrf/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace polymrf {

Interval::Interval(double lo, double hi)
  : a(lo)
  , b(hi)
{
  if (!(lo < hi)) {
    raise(ErrorCode::InvalidArgument,
          "interval requires a < b, got [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

Polynomial::Polynomial()
  : coeffs_{0.0}
{
}

Polynomial::Polynomial(std::vector<double> coeffs)
  : coeffs_(std::move(coeffs))
{
  if (coeffs_.empty()) { coeffs_.push_back(0.0); }
}

Polynomial::Polynomial(std::initializer_list<double> coeffs)
  : Polynomial(std::vector<double>(coeffs))
{
}

Polynomial Polynomial::zero(int degree) { return Polynomial(std::vector<double>(degree + 1, 0.0)); }

Polynomial Polynomial::constant(double c) { return Polynomial({c}); }

int Polynomial::effective_degree() const
{
  for (int k = degree(); k >= 0; --k) {
    if (coeffs_[k] != 0.0) { return k; }
  }
  return -1;
}

bool Polynomial::is_zero() const { return effective_degree() < 0; }

Polynomial Polynomial::resized(int degree) const
{
  std::vector<double> c(degree + 1, 0.0);
  for (int k = 0; k <= std::min(degree, this->degree()); ++k) { c[k] = coeffs_[k]; }
  return Polynomial(std::move(c));
}

Polynomial operator+(const Polynomial& p, const Polynomial& q)
{
  int const d = std::max(p.degree(), q.degree());
  std::vector<double> c(d + 1);
  for (int k = 0; k <= d; ++k) { c[k] = p[k] + q[k]; }
  return Polynomial(std::move(c));
}

Polynomial operator-(const Polynomial& p, const Polynomial& q) { return p + (-1.0) * q; }

Polynomial operator*(double s, const Polynomial& p)
{
  std::vector<double> c(p.coeffs().begin(), p.coeffs().end());
  for (auto& v : c) { v *= s; }
  return Polynomial(std::move(c));
}

Polynomial operator*(const Polynomial& p, const Polynomial& q)
{
  std::vector<double> c(p.degree() + q.degree() + 1, 0.0);
  for (int i = 0; i <= p.degree(); ++i) {
    for (int j = 0; j <= q.degree(); ++j) { c[i + j] += p[i] * q[j]; }
  }
  return Polynomial(std::move(c));
}

double eval(const Polynomial& p, double x)
{
  auto const c = p.coeffs();
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) { acc = acc * x + *it; }
  return acc;
}

Polynomial derivative(const Polynomial& p)
{
  if (p.degree() == 0) { return Polynomial::zero(); }
  std::vector<double> c(p.degree());
  for (int k = 1; k <= p.degree(); ++k) { c[k - 1] = k * p[k]; }
  return Polynomial(std::move(c));
}

Polynomial compose_affine(const Polynomial& p, double alpha, double beta)
{
  int const d = p.degree();
  std::vector<double> acc(d + 1, 0.0);
  // Horner in polynomial arithmetic: acc <- acc * (alpha + beta s) + c_k
  for (int k = d; k >= 0; --k) {
    for (int j = d; j >= 1; --j) { acc[j] = acc[j] * alpha + acc[j - 1] * beta; }
    acc[0] = acc[0] * alpha + p[k];
  }
  return Polynomial(std::move(acc));
}

Polynomial to_unit_coordinates(const Polynomial& p, const Interval& iv)
{
  return compose_affine(p, iv.center(), iv.half_width());
}

Polynomial from_unit_coordinates(const Polynomial& q, const Interval& iv)
{
  double const h = iv.half_width();
  return compose_affine(q, -iv.center() / h, 1.0 / h);
}

namespace {

constexpr int kMaxBisections = 200;

// Rounding bound of Horner evaluation; values below it are treated as zero.
double eval_noise(std::span<const double> c, double x)
{
  double acc = 0.0;
  double ax = std::abs(x);
  for (auto it = c.rbegin(); it != c.rend(); ++it) { acc = acc * ax + std::abs(*it); }
  return 64.0 * std::numeric_limits<double>::epsilon() * acc;
}

double horner(std::span<const double> c, double x)
{
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) { acc = acc * x + *it; }
  return acc;
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

double bisect(std::span<const double> c, double lo, double hi, double flo, double tol)
{
  for (int it = 0; it < kMaxBisections && hi - lo > tol; ++it) {
    double const mid = 0.5 * (lo + hi);
    double const fm = horner(c, mid);
    if (fm == 0.0) { return mid; }
    if (sign(fm) == sign(flo)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Roots of the polynomial with nonzero leading coefficient c.back(). Between
// consecutive critical points the polynomial is monotone, so each such
// segment holds at most one root, found by bisection.
std::vector<double> isolate(std::span<const double> c, double lo, double hi, double tol)
{
  int const d = static_cast<int>(c.size()) - 1;
  std::vector<double> roots;
  if (d <= 0) { return roots; }
  if (d == 1) {
    double const r = -c[0] / c[1];
    if (r >= lo && r <= hi) { roots.push_back(r); }
    return roots;
  }
  std::vector<double> dc(d);
  for (int k = 1; k <= d; ++k) { dc[k - 1] = k * c[k]; }
  std::vector<double> const crit = isolate(dc, lo, hi, tol);

  std::vector<double> pts;
  pts.reserve(crit.size() + 2);
  pts.push_back(lo);
  for (double x : crit) {
    if (x > lo && x < hi) { pts.push_back(x); }
  }
  pts.push_back(hi);

  std::vector<double> vals(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    vals[i] = horner(c, pts[i]);
    if (std::abs(vals[i]) <= eval_noise(c, pts[i])) {
      vals[i] = 0.0;
      roots.push_back(pts[i]);
    }
  }
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    if (sign(vals[i]) * sign(vals[i + 1]) < 0) {
      roots.push_back(bisect(c, pts[i], pts[i + 1], vals[i], tol));
    }
  }
  std::sort(roots.begin(), roots.end());
  std::vector<double> out;
  for (double r : roots) {
    if (out.empty() || r - out.back() > 10.0 * tol) { out.push_back(r); }
  }
  return out;
}

} // namespace

std::vector<double> roots_in_interval(const Polynomial& p, const Interval& iv, double tol)
{
  int const d = p.effective_degree();
  if (d < 0) { raise(ErrorCode::IdenticallyZero, "roots of the zero polynomial"); }
  return isolate(p.coeffs().first(d + 1), iv.a, iv.b, tol);
}

Minimum minimize_on_interval(const Polynomial& p, const Interval& iv, double tol)
{
  std::vector<double> cand{iv.a};
  Polynomial const dp = derivative(p);
  if (!dp.is_zero()) {
    for (double r : roots_in_interval(dp, iv, tol)) { cand.push_back(r); }
  }
  cand.push_back(iv.b);
  std::sort(cand.begin(), cand.end());

  Minimum best{cand.front(), eval(p, cand.front())};
  for (size_t i = 1; i < cand.size(); ++i) {
    double const v = eval(p, cand[i]);
    double const tie = 1e-12 * std::max(1.0, std::abs(best.value));
    if (v < best.value - tie) { best = {cand[i], v}; }
  }
  return best;
}

PiecewisePolynomial::PiecewisePolynomial(std::vector<double> knots, std::vector<Polynomial> pieces)
  : knots_(std::move(knots))
  , pieces_(std::move(pieces))
{
  if (knots_.size() < 2 || pieces_.size() + 1 != knots_.size()) {
    raise(ErrorCode::ShapeMismatch, "piecewise polynomial needs pieces = knots - 1 >= 1");
  }
  for (size_t k = 0; k + 1 < knots_.size(); ++k) {
    if (!(knots_[k] < knots_[k + 1])) {
      raise(ErrorCode::InvalidArgument, "knots must be strictly increasing");
    }
  }
}

PiecewisePolynomial PiecewisePolynomial::single(const Polynomial& p, const Interval& iv)
{
  return PiecewisePolynomial({iv.a, iv.b}, {p});
}

PiecewisePolynomial PiecewisePolynomial::resampled(std::span<const double> knots) const
{
  double const scale = std::max(1.0, std::abs(knots_.front()) + std::abs(knots_.back()));
  double const eps = 1e-12 * scale;
  std::vector<Polynomial> pieces;
  for (size_t j = 0; j + 1 < knots.size(); ++j) {
    double const mid = 0.5 * (knots[j] + knots[j + 1]);
    auto const it = std::upper_bound(knots_.begin(), knots_.end(), mid);
    int const k = std::clamp(static_cast<int>(it - knots_.begin()) - 1, 0, num_pieces() - 1);
    if (knots[j] < knots_[k] - eps || knots[j + 1] > knots_[k + 1] + eps) {
      raise(ErrorCode::InvalidArgument, "resampling knots must refine the existing knots");
    }
    pieces.push_back(pieces_[k]);
  }
  return PiecewisePolynomial(std::vector<double>(knots.begin(), knots.end()), std::move(pieces));
}

int PiecewisePolynomial::max_degree() const
{
  int d = 0;
  for (auto const& p : pieces_) { d = std::max(d, p.effective_degree()); }
  return d;
}

double PiecewisePolynomial::operator()(double x) const
{
  double v = std::numeric_limits<double>::infinity();
  for (int k = 0; k < num_pieces(); ++k) {
    if (knots_[k] <= x && x <= knots_[k + 1]) { v = std::min(v, eval(pieces_[k], x)); }
  }
  return v;
}

PiecewiseMinimum piecewise_min(const PiecewisePolynomial& f, double tol)
{
  PiecewiseMinimum best{0.0, std::numeric_limits<double>::infinity(), -1};
  for (int k = 0; k < f.num_pieces(); ++k) {
    Minimum const m = minimize_on_interval(f.piece(k), f.piece_interval(k), tol);
    double const tie = 1e-12 * std::max(1.0, std::abs(best.value));
    if (best.piece < 0 || m.value < best.value - tie ||
        (m.value <= best.value + tie && m.argmin < best.argmin)) {
      best = {m.argmin, m.value, k};
    }
  }
  return best;
}

Polynomial fit_least_squares(std::span<const Sample> samples, int deg)
{
  if (deg < 0) { raise(ErrorCode::InvalidArgument, "negative degree"); }
  int const n = static_cast<int>(samples.size());
  if (n < deg + 1) {
    raise(ErrorCode::RankDeficient,
          std::to_string(n) + " samples cannot determine degree " + std::to_string(deg));
  }
  double lo = samples[0].x;
  double hi = samples[0].x;
  for (auto const& s : samples) {
    lo = std::min(lo, s.x);
    hi = std::max(hi, s.x);
  }
  // Fit in coordinates scaled to [-1, 1] and map back.
  Interval const iv = hi > lo ? Interval(lo, hi) : Interval(lo - 1.0, lo + 1.0);
  Eigen::MatrixXd V(n, deg + 1);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) {
    double const s = (samples[i].x - iv.center()) / iv.half_width();
    double pw = 1.0;
    for (int k = 0; k <= deg; ++k) {
      V(i, k) = pw;
      pw *= s;
    }
    rhs(i) = samples[i].value;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
  auto const& sv = svd.singularValues();
  double const smin = sv(sv.size() - 1);
  if (smin <= 0.0 || sv(0) / smin > 1e12) {
    raise(ErrorCode::RankDeficient, "Vandermonde system is numerically singular");
  }
  Eigen::VectorXd const c = svd.solve(rhs);
  return from_unit_coordinates(Polynomial(std::vector<double>(c.data(), c.data() + c.size())), iv);
}

PiecewisePolynomial fit_piecewise_under_approx(std::span<const Sample> costs,
                                               std::span<const double> knots, int deg)
{
  if (knots.size() < 2) { raise(ErrorCode::InvalidArgument, "need at least two knots"); }
  int const K = static_cast<int>(knots.size()) - 1;
  double const eps = 1e-12 * std::max(1.0, std::abs(knots.front()) + std::abs(knots.back()));

  std::vector<Interval> ivs;
  std::vector<std::vector<Sample>> local(K);
  for (int k = 0; k < K; ++k) {
    ivs.emplace_back(knots[k], knots[k + 1]);
    for (auto const& s : costs) {
      if (s.x >= knots[k] - eps && s.x <= knots[k + 1] + eps) { local[k].push_back(s); }
    }
    if (static_cast<int>(local[k].size()) < deg + 1) {
      raise(ErrorCode::InsufficientSamples, "piece " + std::to_string(k) + " has " +
                                                std::to_string(local[k].size()) + " samples");
    }
  }

  // Per-piece fits in unit coordinates, shifted below every sample.
  std::vector<Polynomial> unit(K);
  for (int k = 0; k < K; ++k) {
    std::vector<Sample> scaled;
    for (auto const& s : local[k]) {
      scaled.push_back({(s.x - ivs[k].center()) / ivs[k].half_width(), s.value});
    }
    Polynomial q = fit_least_squares(scaled, deg).resized(deg);
    double excess = 0.0;
    for (auto const& s : scaled) { excess = std::max(excess, eval(q, s.x) - s.value); }
    q[0] -= excess;
    unit[k] = q;
  }

  // Continuity: lower the higher side at each interior knot with a linear ramp,
  // which is nonnegative on the piece and keeps the fit below the data.
  if (deg >= 1) {
    std::vector<double> drop_left(K, 0.0), drop_right(K, 0.0);
    for (int k = 1; k < K; ++k) {
      double const left = eval(unit[k - 1], 1.0);
      double const right = eval(unit[k], -1.0);
      double const v = std::min(left, right);
      drop_right[k - 1] = left - v;
      drop_left[k] = right - v;
    }
    for (int k = 0; k < K; ++k) {
      unit[k][0] -= 0.5 * (drop_left[k] + drop_right[k]);
      unit[k][1] -= 0.5 * (drop_right[k] - drop_left[k]);
    }
  }

  std::vector<Polynomial> pieces;
  for (int k = 0; k < K; ++k) {
    Polynomial p = from_unit_coordinates(unit[k], ivs[k]);
    double excess = 0.0;
    for (auto const& s : local[k]) { excess = std::max(excess, eval(p, s.x) - s.value); }
    p[0] -= excess;
    pieces.push_back(std::move(p));
  }
  return PiecewisePolynomial(std::vector<double>(knots.begin(), knots.end()), std::move(pieces));
}

} // namespace polymrf
