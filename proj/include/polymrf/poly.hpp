#pragma once

#include <span>
#include <utility>
#include <vector>

namespace polymrf {

struct Interval {
  double a = -1.0;
  double b = 1.0;

  Interval() = default;
  Interval(double lo, double hi);

  double width() const { return b - a; }
  double center() const { return 0.5 * (a + b); }
  double half_width() const { return 0.5 * (b - a); }
  bool contains(double x) const { return a <= x && x <= b; }
};

/// Univariate polynomial in the monomial basis; coeffs[k] multiplies x^k.
class Polynomial {
public:
  Polynomial();
  explicit Polynomial(std::vector<double> coeffs);
  Polynomial(std::initializer_list<double> coeffs);

  static Polynomial zero(int degree = 0);
  static Polynomial constant(double c);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  /// Degree after dropping trailing zero coefficients; -1 for the zero polynomial.
  int effective_degree() const;
  bool is_zero() const;

  double operator[](int k) const { return k <= degree() ? coeffs_[k] : 0.0; }
  double& operator[](int k) { return coeffs_[k]; }
  std::span<const double> coeffs() const { return coeffs_; }
  std::vector<double>& data() { return coeffs_; }

  /// Pads with zeros (or truncates) to the requested nominal degree.
  Polynomial resized(int degree) const;

  friend Polynomial operator+(const Polynomial& p, const Polynomial& q);
  friend Polynomial operator-(const Polynomial& p, const Polynomial& q);
  friend Polynomial operator*(double s, const Polynomial& p);
  friend Polynomial operator*(const Polynomial& p, const Polynomial& q);
  friend bool operator==(const Polynomial&, const Polynomial&) = default;

private:
  std::vector<double> coeffs_;
};

double eval(const Polynomial& p, double x);
Polynomial derivative(const Polynomial& p);

/// p(alpha + beta * s) as a polynomial in s, same nominal degree.
Polynomial compose_affine(const Polynomial& p, double alpha, double beta);

/// Expresses p (in x) in the coordinate s of iv, x = center + half_width * s.
Polynomial to_unit_coordinates(const Polynomial& p, const Interval& iv);
/// Inverse of to_unit_coordinates.
Polynomial from_unit_coordinates(const Polynomial& q, const Interval& iv);

inline constexpr double kRootTolerance = 1e-10;

/// Real roots of p in [iv.a, iv.b], ascending, multiplicities collapsed.
std::vector<double> roots_in_interval(const Polynomial& p, const Interval& iv,
                                      double tol = kRootTolerance);

struct Minimum {
  double argmin;
  double value;
};

/// Global minimum of p over iv; ties go to the smaller x.
Minimum minimize_on_interval(const Polynomial& p, const Interval& iv,
                             double tol = kRootTolerance);

class PiecewisePolynomial {
public:
  PiecewisePolynomial() = default;
  PiecewisePolynomial(std::vector<double> knots, std::vector<Polynomial> pieces);

  static PiecewisePolynomial single(const Polynomial& p, const Interval& iv);
  /// The same function cut at the given knots (which must span the domain).
  PiecewisePolynomial resampled(std::span<const double> knots) const;

  int num_pieces() const { return static_cast<int>(pieces_.size()); }
  int max_degree() const;
  std::span<const double> knots() const { return knots_; }
  const Polynomial& piece(int k) const { return pieces_[k]; }
  std::span<const Polynomial> pieces() const { return pieces_; }
  Interval piece_interval(int k) const { return {knots_[k], knots_[k + 1]}; }
  Interval domain() const { return {knots_.front(), knots_.back()}; }

  /// Lower-semicontinuous evaluation: min over all pieces containing x.
  double operator()(double x) const;

private:
  std::vector<double> knots_;
  std::vector<Polynomial> pieces_;
};

struct PiecewiseMinimum {
  double argmin;
  double value;
  int piece;
};

PiecewiseMinimum piecewise_min(const PiecewisePolynomial& f, double tol = kRootTolerance);

struct Sample {
  double x;
  double value;
};

/// Least-squares fit of the given degree; throws RankDeficient when the
/// Vandermonde system has a condition estimate above 1e12.
Polynomial fit_least_squares(std::span<const Sample> samples, int deg);

/// Continuous piecewise fit that never exceeds any sample.
PiecewisePolynomial fit_piecewise_under_approx(std::span<const Sample> costs,
                                               std::span<const double> knots, int deg);

} // namespace polymrf
