#include "polymrf/cones.hpp"

#include "polymrf/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

namespace polymrf {

namespace {

constexpr int kMaxSweeps = 50;
constexpr int kMaxDim = 32;
constexpr double kSqrt2 = 1.4142135623730951;

// Cyclic Jacobi on a dense row-major n x n matrix; eigenvectors accumulate in
// the columns of v. Returns false if the sweep budget is exhausted.
bool jacobi(double* a, double* v, int n)
{
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) { v[i * n + j] = i == j ? 1.0 : 0.0; }
  }
  double total = 0.0;
  for (int i = 0; i < n * n; ++i) { total += a[i] * a[i]; }
  if (!std::isfinite(total)) { return false; }
  if (total == 0.0) { return true; }

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) { off += a[p * n + q] * a[p * n + q]; }
    }
    if (off <= 1e-32 * total) { return true; }
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double const apq = a[p * n + q];
        if (apq == 0.0) { continue; }
        double const theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        double const t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double const c = 1.0 / std::sqrt(t * t + 1.0);
        double const s = t * c;
        for (int k = 0; k < n; ++k) {
          double const akp = a[k * n + p];
          double const akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double const apk = a[p * n + k];
          double const aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          double const vkp = v[k * n + p];
          double const vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  return false;
}

// True if the matrix admits a Cholesky factorization with positive pivots.
bool positive_definite(const double* a, int n)
{
  std::array<double, kMaxDim * kMaxDim> l{};
  for (int j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (int k = 0; k < j; ++k) { d -= l[j * n + k] * l[j * n + k]; }
    if (!(d > 1e-14 * std::abs(a[j * n + j]) && d > 0.0)) { return false; }
    double const ljj = std::sqrt(d);
    l[j * n + j] = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (int k = 0; k < j; ++k) { s -= l[i * n + k] * l[j * n + k]; }
      l[i * n + j] = s / ljj;
    }
  }
  return true;
}

void check_dim(int n)
{
  if (n < 0 || n > kMaxDim) {
    raise(ErrorCode::InvalidArgument, "matrix dimension " + std::to_string(n) + " unsupported");
  }
}

} // namespace

SymmetricMatrix::SymmetricMatrix(int dim)
  : dim_(dim)
  , data_(packed_size(dim), 0.0)
{
}

SymmetricMatrix::SymmetricMatrix(std::initializer_list<std::initializer_list<double>> rows)
  : SymmetricMatrix(static_cast<int>(rows.size()))
{
  int i = 0;
  for (auto const& row : rows) {
    if (static_cast<int>(row.size()) != dim_) { raise(ErrorCode::ShapeMismatch, "ragged matrix"); }
    int j = 0;
    for (double v : row) {
      if (j <= i) { data_[index(i, j)] = v; }
      ++j;
    }
    ++i;
  }
  i = 0;
  for (auto const& row : rows) {
    int j = 0;
    for (double v : row) {
      if (j > i && v != (*this)(i, j)) { raise(ErrorCode::InvalidArgument, "matrix is not symmetric"); }
      ++j;
    }
    ++i;
  }
}

SymmetricMatrix SymmetricMatrix::outer(std::span<const double> v)
{
  SymmetricMatrix m(static_cast<int>(v.size()));
  for (int i = 0; i < m.dim(); ++i) {
    for (int j = 0; j <= i; ++j) { m(i, j) = v[i] * v[j]; }
  }
  return m;
}

double SymmetricMatrix::trace() const
{
  double t = 0.0;
  for (int i = 0; i < dim_; ++i) { t += (*this)(i, i); }
  return t;
}

double SymmetricMatrix::frobenius_distance(const SymmetricMatrix& other) const
{
  if (other.dim_ != dim_) { raise(ErrorCode::ShapeMismatch, "matrix dimensions differ"); }
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j <= i; ++j) {
      double const d = (*this)(i, j) - other(i, j);
      s += (i == j ? 1.0 : 2.0) * d * d;
    }
  }
  return std::sqrt(s);
}

SymmetricEigen symmetric_eigen(const SymmetricMatrix& m)
{
  int const n = m.dim();
  check_dim(n);
  std::vector<double> a(n * n), v(n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) { a[i * n + j] = m(i, j); }
  }
  if (!jacobi(a.data(), v.data(), n)) {
    raise(ErrorCode::EigenFailure, "Jacobi iteration did not converge in " +
                                       std::to_string(kMaxSweeps) + " sweeps");
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) { return a[x * n + x] < a[y * n + y]; });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n * n);
  for (int k = 0; k < n; ++k) {
    out.values[k] = a[order[k] * n + order[k]];
    for (int i = 0; i < n; ++i) { out.vectors[k * n + i] = v[i * n + order[k]]; }
  }
  return out;
}

double min_eigenvalue(const SymmetricMatrix& m)
{
  if (m.dim() == 0) { return 0.0; }
  return symmetric_eigen(m).values.front();
}

SymmetricMatrix project_psd(const SymmetricMatrix& m)
{
  int const n = m.dim();
  std::vector<double> svec(m.packed().begin(), m.packed().end());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) { svec[SymmetricMatrix::index(i, j)] *= kSqrt2; }
  }
  project_psd_svec(svec, n);
  SymmetricMatrix out(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      out(i, j) = svec[SymmetricMatrix::index(i, j)] / (i == j ? 1.0 : kSqrt2);
    }
  }
  return out;
}

void project_psd_svec(std::span<double> s, int n)
{
  if (n == 0) { return; }
  if (n == 1) {
    s[0] = std::max(s[0], 0.0);
    return;
  }
  if (n == 2) {
    double const a = s[0];
    double const b = s[1] / kSqrt2;
    double const c = s[2];
    double const mean = 0.5 * (a + c);
    double const rad = std::hypot(0.5 * (a - c), b);
    double const lo = mean - rad;
    double const hi = mean + rad;
    if (!std::isfinite(rad)) { raise(ErrorCode::EigenFailure, "non-finite matrix entry"); }
    if (lo >= 0.0) { return; }
    if (hi <= 0.0) {
      s[0] = s[1] = s[2] = 0.0;
      return;
    }
    // A - lo I = (hi - lo) v v^T, so hi v v^T = hi / (hi - lo) (A - lo I).
    double const f = hi / (hi - lo);
    s[0] = f * (a - lo);
    s[1] = f * b * kSqrt2;
    s[2] = f * (c - lo);
    return;
  }
  check_dim(n);
  std::array<double, kMaxDim * kMaxDim> a;
  std::array<double, kMaxDim * kMaxDim> v;
  for (int i = 0; i < n; ++i) {
    a[i * n + i] = s[SymmetricMatrix::index(i, i)];
    for (int j = 0; j < i; ++j) {
      double const x = s[SymmetricMatrix::index(i, j)] / kSqrt2;
      a[i * n + j] = x;
      a[j * n + i] = x;
    }
  }
  if (positive_definite(a.data(), n)) { return; }
  if (!jacobi(a.data(), v.data(), n)) {
    raise(ErrorCode::EigenFailure, "Jacobi iteration did not converge in " +
                                       std::to_string(kMaxSweeps) + " sweeps");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) {
        double const lam = a[k * n + k];
        if (lam > 0.0) { acc += lam * v[i * n + k] * v[j * n + k]; }
      }
      s[SymmetricMatrix::index(i, j)] = i == j ? acc : acc * kSqrt2;
    }
  }
}

SymmetricMatrix hankel(std::span<const double> y, int i, int n)
{
  if (i < 0 || n < 0 || static_cast<int>(y.size()) < i + 2 * n + 1) {
    raise(ErrorCode::LengthMismatch, "Hankel matrix M_{" + std::to_string(i) + "," +
                                         std::to_string(n) + "} needs " +
                                         std::to_string(i + 2 * n + 1) + " moments, got " +
                                         std::to_string(y.size()));
  }
  SymmetricMatrix m(n + 1);
  for (int r = 0; r <= n; ++r) {
    for (int c = 0; c <= r; ++c) { m(r, c) = y[i + r + c]; }
  }
  return m;
}

Polynomial gram_to_coeffs(const SymmetricMatrix& q)
{
  int const n = q.dim();
  if (n == 0) { return Polynomial::zero(); }
  std::vector<double> c(2 * n - 1, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) { c[i + j] += q(i, j); }
  }
  return Polynomial(std::move(c));
}

SymmetricMatrix PsdMap::apply(std::span<const double> v) const
{
  SymmetricMatrix m(dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j <= i; ++j) {
      double acc = 0.0;
      for (auto const& t : entries[SymmetricMatrix::index(i, j)]) { acc += t.coeff * v[t.var]; }
      m(i, j) = acc;
    }
  }
  return m;
}

double AffineEquation::residual(std::span<const double> v) const
{
  double acc = -rhs;
  for (auto const& t : terms) { acc += t.coeff * v[t.var]; }
  return acc;
}

bool ConeDescription::contains(std::span<const double> v, double tol) const
{
  if (static_cast<int>(v.size()) != num_vars) {
    raise(ErrorCode::LengthMismatch, "vector length does not match the cone description");
  }
  for (auto const& map : psd_maps) {
    SymmetricMatrix const m = map.apply(v);
    if (min_eigenvalue(m) < -tol * std::max(1.0, std::abs(m.trace()))) { return false; }
  }
  for (auto const& eq : affine_eqs) {
    if (std::abs(eq.residual(v)) > tol) { return false; }
  }
  return true;
}

ConeDescription moment_cone_description(int deg, const Interval& iv)
{
  if (deg < 1) { raise(ErrorCode::DegreeTooSmall, "moment cone needs degree >= 1"); }
  double const a = iv.a;
  double const b = iv.b;
  ConeDescription d;
  d.num_vars = deg + 1;

  // Entry (r, c) of sum_t w_t * M_{shift_t, n}.
  auto hankel_map = [](int n, std::initializer_list<std::pair<int, double>> parts) {
    PsdMap m;
    m.dim = n + 1;
    m.entries.resize(SymmetricMatrix::packed_size(n + 1));
    for (int r = 0; r <= n; ++r) {
      for (int c = 0; c <= r; ++c) {
        auto& terms = m.entries[SymmetricMatrix::index(r, c)];
        for (auto const& [shift, w] : parts) {
          if (w != 0.0) { terms.push_back({shift + r + c, w}); }
        }
      }
    }
    return m;
  };

  if (deg % 2 == 1) {
    int const n = (deg - 1) / 2;
    d.psd_maps.push_back(hankel_map(n, {{0, b}, {1, -1.0}}));
    d.psd_maps.push_back(hankel_map(n, {{1, 1.0}, {0, -a}}));
  } else {
    int const n = deg / 2;
    d.psd_maps.push_back(hankel_map(n, {{0, 1.0}}));
    d.psd_maps.push_back(hankel_map(n - 1, {{1, a + b}, {0, -a * b}, {2, -1.0}}));
  }
  return d;
}

bool moment_cone_check(std::span<const double> y, const Interval& iv, double tol)
{
  int const deg = static_cast<int>(y.size()) - 1;
  if (deg < 1) { return y.empty() || y[0] >= -tol; }
  return moment_cone_description(deg, iv).contains(y, tol);
}

bool moment_cone_check(const MomentBlock& y, double tol)
{
  return moment_cone_check(y.moments, Interval(-1.0, 1.0), tol);
}

std::vector<double> dirac_moments(double x, int deg)
{
  std::vector<double> m(deg + 1);
  double pw = 1.0;
  for (int k = 0; k <= deg; ++k) {
    m[k] = pw;
    pw *= x;
  }
  return m;
}

ConeDescription sos_certificate_description(int deg, const Interval& iv, SosLayout* layout)
{
  if (deg < 0) { raise(ErrorCode::DegreeTooSmall, "negative degree"); }
  double const a = iv.a;
  double const b = iv.b;
  ConeDescription d;
  SosLayout lay;
  lay.deg = deg;
  lay.coeff_vars = deg + 1;

  // Each SOS multiplier sigma enters as weight(x) * sigma(x).
  std::vector<std::pair<int, std::vector<double>>> multipliers;
  if (deg % 2 == 0) {
    int const n = deg / 2;
    multipliers.push_back({n + 1, {1.0}});
    if (n >= 1) { multipliers.push_back({n, {-a * b, a + b, -1.0}}); }
  } else {
    int const n = (deg - 1) / 2;
    multipliers.push_back({n + 1, {-a, 1.0}});
    multipliers.push_back({n + 1, {b, -1.0}});
  }

  int next = deg + 1;
  for (auto const& [dim, weight] : multipliers) {
    lay.gram_dims.push_back(dim);
    lay.gram_offset.push_back(next);
    next += SymmetricMatrix::packed_size(dim);
  }
  d.num_vars = next;

  for (size_t g = 0; g < multipliers.size(); ++g) {
    int const dim = lay.gram_dims[g];
    PsdMap m;
    m.dim = dim;
    m.entries.resize(SymmetricMatrix::packed_size(dim));
    for (int idx = 0; idx < SymmetricMatrix::packed_size(dim); ++idx) {
      m.entries[idx].push_back({lay.gram_offset[g] + idx, 1.0});
    }
    d.psd_maps.push_back(std::move(m));
  }

  for (int j = 0; j <= deg; ++j) {
    AffineEquation eq;
    eq.terms.push_back({j, 1.0});
    for (size_t g = 0; g < multipliers.size(); ++g) {
      int const dim = lay.gram_dims[g];
      auto const& weight = multipliers[g].second;
      for (int r = 0; r < static_cast<int>(weight.size()); ++r) {
        int const m = j - r; // coefficient of x^m in z^T Q z
        if (m < 0 || weight[r] == 0.0) { continue; }
        for (int i = 0; i < dim; ++i) {
          int const l = m - i;
          if (l < 0 || l > i) { continue; }
          double const mult = i == l ? 1.0 : 2.0;
          eq.terms.push_back({lay.gram_offset[g] + SymmetricMatrix::index(i, l), -weight[r] * mult});
        }
      }
    }
    d.affine_eqs.push_back(std::move(eq));
  }
  if (layout) { *layout = lay; }
  return d;
}

bool is_nonneg_on_interval(const Polynomial& p, const Interval& iv, double tol)
{
  return minimize_on_interval(p, iv).value >= -tol;
}

} // namespace polymrf
