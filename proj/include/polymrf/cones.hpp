#pragma once

#include "polymrf/poly.hpp"

#include <span>
#include <vector>

namespace polymrf {

/// Dense symmetric matrix stored as its packed lower triangle.
class SymmetricMatrix {
public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(int dim);
  SymmetricMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static SymmetricMatrix outer(std::span<const double> v);

  int dim() const { return dim_; }
  double operator()(int i, int j) const { return data_[index(i, j)]; }
  double& operator()(int i, int j) { return data_[index(i, j)]; }
  std::span<const double> packed() const { return data_; }
  double trace() const;
  double frobenius_distance(const SymmetricMatrix& other) const;

  static int packed_size(int dim) { return dim * (dim + 1) / 2; }
  static int index(int i, int j) { return i >= j ? i * (i + 1) / 2 + j : j * (j + 1) / 2 + i; }

private:
  int dim_ = 0;
  std::vector<double> data_;
};

struct SymmetricEigen {
  std::vector<double> values;  // ascending
  std::vector<double> vectors; // column-major, column k pairs with values[k]
};

/// Cyclic Jacobi eigendecomposition with a 50-sweep budget.
SymmetricEigen symmetric_eigen(const SymmetricMatrix& m);
double min_eigenvalue(const SymmetricMatrix& m);

/// Frobenius-nearest positive semidefinite matrix.
SymmetricMatrix project_psd(const SymmetricMatrix& m);

/// In-place PSD projection of a matrix given in scaled packed form, where
/// off-diagonal entries carry a factor sqrt(2) so the Euclidean inner product
/// of the packed vectors equals the Frobenius product.
void project_psd_svec(std::span<double> svec, int dim);

/// Hankel matrix (n+1)x(n+1) with entry (r, c) = y[i + r + c].
SymmetricMatrix hankel(std::span<const double> y, int i, int n);

/// Coefficients sum_{i+j=k} Q_ij of z(x)^T Q z(x), z(x) = (1, x, ..., x^n).
Polynomial gram_to_coeffs(const SymmetricMatrix& q);

struct LinearTerm {
  int var;
  double coeff;
};

/// Linear map from a variable vector to a symmetric matrix; one term list per
/// packed lower-triangle entry.
struct PsdMap {
  int dim = 0;
  std::vector<std::vector<LinearTerm>> entries;

  SymmetricMatrix apply(std::span<const double> v) const;
};

struct AffineEquation {
  std::vector<LinearTerm> terms;
  double rhs = 0.0;

  double residual(std::span<const double> v) const;
};

/// A vector lies in the described set iff every PSD map image is PSD and
/// every affine equation holds.
struct ConeDescription {
  int num_vars = 0;
  std::vector<PsdMap> psd_maps;
  std::vector<AffineEquation> affine_eqs;

  bool contains(std::span<const double> v, double tol) const;
};

/// Moments of measures supported on iv, monomial basis of the given degree.
ConeDescription moment_cone_description(int deg, const Interval& iv);

/// Moments y_0..y_deg of a nonnegative measure on one piece, expressed in the
/// piece's unit coordinates (so the support is [-1, 1]).
struct MomentBlock {
  std::vector<double> moments;
  Interval piece;
};

inline constexpr double kMembershipTolerance = 1e-8;

bool moment_cone_check(const MomentBlock& y, double tol = kMembershipTolerance);
bool moment_cone_check(std::span<const double> y, const Interval& iv,
                       double tol = kMembershipTolerance);

/// Moment vector (1, x, ..., x^deg) of the Dirac measure at x.
std::vector<double> dirac_moments(double x, int deg);

/// Layout of the Gram variables in an SOS certificate description.
struct SosLayout {
  int deg = 0;
  int coeff_vars = 0;           // p_0..p_deg occupy [0, deg]
  std::vector<int> gram_dims;   // one entry per SOS multiplier
  std::vector<int> gram_offset; // first packed variable of each Gram matrix
};

/// Certificate for nonnegativity of a degree-deg polynomial on iv. Variables
/// are the coefficients of p followed by the packed Gram matrices of the SOS
/// multipliers; the affine equations match coefficients.
ConeDescription sos_certificate_description(int deg, const Interval& iv, SosLayout* layout = nullptr);

bool is_nonneg_on_interval(const Polynomial& p, const Interval& iv, double tol);

} // namespace polymrf
