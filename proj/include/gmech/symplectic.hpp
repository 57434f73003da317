// Linear symplectic algebra on R^d: skew nondegenerate forms, symplectic
// orthogonals, subspace classification, Darboux bases, annihilators and
// linear symplectic reduction.
#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace gmech::symplin {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Rank and containment decisions measure singular values relative to the
// largest one; this is the default cutoff.
inline constexpr double kRankTol = 1e-10;

struct NotSymplecticError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The 2n x 2n block matrix [[0, I], [-I, 0]].
Matrix standardForm(int n);

// True iff Omega is square, skew within tol (max |Omega + Omega^T| <= tol)
// and its smallest singular value exceeds tol. Throws on non-square input.
bool isSymplecticForm(const Matrix& omega, double tol = kRankTol);

// Validated skew nondegenerate form. Skewness must hold exactly as stored.
class SymplecticForm {
public:
    explicit SymplecticForm(Matrix omega, double tol = kRankTol);

    int dim() const { return static_cast<int>(omega_.rows()); }
    const Matrix& matrix() const { return omega_; }

    // omega(v, w) = v^T Omega w
    double pair(const Vector& v, const Vector& w) const { return v.dot(omega_ * w); }

private:
    Matrix omega_;
};

// A subspace given by a basis matrix (columns). Construction verifies the
// columns are linearly independent at the rank tolerance.
class Subspace {
public:
    explicit Subspace(Matrix basis, double tol = kRankTol);
    static Subspace zero(int ambientDim);
    static Subspace full(int ambientDim);
    static Subspace spanOf(std::initializer_list<Vector> vectors);

    int ambientDim() const { return static_cast<int>(basis_.rows()); }
    int dim() const { return static_cast<int>(basis_.cols()); }
    const Matrix& basis() const { return basis_; }

private:
    Matrix basis_;
};

// Right null space of M (orthonormal columns); identity when M has no rows.
Matrix kernelOf(const Matrix& m, double tol = kRankTol);

// inner subset of outer, at rank tolerance
bool contains(const Subspace& outer, const Subspace& inner, double tol = kRankTol);
bool sameSubspace(const Subspace& a, const Subspace& b, double tol = kRankTol);
int intersectionDim(const Subspace& a, const Subspace& b, double tol = kRankTol);

// { v : omega(v, w) = 0 for all w in W }, the kernel of W^T Omega.
Subspace symplecticOrthogonal(const SymplecticForm& form, const Subspace& w);

// { alpha : alpha(w) = 0 for all w in W }, in the dual coordinate basis.
Subspace annihilator(const Subspace& w);

enum class SubspaceClass { Symplectic, Isotropic, Coisotropic, Lagrangian, Generic };
const char* className(SubspaceClass c);

SubspaceClass classifySubspace(const SymplecticForm& form, const Subspace& w,
                               double tol = kRankTol);

// Columns B with B^T Omega B = J0, computed by symplectic Gram-Schmidt with
// the pairing pivot chosen to maximize |omega(v_i, v_j)|. Throws
// NotSymplecticError when every remaining pairing degenerates.
Matrix darbouxBasis(const SymplecticForm& form, double tol = kRankTol);

// W / (W cap W^perp) with the induced form on chosen representatives.
struct Reduction {
    int quotientDim;
    Matrix representatives;  // columns, inside W, one per quotient dimension
    Matrix inducedForm;      // quotientDim x quotientDim, skew nondegenerate
};

Reduction reduce(const SymplecticForm& form, const Subspace& w, double tol = kRankTol);

} // namespace gmech::symplin
