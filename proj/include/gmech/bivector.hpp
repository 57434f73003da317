// Bivector fields pi^{ij} on a coordinate chart and the operations the
// Poisson calculus needs: bracket evaluation, Hamiltonian vector fields,
// the jacobiator, the Schouten self-bracket, pointwise rank, and the
// Lie-Poisson construction from structure constants.
//
// Orientation used throughout: the dynamics is xdot_i = {x_i, H}, so the
// Hamiltonian vector field is X_H^i = sum_j pi^{ij} dH/dx_j (the bivector
// matrix applied to the gradient).
#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>
#include <optional>
#include <set>

#include "gmech/expression.hpp"
#include "gmech/polynomial.hpp"

namespace gmech::poisson {

using expr::Expression;
using expr::Point;
using expr::Polynomial;

struct NonPolynomialError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct JacobiViolationError : std::runtime_error {
    double residual;
    int i, j, k, l;
    JacobiViolationError(double r, int i_, int j_, int k_, int l_)
        : std::runtime_error("structure constants violate the Jacobi identity; worst quadruple (" +
                             std::to_string(i_) + "," + std::to_string(j_) + "," +
                             std::to_string(k_) + "," + std::to_string(l_) + ") residual " +
                             std::to_string(r)),
          residual(r), i(i_), j(j_), k(k_), l(l_) {}
};

// Antisymmetric coefficient array: only i<j entries are stored, pi^{ji} is
// read as -pi^{ij} and the diagonal vanishes, so antisymmetry is structural.
class BivectorField {
public:
    using EntryMap = std::map<std::pair<int, int>, Expression>;

    BivectorField(std::vector<std::string> chart, EntryMap entries);

    int dim() const { return static_cast<int>(chart_.size()); }
    const std::vector<std::string>& chart() const { return chart_; }
    const EntryMap& entries() const { return entries_; }

    std::set<std::string> freeParameters() const;

    // Skew matrix pi^{ij}(x); the mirror entries are exact negations.
    Eigen::MatrixXd matrixAt(std::span<const double> x,
                             const std::map<std::string, double>& params) const;

    // True iff the chart has even dimension 2n and the entries are exactly
    // pi^{i, n+i} = 1 (the canonical pairing).
    bool isCanonical() const;

    // All entries as exact polynomials with parameter values substituted;
    // nullopt when any entry leaves the polynomial fragment.
    std::optional<std::map<std::pair<int, int>, Polynomial>>
    polynomialEntries(const std::map<std::string, double>& params) const;

private:
    std::vector<std::string> chart_;
    EntryMap entries_;
};

// Chart (q1..qn, p1..pn) with {q_i, p_i} = 1.
BivectorField canonicalBivector(int n);

// Lie algebra structure constants c^k_{ij}, antisymmetric in (i, j) exactly.
class StructureConstants {
public:
    StructureConstants(int dim, std::vector<double> values);  // values[k*m*m + i*m + j]

    int dim() const { return dim_; }
    double at(int k, int i, int j) const {
        return values_[static_cast<std::size_t>((k * dim_ + i) * dim_ + j)];
    }

    struct JacobiResidual {
        double residual;
        int i, j, k, l;
    };
    JacobiResidual worstJacobi() const;

    // c^k_{ij} = sign * epsilon_{ijk}
    static StructureConstants so3(double sign);

private:
    int dim_;
    std::vector<double> values_;
};

// Linear bivector pi^{ij}(xi) = sum_k c^k_{ij} xi_k on the dual coordinates.
// Throws JacobiViolationError when c fails the Jacobi identity (tol 1e-12).
BivectorField liePoissonFromConstants(const StructureConstants& c,
                                      std::vector<std::string> coordinateNames);

// {f, g}(x) = sum_{i<j} pi^{ij}(x) (d_i f d_j g - d_j f d_i g)
double bracketEval(const BivectorField& biv, const Expression& f, const Expression& g,
                   const Point& x);

// X_H(x) with components sum_j pi^{ij}(x) d_j H(x)
std::vector<double> hamiltonianVectorField(const BivectorField& biv, const Expression& h,
                                           const Point& x);

// {f,{g,h}} + {h,{f,g}} + {g,{h,f}} at x, with the inner brackets
// differentiated through the bivector coefficients by nested forward duals.
double jacobiator(const BivectorField& biv, const Expression& f, const Expression& g,
                  const Expression& h, const Point& x);

// Numerical rank of pi^{ij}(x): singular values above tol * sigma_max.
// Skew matrices have even rank; an odd count throws.
int rankAt(const BivectorField& biv, const Point& x, double tol = 1e-10);

// Trivector components of [pi, pi] up to a constant factor:
//   T^{ijk} = sum_r (pi^{ir} d_r pi^{jk} + pi^{jr} d_r pi^{ki} + pi^{kr} d_r pi^{ij})
// pi is Poisson iff every component is the zero polynomial. On coordinate
// triples this expression equals the jacobiator exactly (factor 1), which
// the test suite pins against the jacobiator oracle.
std::map<std::array<int, 3>, Polynomial>
schoutenSelfBracket(const BivectorField& biv, const std::map<std::string, double>& params);

bool allZero(const std::map<std::array<int, 3>, Polynomial>& trivector);

} // namespace gmech::poisson
