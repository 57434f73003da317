#include "gmech/symplectic.hpp"

#include <vector>

namespace gmech::symplin {

Matrix standardForm(int n) {
    if (n < 1) throw std::invalid_argument("standardForm: half-dimension must be >= 1");
    Matrix j = Matrix::Zero(2 * n, 2 * n);
    j.topRightCorner(n, n) = Matrix::Identity(n, n);
    j.bottomLeftCorner(n, n) = -Matrix::Identity(n, n);
    return j;
}

bool isSymplecticForm(const Matrix& omega, double tol) {
    if (omega.rows() != omega.cols())
        throw std::invalid_argument("isSymplecticForm: matrix is not square");
    if (omega.rows() == 0) return false;
    double skewDefect = (omega + omega.transpose()).cwiseAbs().maxCoeff();
    if (skewDefect > tol) return false;
    Eigen::JacobiSVD<Matrix> svd(omega);
    return svd.singularValues().minCoeff() > tol;
}

SymplecticForm::SymplecticForm(Matrix omega, double tol) : omega_(std::move(omega)) {
    if (omega_.rows() != omega_.cols())
        throw std::invalid_argument("SymplecticForm: matrix is not square");
    const int d = static_cast<int>(omega_.rows());
    for (int i = 0; i < d; ++i)
        for (int j = 0; j <= i; ++j)
            if (omega_(i, j) != -omega_(j, i))
                throw std::invalid_argument("SymplecticForm: matrix is not exactly skew");
    Eigen::JacobiSVD<Matrix> svd(omega_);
    const auto& sv = svd.singularValues();
    if (d == 0 || sv.minCoeff() <= tol * sv.maxCoeff())
        throw NotSymplecticError("SymplecticForm: matrix is degenerate");
}

Subspace::Subspace(Matrix basis, double tol) : basis_(std::move(basis)) {
    if (basis_.cols() > basis_.rows())
        throw std::invalid_argument("Subspace: more basis vectors than ambient dimension");
    if (basis_.cols() > 0) {
        Eigen::JacobiSVD<Matrix> svd(basis_);
        const auto& sv = svd.singularValues();
        if (sv.minCoeff() <= tol * sv.maxCoeff())
            throw std::invalid_argument("Subspace: basis vectors are linearly dependent");
    }
}

Subspace Subspace::zero(int ambientDim) { return Subspace(Matrix(ambientDim, 0)); }

Subspace Subspace::full(int ambientDim) {
    return Subspace(Matrix::Identity(ambientDim, ambientDim));
}

Subspace Subspace::spanOf(std::initializer_list<Vector> vectors) {
    if (vectors.size() == 0) throw std::invalid_argument("spanOf: empty list");
    const auto rows = vectors.begin()->size();
    Matrix b(rows, static_cast<Eigen::Index>(vectors.size()));
    Eigen::Index col = 0;
    for (const auto& v : vectors) b.col(col++) = v;
    return Subspace(std::move(b));
}

Matrix kernelOf(const Matrix& m, double tol) {
    const Eigen::Index n = m.cols();
    if (m.rows() == 0) return Matrix::Identity(n, n);
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cutoff = sv.size() > 0 ? tol * sv.maxCoeff() : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) ++rank;
    return svd.matrixV().rightCols(n - rank);
}

namespace {

// Orthonormal column basis at rank tolerance (rank-revealing).
Matrix orthonormalized(const Matrix& basis, double tol) {
    if (basis.cols() == 0) return basis;
    Eigen::JacobiSVD<Matrix> svd(basis, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const double cutoff = tol * sv.maxCoeff();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) ++rank;
    return svd.matrixU().leftCols(rank);
}

int rankOf(const Matrix& m, double tol) {
    if (m.rows() == 0 || m.cols() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    const double cutoff = tol * sv.maxCoeff();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) ++rank;
    return rank;
}

} // namespace

bool contains(const Subspace& outer, const Subspace& inner, double tol) {
    if (outer.ambientDim() != inner.ambientDim())
        throw std::invalid_argument("contains: ambient dimensions differ");
    if (inner.dim() == 0) return true;
    if (inner.dim() > outer.dim()) return false;
    Matrix joined(outer.ambientDim(), outer.dim() + inner.dim());
    joined << outer.basis(), inner.basis();
    return rankOf(joined, tol) == outer.dim();
}

bool sameSubspace(const Subspace& a, const Subspace& b, double tol) {
    return a.dim() == b.dim() && contains(a, b, tol);
}

int intersectionDim(const Subspace& a, const Subspace& b, double tol) {
    if (a.ambientDim() != b.ambientDim())
        throw std::invalid_argument("intersectionDim: ambient dimensions differ");
    if (a.dim() == 0 || b.dim() == 0) return 0;
    Matrix joined(a.ambientDim(), a.dim() + b.dim());
    joined << a.basis(), b.basis();
    return a.dim() + b.dim() - rankOf(joined, tol);
}

Subspace symplecticOrthogonal(const SymplecticForm& form, const Subspace& w) {
    if (form.dim() != w.ambientDim())
        throw std::invalid_argument("symplecticOrthogonal: dimension mismatch");
    if (w.dim() == 0) return Subspace::full(form.dim());
    // v satisfies omega(v, w_k) = 0 for all k  <=>  (W^T Omega^T) v = 0
    Matrix constraints = w.basis().transpose() * form.matrix().transpose();
    return Subspace(kernelOf(constraints));
}

Subspace annihilator(const Subspace& w) {
    if (w.dim() == 0) return Subspace::full(w.ambientDim());
    return Subspace(kernelOf(w.basis().transpose()));
}

const char* className(SubspaceClass c) {
    switch (c) {
    case SubspaceClass::Symplectic: return "symplectic";
    case SubspaceClass::Isotropic: return "isotropic";
    case SubspaceClass::Coisotropic: return "coisotropic";
    case SubspaceClass::Lagrangian: return "lagrangian";
    case SubspaceClass::Generic: return "generic";
    }
    return "?";
}

SubspaceClass classifySubspace(const SymplecticForm& form, const Subspace& w, double tol) {
    if (form.dim() != w.ambientDim())
        throw std::invalid_argument("classifySubspace: dimension mismatch");
    const Subspace perp = symplecticOrthogonal(form, w);
    if (sameSubspace(w, perp, tol)) return SubspaceClass::Lagrangian;
    if (contains(perp, w, tol)) return SubspaceClass::Isotropic;
    if (w.dim() == form.dim()) return SubspaceClass::Symplectic;  // W = V
    if (contains(w, perp, tol)) return SubspaceClass::Coisotropic;
    if (intersectionDim(w, perp, tol) == 0 && w.dim() > 0) return SubspaceClass::Symplectic;
    return SubspaceClass::Generic;
}

Matrix darbouxBasis(const SymplecticForm& form, double tol) {
    const int d = form.dim();
    if (d % 2 != 0) throw NotSymplecticError("darbouxBasis: odd dimension");
    const int n = d / 2;

    std::vector<Vector> pool;
    pool.reserve(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) pool.push_back(Vector::Unit(d, i));

    const double scale = form.matrix().cwiseAbs().maxCoeff();
    std::vector<Vector> qs, ps;

    for (int round = 0; round < n; ++round) {
        // pivot: the remaining pair with the largest pairing
        double best = 0.0;
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            Vector omegaVi = form.matrix() * pool[i];
            for (std::size_t j = i + 1; j < pool.size(); ++j) {
                double val = std::abs(pool[j].dot(omegaVi));
                if (val > best) { best = val; bi = i; bj = j; }
            }
        }
        if (best <= tol * scale)
            throw NotSymplecticError("darbouxBasis: not symplectic (all pairings degenerate)");

        double pairing = form.pair(pool[bi], pool[bj]);
        Vector q = pool[bi];
        Vector p = pool[bj] / pairing;   // omega(q, p) = 1

        // drop the chosen pair, then project the rest onto the omega-orthogonal
        // complement of span{q, p}
        std::vector<Vector> next;
        next.reserve(pool.size() - 2);
        for (std::size_t k = 0; k < pool.size(); ++k) {
            if (k == bi || k == bj) continue;
            Vector v = pool[k];
            v -= form.pair(v, p) * q;
            v += form.pair(v, q) * p;
            double norm = v.norm();
            if (norm > 1e-13) next.push_back(v / norm);
        }
        pool = std::move(next);
        qs.push_back(std::move(q));
        ps.push_back(std::move(p));
    }

    Matrix b(d, d);
    for (int i = 0; i < n; ++i) {
        b.col(i) = qs[static_cast<std::size_t>(i)];
        b.col(n + i) = ps[static_cast<std::size_t>(i)];
    }
    return b;
}

Reduction reduce(const SymplecticForm& form, const Subspace& w, double tol) {
    if (form.dim() != w.ambientDim())
        throw std::invalid_argument("reduce: dimension mismatch");

    const int k = w.dim();
    if (k == 0) return {0, Matrix(form.dim(), 0), Matrix(0, 0)};

    Matrix q = orthonormalized(w.basis(), tol);  // d x k

    // K = W cap W^perp via the kernel of [W | -W^perp]
    const Subspace perp = symplecticOrthogonal(form, w);
    Matrix joined(form.dim(), k + perp.dim());
    joined << w.basis(), -perp.basis();
    Matrix null = kernelOf(joined, tol);
    Matrix kBasis = w.basis() * null.topRows(k);          // d x (null dim), spans K
    Matrix kOrtho = orthonormalized(kBasis, tol);         // d x r

    // representatives: the complement of K inside W, in W-coordinates
    Matrix kCoords = q.transpose() * kOrtho;              // k x r
    Matrix repCoords = kernelOf(kCoords.transpose(), tol); // k x (k - r)
    Matrix reps = q * repCoords;                          // d x (k - r)

    Reduction out;
    out.quotientDim = static_cast<int>(reps.cols());
    out.representatives = reps;
    out.inducedForm = reps.transpose() * form.matrix() * reps;
    if (out.quotientDim > 0 && !isSymplecticForm(out.inducedForm, tol))
        throw std::logic_error("reduce: induced form failed to be symplectic");
    return out;
}

} // namespace gmech::symplin
