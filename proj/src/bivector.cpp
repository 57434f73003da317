#include "gmech/bivector.hpp"

#include <cmath>

namespace gmech::poisson {

using expr::Dual;

// ---------------------------------------------------------------------------
// BivectorField
// ---------------------------------------------------------------------------

BivectorField::BivectorField(std::vector<std::string> chart, EntryMap entries)
    : chart_(std::move(chart)), entries_(std::move(entries)) {
    const int n = dim();
    if (n < 1) throw std::invalid_argument("BivectorField: empty chart");
    for (const auto& [key, e] : entries_) {
        auto [i, j] = key;
        if (i < 0 || j < 0 || i >= j || j >= n)
            throw std::invalid_argument("BivectorField: entry indices must satisfy 0 <= i < j < dim");
        if (e.chart() != chart_)
            throw std::invalid_argument("BivectorField: entry expression uses a different chart");
    }
}

std::set<std::string> BivectorField::freeParameters() const {
    std::set<std::string> out;
    for (const auto& [key, e] : entries_)
        out.merge(e.freeParameters());
    return out;
}

Eigen::MatrixXd BivectorField::matrixAt(std::span<const double> x,
                                        const std::map<std::string, double>& params) const {
    const int n = dim();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [key, e] : entries_) {
        auto [i, j] = key;
        double v = e.eval(x, e.bindParameters(params));
        m(i, j) = v;
        m(j, i) = -v;
    }
    return m;
}

bool BivectorField::isCanonical() const {
    const int d = dim();
    if (d % 2 != 0) return false;
    const int n = d / 2;
    if (static_cast<int>(entries_.size()) != n) return false;
    for (const auto& [key, e] : entries_) {
        auto [i, j] = key;
        if (j != i + n) return false;
        auto view = e.node(e.rootId());
        if (view.kind != 0 || view.value != 1.0) return false;
    }
    return true;
}

std::optional<std::map<std::pair<int, int>, Polynomial>>
BivectorField::polynomialEntries(const std::map<std::string, double>& params) const {
    std::map<std::pair<int, int>, Polynomial> out;
    for (const auto& [key, e] : entries_) {
        auto p = Polynomial::fromExpression(e, params);
        if (!p) return std::nullopt;
        out.emplace(key, std::move(*p));
    }
    return out;
}

BivectorField canonicalBivector(int n) {
    if (n < 1) throw std::invalid_argument("canonicalBivector: half-dimension must be >= 1");
    std::vector<std::string> chart;
    chart.reserve(static_cast<std::size_t>(2 * n));
    for (int i = 1; i <= n; ++i) chart.push_back("q" + std::to_string(i));
    for (int i = 1; i <= n; ++i) chart.push_back("p" + std::to_string(i));
    BivectorField::EntryMap entries;
    for (int i = 0; i < n; ++i)
        entries.emplace(std::make_pair(i, n + i), Expression::constant(1.0, chart));
    return {std::move(chart), std::move(entries)};
}

// ---------------------------------------------------------------------------
// Structure constants and the Lie-Poisson bivector
// ---------------------------------------------------------------------------

StructureConstants::StructureConstants(int dim, std::vector<double> values)
    : dim_(dim), values_(std::move(values)) {
    if (dim_ < 1) throw std::invalid_argument("StructureConstants: dimension must be >= 1");
    if (values_.size() != static_cast<std::size_t>(dim_) * dim_ * dim_)
        throw std::invalid_argument("StructureConstants: wrong tensor size");
    for (int k = 0; k < dim_; ++k)
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j <= i; ++j)
                if (at(k, i, j) != -at(k, j, i))
                    throw std::invalid_argument(
                        "StructureConstants: c^k_ij must be exactly antisymmetric in (i, j)");
}

StructureConstants::JacobiResidual StructureConstants::worstJacobi() const {
    JacobiResidual worst{0.0, 0, 0, 0, 0};
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j)
            for (int k = 0; k < dim_; ++k)
                for (int l = 0; l < dim_; ++l) {
                    double sum = 0.0;
                    for (int m = 0; m < dim_; ++m)
                        sum += at(m, i, j) * at(l, m, k) + at(m, j, k) * at(l, m, i) +
                               at(m, k, i) * at(l, m, j);
                    if (std::fabs(sum) > worst.residual)
                        worst = {std::fabs(sum), i, j, k, l};
                }
    return worst;
}

StructureConstants StructureConstants::so3(double sign) {
    std::vector<double> c(27, 0.0);
    auto eps = [](int i, int j, int k) -> double {
        if (i == j || j == k || i == k) return 0.0;
        // parity of the permutation (i, j, k) of (0, 1, 2)
        return ((j - i + 3) % 3 == 1) ? 1.0 : -1.0;
    };
    for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                c[static_cast<std::size_t>((k * 3 + i) * 3 + j)] = sign * eps(i, j, k);
    return {3, std::move(c)};
}

BivectorField liePoissonFromConstants(const StructureConstants& c,
                                      std::vector<std::string> coordinateNames) {
    const int m = c.dim();
    if (static_cast<int>(coordinateNames.size()) != m)
        throw std::invalid_argument("liePoissonFromConstants: name count != dimension");

    auto worst = c.worstJacobi();
    if (worst.residual > 1e-12)
        throw JacobiViolationError(worst.residual, worst.i, worst.j, worst.k, worst.l);

    BivectorField::EntryMap entries;
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            std::optional<Expression> sum;
            for (int k = 0; k < m; ++k) {
                double coef = c.at(k, i, j);
                if (coef == 0.0) continue;
                Expression term =
                    Expression::scaled(coef, Expression::coordinate(k, coordinateNames));
                sum = sum ? Expression::sum(std::move(*sum), term) : std::move(term);
            }
            if (sum) entries.emplace(std::make_pair(i, j), std::move(*sum));
        }
    }
    return {std::move(coordinateNames), std::move(entries)};
}

// ---------------------------------------------------------------------------
// Bracket machinery. The generic-scalar versions let the jacobiator seed
// dual numbers through an inner bracket.
// ---------------------------------------------------------------------------

namespace {

template <typename T>
std::vector<T> gradientGeneric(const Expression& e, std::span<const T> x,
                               std::span<const double> params) {
    const std::size_t n = x.size();
    std::vector<Dual<T>> duals(n);
    for (std::size_t i = 0; i < n; ++i) duals[i] = Dual<T>(x[i], T(0.0));
    std::vector<T> grad(n, T(0.0));
    for (std::size_t i = 0; i < n; ++i) {
        if (!e.usesCoordinate(static_cast<int>(i))) continue;
        duals[i].d = T(1.0);
        grad[i] = e.evalGeneric<Dual<T>>(duals, params).d;
        duals[i].d = T(0.0);
    }
    return grad;
}

// Aligned parameter vectors, resolved once per operation.
struct BoundEntries {
    const BivectorField* biv;
    std::vector<std::vector<double>> params;  // parallel to biv->entries()

    BoundEntries(const BivectorField& b, const std::map<std::string, double>& bindings)
        : biv(&b) {
        params.reserve(b.entries().size());
        for (const auto& [key, e] : b.entries()) params.push_back(e.bindParameters(bindings));
    }
};

template <typename T>
T bracketValue(const BoundEntries& bound, const Expression& f, std::span<const double> fParams,
               const Expression& g, std::span<const double> gParams, std::span<const T> x) {
    auto gf = gradientGeneric<T>(f, x, fParams);
    auto gg = gradientGeneric<T>(g, x, gParams);
    T acc(0.0);
    std::size_t idx = 0;
    for (const auto& [key, e] : bound.biv->entries()) {
        auto [i, j] = key;
        T pij = e.template evalGeneric<T>(x, bound.params[idx++]);
        acc = acc + pij * (gf[static_cast<std::size_t>(i)] * gg[static_cast<std::size_t>(j)] -
                           gf[static_cast<std::size_t>(j)] * gg[static_cast<std::size_t>(i)]);
    }
    return acc;
}

void checkPointDim(const BivectorField& biv, const Point& x) {
    if (static_cast<int>(x.coordinates.size()) != biv.dim())
        throw std::invalid_argument("point dimension does not match the chart");
}

} // namespace

double bracketEval(const BivectorField& biv, const Expression& f, const Expression& g,
                   const Point& x) {
    checkPointDim(biv, x);
    BoundEntries bound(biv, x.parameters);
    auto fp = f.bindParameters(x.parameters);
    auto gp = g.bindParameters(x.parameters);
    return bracketValue<double>(bound, f, fp, g, gp, x.coordinates);
}

std::vector<double> hamiltonianVectorField(const BivectorField& biv, const Expression& h,
                                           const Point& x) {
    checkPointDim(biv, x);
    const int n = biv.dim();
    auto grad = h.gradient(x.coordinates, h.bindParameters(x.parameters));
    std::vector<double> field(static_cast<std::size_t>(n), 0.0);
    for (const auto& [key, e] : biv.entries()) {
        auto [i, j] = key;
        double pij = e.eval(x.coordinates, e.bindParameters(x.parameters));
        field[static_cast<std::size_t>(i)] += pij * grad[static_cast<std::size_t>(j)];
        field[static_cast<std::size_t>(j)] -= pij * grad[static_cast<std::size_t>(i)];
    }
    return field;
}

double jacobiator(const BivectorField& biv, const Expression& f, const Expression& g,
                  const Expression& h, const Point& x) {
    checkPointDim(biv, x);
    const std::size_t n = static_cast<std::size_t>(biv.dim());
    BoundEntries bound(biv, x.parameters);
    auto fp = f.bindParameters(x.parameters);
    auto gp = g.bindParameters(x.parameters);
    auto hp = h.bindParameters(x.parameters);

    // {a, B} where B(y) = {b, c}(y); dB is obtained by seeding duals through
    // the full bracket value, entries included.
    auto nested = [&](const Expression& a, std::span<const double> ap, const Expression& b,
                      std::span<const double> bp, const Expression& c,
                      std::span<const double> cp) -> double {
        auto gradA = a.gradient(x.coordinates, ap);
        std::vector<double> dB(n, 0.0);
        std::vector<Dual<double>> duals(n);
        for (std::size_t i = 0; i < n; ++i) duals[i] = Dual<double>(x.coordinates[i], 0.0);
        for (std::size_t axis = 0; axis < n; ++axis) {
            duals[axis].d = 1.0;
            dB[axis] = bracketValue<Dual<double>>(bound, b, bp, c, cp, duals).d;
            duals[axis].d = 0.0;
        }
        double acc = 0.0;
        std::size_t idx = 0;
        for (const auto& [key, e] : bound.biv->entries()) {
            auto [i, j] = key;
            double pij = e.eval(x.coordinates, bound.params[idx++]);
            acc += pij * (gradA[static_cast<std::size_t>(i)] * dB[static_cast<std::size_t>(j)] -
                          gradA[static_cast<std::size_t>(j)] * dB[static_cast<std::size_t>(i)]);
        }
        return acc;
    };

    return nested(f, fp, g, gp, h, hp) +   // {f, {g, h}}
           nested(h, hp, f, fp, g, gp) +   // {h, {f, g}}
           nested(g, gp, h, hp, f, fp);    // {g, {h, f}}
}

int rankAt(const BivectorField& biv, const Point& x, double tol) {
    checkPointDim(biv, x);
    Eigen::MatrixXd m = biv.matrixAt(x.coordinates, x.parameters);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    const double top = sv.size() > 0 ? sv.maxCoeff() : 0.0;
    if (top == 0.0) return 0;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol * top) ++rank;
    if (rank % 2 != 0)
        throw std::logic_error("rankAt: skew matrix produced an odd numerical rank");
    return rank;
}

// ---------------------------------------------------------------------------
// Schouten self-bracket on polynomial entries
// ---------------------------------------------------------------------------

std::map<std::array<int, 3>, Polynomial>
schoutenSelfBracket(const BivectorField& biv, const std::map<std::string, double>& params) {
    auto polys = biv.polynomialEntries(params);
    if (!polys)
        throw NonPolynomialError("schoutenSelfBracket: bivector entries are not all polynomial");

    const int n = biv.dim();
    Polynomial zero(n);
    auto pi = [&](int a, int b) -> Polynomial {
        if (a == b) return zero;
        if (a < b) {
            auto it = polys->find({a, b});
            return it == polys->end() ? zero : it->second;
        }
        auto it = polys->find({b, a});
        return it == polys->end() ? zero : -it->second;
    };

    std::map<std::array<int, 3>, Polynomial> out;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                Polynomial t(n);
                for (int r = 0; r < n; ++r) {
                    t = t + pi(i, r) * pi(j, k).partial(r);
                    t = t + pi(j, r) * pi(k, i).partial(r);
                    t = t + pi(k, r) * pi(i, j).partial(r);
                }
                out.emplace(std::array<int, 3>{i, j, k}, std::move(t));
            }
    return out;
}

bool allZero(const std::map<std::array<int, 3>, Polynomial>& trivector) {
    for (const auto& [key, p] : trivector)
        if (!p.isZero()) return false;
    return true;
}

} // namespace gmech::poisson
