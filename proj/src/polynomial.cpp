#include "gmech/polynomial.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace gmech::expr {

// ---------------------------------------------------------------------------
// Rational
// ---------------------------------------------------------------------------

namespace {

long long checkedMul(long long a, long long b) {
    __int128 p = static_cast<__int128>(a) * b;
    if (p > std::numeric_limits<long long>::max() || p < std::numeric_limits<long long>::min())
        throw std::overflow_error("rational arithmetic overflow");
    return static_cast<long long>(p);
}

long long checkedAdd(long long a, long long b) {
    __int128 s = static_cast<__int128>(a) + b;
    if (s > std::numeric_limits<long long>::max() || s < std::numeric_limits<long long>::min())
        throw std::overflow_error("rational arithmetic overflow");
    return static_cast<long long>(s);
}

} // namespace

Rational::Rational(long long n, long long d) : num(n), den(d) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    if (den < 0) { num = -num; den = -den; }
    long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) { num /= g; den /= g; }
}

std::optional<Rational> Rational::fromDouble(double v) {
    if (!std::isfinite(v)) return std::nullopt;
    if (v == 0.0) return Rational(0);
    int exp = 0;
    double mant = std::frexp(v, &exp);        // v = mant * 2^exp, |mant| in [0.5, 1)
    long long m = static_cast<long long>(std::ldexp(mant, 53));
    exp -= 53;
    while (m != 0 && (m & 1) == 0) { m >>= 1; ++exp; }  // strip trailing zeros
    if (exp >= 0) {
        if (exp > 62) return std::nullopt;
        __int128 n = static_cast<__int128>(m) << exp;
        if (n > std::numeric_limits<long long>::max() || n < std::numeric_limits<long long>::min())
            return std::nullopt;
        return Rational(static_cast<long long>(n), 1);
    }
    if (-exp > 62) return std::nullopt;
    return Rational(m, 1LL << (-exp));
}

Rational Rational::operator+(const Rational& o) const {
    long long g = std::gcd(den, o.den);
    long long lcmB = checkedMul(den / g, o.den);
    long long n = checkedAdd(checkedMul(num, o.den / g), checkedMul(o.num, den / g));
    return Rational(n, lcmB);
}

Rational Rational::operator-(const Rational& o) const { return *this + (-o); }

Rational Rational::operator*(const Rational& o) const {
    long long g1 = std::gcd(num < 0 ? -num : num, o.den);
    long long g2 = std::gcd(o.num < 0 ? -o.num : o.num, den);
    return Rational(checkedMul(num / g1, o.num / g2), checkedMul(den / g2, o.den / g1));
}

Rational Rational::operator/(const Rational& o) const {
    if (o.num == 0) throw std::invalid_argument("rational division by zero");
    return *this * Rational(o.den, o.num);
}

std::string Rational::str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
}

// ---------------------------------------------------------------------------
// Polynomial
// ---------------------------------------------------------------------------

Polynomial Polynomial::constant(int dim, const Rational& c) {
    Polynomial p(dim);
    if (!c.isZero()) p.terms_.emplace(Monomial(static_cast<std::size_t>(dim), 0), c);
    return p;
}

Polynomial Polynomial::coordinate(int dim, int axis) {
    if (axis < 0 || axis >= dim) throw std::invalid_argument("polynomial axis out of range");
    Polynomial p(dim);
    Monomial m(static_cast<std::size_t>(dim), 0);
    m[static_cast<std::size_t>(axis)] = 1;
    p.terms_.emplace(std::move(m), Rational(1));
    return p;
}

void Polynomial::addTerm(const Monomial& m, const Rational& c) {
    if (c.isZero()) return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) {
        it->second = it->second + c;
        if (it->second.isZero()) terms_.erase(it);
    }
}

Polynomial Polynomial::operator-() const {
    Polynomial out(dim_);
    for (const auto& [m, c] : terms_) out.terms_.emplace(m, -c);
    return out;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
    if (dim_ != o.dim_) throw std::invalid_argument("polynomial dimension mismatch");
    Polynomial out = *this;
    for (const auto& [m, c] : o.terms_) out.addTerm(m, c);
    return out;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + (-o); }

Polynomial Polynomial::operator*(const Polynomial& o) const {
    if (dim_ != o.dim_) throw std::invalid_argument("polynomial dimension mismatch");
    Polynomial out(dim_);
    for (const auto& [ma, ca] : terms_) {
        for (const auto& [mb, cb] : o.terms_) {
            Monomial m(ma);
            for (std::size_t i = 0; i < m.size(); ++i) m[i] += mb[i];
            out.addTerm(m, ca * cb);
        }
    }
    return out;
}

Polynomial Polynomial::scaled(const Rational& c) const {
    Polynomial out(dim_);
    if (c.isZero()) return out;
    for (const auto& [m, coef] : terms_) out.terms_.emplace(m, coef * c);
    return out;
}

Polynomial Polynomial::pow(int exponent) const {
    if (exponent < 0) throw std::invalid_argument("polynomial negative exponent");
    Polynomial out = constant(dim_, Rational(1));
    for (int i = 0; i < exponent; ++i) out = out * *this;
    return out;
}

Polynomial Polynomial::partial(int axis) const {
    if (axis < 0 || axis >= dim_) throw std::invalid_argument("polynomial axis out of range");
    Polynomial out(dim_);
    for (const auto& [m, c] : terms_) {
        int k = m[static_cast<std::size_t>(axis)];
        if (k == 0) continue;
        Monomial d(m);
        d[static_cast<std::size_t>(axis)] = k - 1;
        out.addTerm(d, c * Rational(k));
    }
    return out;
}

double Polynomial::eval(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_)
        throw std::invalid_argument("polynomial eval: wrong dimension");
    double acc = 0.0;
    for (const auto& [m, c] : terms_) {
        double t = c.toDouble();
        for (std::size_t i = 0; i < m.size(); ++i)
            for (int k = 0; k < m[i]; ++k) t *= x[i];
        acc += t;
    }
    return acc;
}

std::string Polynomial::str(const std::vector<std::string>& names) const {
    if (terms_.empty()) return "0";
    std::string out;
    for (const auto& [m, c] : terms_) {
        if (!out.empty()) out += " + ";
        out += c.str();
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m[i] == 0) continue;
            out += "*" + names[i];
            if (m[i] > 1) out += "^" + std::to_string(m[i]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Expression -> Polynomial
// ---------------------------------------------------------------------------

namespace {

std::optional<Polynomial> convertNode(const Expression& e, int id,
                                      const std::vector<double>& paramValues) {
    const auto n = e.node(id);
    const int dim = e.dim();
    switch (n.kind) {
    case 0: {  // constant
        auto r = Rational::fromDouble(n.value);
        if (!r) return std::nullopt;
        return Polynomial::constant(dim, *r);
    }
    case 1:    // coordinate
        return Polynomial::coordinate(dim, n.sym);
    case 2: {  // parameter, value substituted
        auto r = Rational::fromDouble(paramValues[static_cast<std::size_t>(n.sym)]);
        if (!r) return std::nullopt;
        return Polynomial::constant(dim, *r);
    }
    case 3: {  // unary
        if (n.uop != UnaryOp::Neg) return std::nullopt;
        auto inner = convertNode(e, n.a, paramValues);
        if (!inner) return std::nullopt;
        return -*inner;
    }
    case 4: {  // binary
        auto lhs = convertNode(e, n.a, paramValues);
        if (!lhs) return std::nullopt;
        if (n.bop == BinaryOp::Pow) {
            const auto exponent = e.node(n.b);
            if (exponent.kind != 0) return std::nullopt;
            double ev = exponent.value;
            if (ev < 0.0 || ev != std::floor(ev) || ev > 64.0) return std::nullopt;
            return lhs->pow(static_cast<int>(ev));
        }
        auto rhs = convertNode(e, n.b, paramValues);
        if (!rhs) return std::nullopt;
        switch (n.bop) {
        case BinaryOp::Add: return *lhs + *rhs;
        case BinaryOp::Sub: return *lhs - *rhs;
        case BinaryOp::Mul: return *lhs * *rhs;
        case BinaryOp::Div: {
            // only division by a nonzero constant stays polynomial
            if (rhs->termCount() != 1) return std::nullopt;
            const auto& [m, c] = *rhs->terms().begin();
            for (int k : m)
                if (k != 0) return std::nullopt;
            return lhs->scaled(Rational(1) / c);
        }
        default: return std::nullopt;
        }
    }
    }
    return std::nullopt;
}

} // namespace

std::optional<Polynomial> Polynomial::fromExpression(const Expression& e,
                                                     const std::map<std::string, double>& params) {
    std::vector<double> paramValues;
    try {
        paramValues = e.bindParameters(params);
    } catch (const UnboundNameError&) {
        return std::nullopt;
    }
    return convertNode(e, e.rootId(), paramValues);
}

} // namespace gmech::expr
