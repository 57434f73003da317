// Exact multivariate polynomials with rational coefficients. These back the
// Schouten self-bracket, where "identically zero" must mean exactly zero.
#pragma once

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmech/expression.hpp"

namespace gmech::expr {

// Rational number on 64-bit integers, always normalized (den > 0, gcd = 1).
// Every finite double is an exact dyadic rational, so fromDouble is lossless
// whenever it fits.
struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;
    Rational(long long n) : num(n) {}
    Rational(long long n, long long d);

    static std::optional<Rational> fromDouble(double v);
    double toDouble() const { return static_cast<double>(num) / static_cast<double>(den); }

    bool isZero() const { return num == 0; }
    bool operator==(const Rational&) const = default;

    Rational operator-() const { return Rational(-num, den); }
    Rational operator+(const Rational& o) const;
    Rational operator-(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    Rational operator/(const Rational& o) const;

    std::string str() const;
};

class Polynomial {
public:
    using Monomial = std::vector<int>;  // exponent per coordinate, length dim

    explicit Polynomial(int dim) : dim_(dim) {}
    static Polynomial constant(int dim, const Rational& c);
    static Polynomial coordinate(int dim, int axis);

    int dim() const { return dim_; }
    bool isZero() const { return terms_.empty(); }
    int termCount() const { return static_cast<int>(terms_.size()); }
    const std::map<Monomial, Rational>& terms() const { return terms_; }

    Polynomial operator-() const;
    Polynomial operator+(const Polynomial& o) const;
    Polynomial operator-(const Polynomial& o) const;
    Polynomial operator*(const Polynomial& o) const;
    Polynomial scaled(const Rational& c) const;
    Polynomial pow(int exponent) const;

    // Exact partial derivative along `axis`.
    Polynomial partial(int axis) const;

    double eval(std::span<const double> x) const;
    bool operator==(const Polynomial&) const = default;

    std::string str(const std::vector<std::string>& names) const;

    // Converts an expression whose reachable operations are polynomial
    // (+, -, *, / by constant, ^ non-negative integer literal) with the given
    // parameter values substituted. Returns nullopt otherwise.
    static std::optional<Polynomial> fromExpression(const Expression& e,
                                                    const std::map<std::string, double>& params);

private:
    void addTerm(const Monomial& m, const Rational& c);

    int dim_;
    std::map<Monomial, Rational> terms_;  // zero coefficients never stored
};

} // namespace gmech::expr
