// Arithmetic expressions over named coordinates and parameters: parsing,
// evaluation, and exact forward-mode differentiation. Hamiltonians, bivector
// coefficients and invariants are all stored in this form.
#pragma once

#include <cmath>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gmech::expr {

// ---------------------------------------------------------------------------
// Dual numbers. Nesting Dual<Dual<double>> gives second derivatives, which the
// jacobiator needs when it differentiates through bivector coefficients.
// ---------------------------------------------------------------------------

template <typename T>
struct Dual {
    T v{};  // value
    T d{};  // derivative along the seeded direction

    Dual() = default;
    Dual(T value) : v(std::move(value)) {}
    Dual(T value, T deriv) : v(std::move(value)), d(std::move(deriv)) {}
};

inline double innerValue(double x) { return x; }
template <typename T>
double innerValue(const Dual<T>& x) { return innerValue(x.v); }

inline bool allPartsZero(double x) { return x == 0.0; }
template <typename T>
bool allPartsZero(const Dual<T>& x) { return allPartsZero(x.v) && allPartsZero(x.d); }

inline bool hasDerivativePart(double) { return false; }
template <typename T>
bool hasDerivativePart(const Dual<T>& x) { return !allPartsZero(x.d); }

template <typename T> Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.v + b.v, a.d + b.d}; }
template <typename T> Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) { return {a.v - b.v, a.d - b.d}; }
template <typename T> Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }
template <typename T> Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
    return {a.v * b.v, a.d * b.v + a.v * b.d};
}
template <typename T> Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
    T q = a.v / b.v;
    return {q, (a.d - q * b.d) / b.v};
}

using std::atan; using std::cos; using std::exp; using std::log;
using std::pow; using std::sin; using std::sqrt; using std::tan;

template <typename T> Dual<T> sin(const Dual<T>& a) { return {sin(a.v), a.d * cos(a.v)}; }
template <typename T> Dual<T> cos(const Dual<T>& a) { return {cos(a.v), -(a.d * sin(a.v))}; }
template <typename T> Dual<T> tan(const Dual<T>& a) {
    T t = tan(a.v);
    return {t, a.d * (T(1.0) + t * t)};
}
template <typename T> Dual<T> atan(const Dual<T>& a) {
    return {atan(a.v), a.d / (T(1.0) + a.v * a.v)};
}
template <typename T> Dual<T> exp(const Dual<T>& a) {
    T e = exp(a.v);
    return {e, a.d * e};
}
template <typename T> Dual<T> log(const Dual<T>& a) { return {log(a.v), a.d / a.v}; }
template <typename T> Dual<T> sqrt(const Dual<T>& a) {
    T s = sqrt(a.v);
    if (allPartsZero(a.d)) return {s, T(0.0)};
    return {s, a.d / (T(2.0) * s)};
}

// x^y for generic scalars. A derivative-free exponent is treated as a
// constant, so negative bases with integer exponents stay differentiable;
// the general formula needs log of the base. Domain screening happens in
// Expression::evalGeneric, which has the node text for error messages.
template <typename T> Dual<T> pow(const Dual<T>& x, const Dual<T>& y) {
    if (allPartsZero(y)) return {T(1.0), T(0.0)};                  // x^0
    if (allPartsZero(x) && innerValue(y.v) > 0.0) return {T(0.0), T(0.0)};
    if (allPartsZero(y.d)) {
        T p = pow(x.v, y.v);
        if (allPartsZero(x.d)) return {p, T(0.0)};
        return {p, y.v * pow(x.v, y.v - T(1.0)) * x.d};
    }
    T p = pow(x.v, y.v);
    return {p, p * (y.d * log(x.v) + y.v * x.d / x.v)};
}

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

// Lexical or grammatical failure; `offset` is the byte position in the input.
struct ParseError : std::runtime_error {
    std::size_t offset;
    ParseError(const std::string& msg, std::size_t at)
        : std::runtime_error(msg + " (at offset " + std::to_string(at) + ")"), offset(at) {}
};

// Identifier that is neither a coordinate, a parameter nor a builtin function.
struct UnknownIdentifierError : ParseError {
    std::string identifier;
    UnknownIdentifierError(std::string name, std::size_t at)
        : ParseError("unknown identifier '" + name + "'", at), identifier(std::move(name)) {}
};

// Evaluation outside the mathematical domain (log of non-positive, division
// by zero, ...). Carries the rendered text of the offending node.
struct DomainError : std::runtime_error {
    std::string nodeText;
    DomainError(const std::string& what, std::string node)
        : std::runtime_error(what + " in '" + node + "'"), nodeText(std::move(node)) {}
};

struct UnboundNameError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Point: a phase-space sample plus parameter bindings.
// ---------------------------------------------------------------------------

struct Point {
    std::vector<double> coordinates;
    std::map<std::string, double> parameters;

    Point() = default;
    explicit Point(std::vector<double> coords, std::map<std::string, double> params = {})
        : coordinates(std::move(coords)), parameters(std::move(params)) {}
};

// ---------------------------------------------------------------------------
// Expression
// ---------------------------------------------------------------------------

enum class UnaryOp { Neg, Sin, Cos, Tan, Arctan, Exp, Log, Sqrt };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

class Expression {
public:
    // Parses `text` against an ordered coordinate list and a parameter set.
    // Precedence: ^ > unary - > *,/ > +,- with ^ right-associative and the
    // rest left-associative. Unknown identifiers are rejected.
    static Expression parse(std::string_view text,
                            const std::vector<std::string>& coordinates,
                            const std::set<std::string>& parameters = {});

    // Programmatic builders (catalog and Lie-Poisson construction). Operands
    // must share the same chart.
    static Expression constant(double value, std::vector<std::string> chart);
    static Expression coordinate(int index, std::vector<std::string> chart);
    static Expression sum(Expression a, const Expression& b);
    static Expression product(Expression a, const Expression& b);
    static Expression scaled(double factor, Expression a);

    int dim() const { return static_cast<int>(chart_.size()); }
    const std::vector<std::string>& chart() const { return chart_; }

    // Coordinates actually referenced, in chart order.
    std::vector<std::string> freeCoordinates() const;
    bool usesCoordinate(int index) const { return coordUsed_[static_cast<std::size_t>(index)]; }

    // Parameters actually referenced (sorted).
    std::set<std::string> freeParameters() const;
    const std::vector<std::string>& parameterTable() const { return params_; }

    // Resolves this expression's parameter table against `bindings`; the
    // result is what the span-based entry points expect.
    std::vector<double> bindParameters(const std::map<std::string, double>& bindings) const;

    double eval(std::span<const double> coords, std::span<const double> params) const;
    double evalAt(const Point& p) const;

    // Exact forward-mode gradient over the full chart, in chart order.
    std::vector<double> gradient(std::span<const double> coords, std::span<const double> params) const;
    std::vector<double> gradientAt(const Point& p) const;

    // Generic-scalar evaluation; T is double or (nested) Dual.
    template <typename T>
    T evalGeneric(std::span<const T> coords, std::span<const double> params) const;

    // Renders to text that reparses to an expression with identical evaluation.
    std::string text() const;

    // Structural accessors for the polynomial converter and separability scan.
    struct NodeView {
        int kind;             // 0 const, 1 coord, 2 param, 3 unary, 4 binary
        double value;
        int sym;
        UnaryOp uop;
        BinaryOp bop;
        int a, b;
    };
    int rootId() const { return root_; }
    int nodeCount() const { return static_cast<int>(nodes_.size()); }
    NodeView node(int id) const;

private:
    enum class Kind { Constant, Coordinate, Parameter, Unary, Binary };
    struct Node {
        Kind kind;
        double value = 0.0;   // Constant
        int sym = -1;         // Coordinate index in chart / parameter table index
        UnaryOp uop{};
        BinaryOp bop{};
        int a = -1, b = -1;   // children (always lower indices)
    };

    Expression() = default;
    int addNode(Node n);
    int importSubtree(const Expression& other, int id, std::vector<int>& paramMap);
    std::string renderNode(int id) const;
    void markUsage();

    friend class Parser;

    std::vector<Node> nodes_;
    int root_ = -1;
    std::vector<std::string> chart_;
    std::vector<std::string> params_;   // referenced parameter names, first-use order
    std::vector<bool> coordUsed_;
};

// ---------------------------------------------------------------------------
// Template implementation
// ---------------------------------------------------------------------------

template <typename T>
T Expression::evalGeneric(std::span<const T> coords, std::span<const double> params) const {
    if (coords.size() != chart_.size())
        throw std::invalid_argument("expression: coordinate vector has wrong dimension");
    if (params.size() != params_.size())
        throw std::invalid_argument("expression: parameter vector has wrong length");

    static thread_local std::vector<T> stack;
    stack.assign(nodes_.size(), T(0.0));

    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        switch (n.kind) {
        case Kind::Constant:   stack[i] = T(n.value); break;
        case Kind::Coordinate: stack[i] = coords[static_cast<std::size_t>(n.sym)]; break;
        case Kind::Parameter:  stack[i] = T(params[static_cast<std::size_t>(n.sym)]); break;
        case Kind::Unary: {
            const T& x = stack[static_cast<std::size_t>(n.a)];
            switch (n.uop) {
            case UnaryOp::Neg:    stack[i] = -x; break;
            case UnaryOp::Sin:    stack[i] = sin(x); break;
            case UnaryOp::Cos:    stack[i] = cos(x); break;
            case UnaryOp::Tan:    stack[i] = tan(x); break;
            case UnaryOp::Arctan: stack[i] = atan(x); break;
            case UnaryOp::Exp:    stack[i] = exp(x); break;
            case UnaryOp::Log:
                if (innerValue(x) <= 0.0)
                    throw DomainError("log of non-positive value", renderNode(static_cast<int>(i)));
                stack[i] = log(x);
                break;
            case UnaryOp::Sqrt:
                if (innerValue(x) < 0.0)
                    throw DomainError("sqrt of negative value", renderNode(static_cast<int>(i)));
                if (innerValue(x) == 0.0 && hasDerivativePart(x))
                    throw DomainError("derivative of sqrt at zero", renderNode(static_cast<int>(i)));
                stack[i] = sqrt(x);
                break;
            }
            break;
        }
        case Kind::Binary: {
            const T& x = stack[static_cast<std::size_t>(n.a)];
            const T& y = stack[static_cast<std::size_t>(n.b)];
            switch (n.bop) {
            case BinaryOp::Add: stack[i] = x + y; break;
            case BinaryOp::Sub: stack[i] = x - y; break;
            case BinaryOp::Mul: stack[i] = x * y; break;
            case BinaryOp::Div:
                if (innerValue(y) == 0.0)
                    throw DomainError("division by zero", renderNode(static_cast<int>(i)));
                stack[i] = x / y;
                break;
            case BinaryOp::Pow: {
                const double bx = innerValue(x);
                const double by = innerValue(y);
                if (bx == 0.0 && by < 0.0)
                    throw DomainError("zero raised to a negative power", renderNode(static_cast<int>(i)));
                if (bx < 0.0 && (hasDerivativePart(y) || by != std::floor(by)))
                    throw DomainError("negative base with non-integer exponent", renderNode(static_cast<int>(i)));
                if (bx == 0.0 && hasDerivativePart(y) && !allPartsZero(x))
                    throw DomainError("derivative of exponent at zero base", renderNode(static_cast<int>(i)));
                if (bx == 0.0 && hasDerivativePart(x) && by != 0.0 && by < 1.0)
                    throw DomainError("derivative of power at zero", renderNode(static_cast<int>(i)));
                stack[i] = pow(x, y);
                break;
            }
            }
            break;
        }
        }
    }
    return stack[static_cast<std::size_t>(root_)];
}

} // namespace gmech::expr
