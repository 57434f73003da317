#include "gmech/expression.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>

namespace gmech::expr {

namespace {

const std::map<std::string, UnaryOp, std::less<>>& functionTable() {
    static const std::map<std::string, UnaryOp, std::less<>> table = {
        {"sin", UnaryOp::Sin},   {"cos", UnaryOp::Cos},   {"tan", UnaryOp::Tan},
        {"arctan", UnaryOp::Arctan}, {"atan", UnaryOp::Arctan},
        {"exp", UnaryOp::Exp},   {"log", UnaryOp::Log},   {"sqrt", UnaryOp::Sqrt},
    };
    return table;
}

std::string formatDouble(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

// ---------------------------------------------------------------------------
// Parser: hand-rolled recursive descent over a token stream.
// ---------------------------------------------------------------------------

class Parser {
public:
    Parser(std::string_view text, const std::vector<std::string>& coords,
           const std::set<std::string>& params)
        : text_(text) {
        out_.chart_ = coords;
        for (std::size_t i = 0; i < coords.size(); ++i) {
            if (!validName(coords[i]) || functionTable().count(coords[i]))
                throw std::invalid_argument("invalid coordinate name '" + coords[i] + "'");
            if (!coordIndex_.emplace(coords[i], static_cast<int>(i)).second)
                throw std::invalid_argument("duplicate coordinate name '" + coords[i] + "'");
        }
        for (const auto& p : params) {
            if (!validName(p) || functionTable().count(p))
                throw std::invalid_argument("invalid parameter name '" + p + "'");
            if (coordIndex_.count(p))
                throw std::invalid_argument("name '" + p + "' is both coordinate and parameter");
        }
        paramSet_ = &params;
    }

    Expression run() {
        if (text_.find_first_not_of(" \t\n\r") == std::string_view::npos)
            throw ParseError("empty expression", 0);
        out_.root_ = parseSum();
        skipSpace();
        if (pos_ != text_.size())
            throw ParseError("unexpected trailing input", pos_);
        out_.markUsage();
        return std::move(out_);
    }

private:
    static bool validName(const std::string& s) {
        if (s.empty() || (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_')) return false;
        return std::all_of(s.begin(), s.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
        });
    }

    void skipSpace() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skipSpace();
        if (pos_ < text_.size() && text_[pos_] == c) { ++pos_; return true; }
        return false;
    }

    char peek() {
        skipSpace();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    // sum := product (('+'|'-') product)*
    int parseSum() {
        int lhs = parseProduct();
        for (;;) {
            skipSpace();
            if (pos_ >= text_.size()) break;
            char c = text_[pos_];
            if (c != '+' && c != '-') break;
            ++pos_;
            int rhs = parseProduct();
            lhs = out_.addNode({Expression::Kind::Binary, 0.0, -1, {},
                                c == '+' ? BinaryOp::Add : BinaryOp::Sub, lhs, rhs});
        }
        return lhs;
    }

    // product := unary (('*'|'/') unary)*
    int parseProduct() {
        int lhs = parseUnary();
        for (;;) {
            skipSpace();
            if (pos_ >= text_.size()) break;
            char c = text_[pos_];
            if (c != '*' && c != '/') break;
            ++pos_;
            int rhs = parseUnary();
            lhs = out_.addNode({Expression::Kind::Binary, 0.0, -1, {},
                                c == '*' ? BinaryOp::Mul : BinaryOp::Div, lhs, rhs});
        }
        return lhs;
    }

    // unary := '-' unary | power     (unary minus binds below ^)
    int parseUnary() {
        if (eat('-')) {
            int inner = parseUnary();
            return out_.addNode({Expression::Kind::Unary, 0.0, -1, UnaryOp::Neg, {}, inner, -1});
        }
        return parsePower();
    }

    // power := atom ('^' powerRhs)?  with powerRhs := '-' powerRhs | power
    // so ^ is right-associative and exponents may carry a sign.
    int parsePower() {
        int base = parseAtom();
        skipSpace();
        if (pos_ < text_.size() && text_[pos_] == '^') {
            ++pos_;
            int exponent = parsePowerRhs();
            return out_.addNode({Expression::Kind::Binary, 0.0, -1, {}, BinaryOp::Pow, base, exponent});
        }
        return base;
    }

    int parsePowerRhs() {
        if (eat('-')) {
            int inner = parsePowerRhs();
            return out_.addNode({Expression::Kind::Unary, 0.0, -1, UnaryOp::Neg, {}, inner, -1});
        }
        return parsePower();
    }

    int parseAtom() {
        skipSpace();
        if (pos_ >= text_.size())
            throw ParseError("unexpected end of input", pos_);
        char c = text_[pos_];

        if (c == '(') {
            std::size_t open = pos_;
            ++pos_;
            int inner = parseSum();
            if (!eat(')'))
                throw ParseError("unbalanced '(' ", pos_ >= text_.size() ? text_.size() : open);
            return inner;
        }

        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return parseNumber();

        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return parseIdentifier();

        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    int parseNumber() {
        const char* begin = text_.data() + pos_;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin)
            throw ParseError("malformed number", pos_);
        pos_ += static_cast<std::size_t>(end - begin);
        return out_.addNode({Expression::Kind::Constant, v, -1, {}, {}, -1, -1});
    }

    int parseIdentifier() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name(text_.substr(start, pos_ - start));

        if (auto fn = functionTable().find(name); fn != functionTable().end()) {
            if (!eat('('))
                throw ParseError("expected '(' after function '" + name + "'", pos_);
            int arg = parseSum();
            if (!eat(')'))
                throw ParseError("unbalanced '(' in call of '" + name + "'",
                                 pos_ >= text_.size() ? text_.size() : pos_);
            return out_.addNode({Expression::Kind::Unary, 0.0, -1, fn->second, {}, arg, -1});
        }

        if (auto it = coordIndex_.find(name); it != coordIndex_.end())
            return out_.addNode({Expression::Kind::Coordinate, 0.0, it->second, {}, {}, -1, -1});

        if (paramSet_->count(name)) {
            int idx = paramIndex(name);
            return out_.addNode({Expression::Kind::Parameter, 0.0, idx, {}, {}, -1, -1});
        }

        throw UnknownIdentifierError(name, start);
    }

    int paramIndex(const std::string& name) {
        auto it = std::find(out_.params_.begin(), out_.params_.end(), name);
        if (it != out_.params_.end())
            return static_cast<int>(it - out_.params_.begin());
        out_.params_.push_back(name);
        return static_cast<int>(out_.params_.size()) - 1;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    Expression out_;
    std::map<std::string, int> coordIndex_;
    const std::set<std::string>* paramSet_ = nullptr;
};

Expression Expression::parse(std::string_view text,
                             const std::vector<std::string>& coordinates,
                             const std::set<std::string>& parameters) {
    return Parser(text, coordinates, parameters).run();
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

int Expression::addNode(Node n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
}

Expression Expression::constant(double value, std::vector<std::string> chart) {
    Expression e;
    e.chart_ = std::move(chart);
    e.root_ = e.addNode({Kind::Constant, value, -1, {}, {}, -1, -1});
    e.markUsage();
    return e;
}

Expression Expression::coordinate(int index, std::vector<std::string> chart) {
    if (index < 0 || index >= static_cast<int>(chart.size()))
        throw std::invalid_argument("coordinate index out of range");
    Expression e;
    e.chart_ = std::move(chart);
    e.root_ = e.addNode({Kind::Coordinate, 0.0, index, {}, {}, -1, -1});
    e.markUsage();
    return e;
}

// Appends a copy of `other`'s subtree rooted at `id`, remapping parameter
// table indices; returns the new node id.
int Expression::importSubtree(const Expression& other, int id, std::vector<int>& paramMap) {
    const Node& n = other.nodes_[static_cast<std::size_t>(id)];
    Node copy = n;
    if (n.kind == Kind::Parameter) {
        if (paramMap[static_cast<std::size_t>(n.sym)] < 0) {
            const std::string& name = other.params_[static_cast<std::size_t>(n.sym)];
            auto it = std::find(params_.begin(), params_.end(), name);
            int idx = it == params_.end() ? -1 : static_cast<int>(it - params_.begin());
            if (idx < 0) {
                params_.push_back(name);
                idx = static_cast<int>(params_.size()) - 1;
            }
            paramMap[static_cast<std::size_t>(n.sym)] = idx;
        }
        copy.sym = paramMap[static_cast<std::size_t>(n.sym)];
    }
    if (n.a >= 0) copy.a = importSubtree(other, n.a, paramMap);
    if (n.b >= 0) copy.b = importSubtree(other, n.b, paramMap);
    return addNode(copy);
}

Expression Expression::sum(Expression a, const Expression& b) {
    if (a.chart_ != b.chart_)
        throw std::invalid_argument("expression sum: charts differ");
    std::vector<int> paramMap(b.params_.size(), -1);
    int rb = a.importSubtree(b, b.root_, paramMap);
    a.root_ = a.addNode({Kind::Binary, 0.0, -1, {}, BinaryOp::Add, a.root_, rb});
    a.markUsage();
    return a;
}

Expression Expression::product(Expression a, const Expression& b) {
    if (a.chart_ != b.chart_)
        throw std::invalid_argument("expression product: charts differ");
    std::vector<int> paramMap(b.params_.size(), -1);
    int rb = a.importSubtree(b, b.root_, paramMap);
    a.root_ = a.addNode({Kind::Binary, 0.0, -1, {}, BinaryOp::Mul, a.root_, rb});
    a.markUsage();
    return a;
}

Expression Expression::scaled(double factor, Expression a) {
    if (factor == 1.0) return a;
    if (factor == -1.0) {
        a.root_ = a.addNode({Kind::Unary, 0.0, -1, UnaryOp::Neg, {}, a.root_, -1});
        return a;
    }
    int c = a.addNode({Kind::Constant, factor, -1, {}, {}, -1, -1});
    a.root_ = a.addNode({Kind::Binary, 0.0, -1, {}, BinaryOp::Mul, c, a.root_});
    return a;
}

void Expression::markUsage() {
    coordUsed_.assign(chart_.size(), false);
    for (const Node& n : nodes_)
        if (n.kind == Kind::Coordinate)
            coordUsed_[static_cast<std::size_t>(n.sym)] = true;
}

// ---------------------------------------------------------------------------
// Introspection and evaluation entry points
// ---------------------------------------------------------------------------

std::vector<std::string> Expression::freeCoordinates() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < chart_.size(); ++i)
        if (coordUsed_[i]) out.push_back(chart_[i]);
    return out;
}

std::set<std::string> Expression::freeParameters() const {
    return {params_.begin(), params_.end()};
}

std::vector<double> Expression::bindParameters(const std::map<std::string, double>& bindings) const {
    std::vector<double> out;
    out.reserve(params_.size());
    for (const auto& name : params_) {
        auto it = bindings.find(name);
        if (it == bindings.end())
            throw UnboundNameError("parameter '" + name + "' is not bound");
        out.push_back(it->second);
    }
    return out;
}

double Expression::eval(std::span<const double> coords, std::span<const double> params) const {
    return evalGeneric<double>(coords, params);
}

double Expression::evalAt(const Point& p) const {
    auto bound = bindParameters(p.parameters);
    return eval(p.coordinates, bound);
}

std::vector<double> Expression::gradient(std::span<const double> coords,
                                         std::span<const double> params) const {
    const std::size_t n = chart_.size();
    if (coords.size() != n)
        throw std::invalid_argument("gradient: coordinate vector has wrong dimension");
    std::vector<Dual<double>> duals(n);
    for (std::size_t i = 0; i < n; ++i) duals[i] = Dual<double>(coords[i], 0.0);

    std::vector<double> grad(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!coordUsed_[i]) continue;   // derivative is identically zero
        duals[i].d = 1.0;
        grad[i] = evalGeneric<Dual<double>>(duals, params).d;
        duals[i].d = 0.0;
    }
    return grad;
}

std::vector<double> Expression::gradientAt(const Point& p) const {
    auto bound = bindParameters(p.parameters);
    return gradient(p.coordinates, bound);
}

Expression::NodeView Expression::node(int id) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    return {static_cast<int>(n.kind), n.value, n.sym, n.uop, n.bop, n.a, n.b};
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace {
int precedenceOfUnary() { return 3; }
int precedenceOf(BinaryOp op) {
    switch (op) {
    case BinaryOp::Add: case BinaryOp::Sub: return 1;
    case BinaryOp::Mul: case BinaryOp::Div: return 2;
    case BinaryOp::Pow: return 4;
    }
    return 0;
}
const char* unaryName(UnaryOp op) {
    switch (op) {
    case UnaryOp::Neg: return "-";
    case UnaryOp::Sin: return "sin";
    case UnaryOp::Cos: return "cos";
    case UnaryOp::Tan: return "tan";
    case UnaryOp::Arctan: return "arctan";
    case UnaryOp::Exp: return "exp";
    case UnaryOp::Log: return "log";
    case UnaryOp::Sqrt: return "sqrt";
    }
    return "?";
}
} // namespace

std::string Expression::renderNode(int id) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    auto prec = [this](int nid) -> int {
        const Node& m = nodes_[static_cast<std::size_t>(nid)];
        switch (m.kind) {
        case Kind::Binary: return precedenceOf(m.bop);
        case Kind::Unary:  return m.uop == UnaryOp::Neg ? precedenceOfUnary() : 5;
        case Kind::Constant:
            // a bare negative literal reparses as unary minus
            return m.value < 0.0 ? precedenceOfUnary() : 5;
        default:           return 5;
        }
    };
    auto wrap = [this](int nid, bool parens) {
        std::string s = renderNode(nid);
        return parens ? "(" + s + ")" : s;
    };

    switch (n.kind) {
    case Kind::Constant:   return formatDouble(n.value);
    case Kind::Coordinate: return chart_[static_cast<std::size_t>(n.sym)];
    case Kind::Parameter:  return params_[static_cast<std::size_t>(n.sym)];
    case Kind::Unary:
        if (n.uop == UnaryOp::Neg)
            return "-" + wrap(n.a, prec(n.a) < precedenceOfUnary());
        return std::string(unaryName(n.uop)) + "(" + renderNode(n.a) + ")";
    case Kind::Binary: {
        int p = precedenceOf(n.bop);
        const char* opText = n.bop == BinaryOp::Add ? " + "
                           : n.bop == BinaryOp::Sub ? " - "
                           : n.bop == BinaryOp::Mul ? "*"
                           : n.bop == BinaryOp::Div ? "/" : "^";
        bool leftParens, rightParens;
        if (n.bop == BinaryOp::Pow) {
            leftParens = prec(n.a) <= p;   // right-associative
            rightParens = prec(n.b) < p;
        } else {
            leftParens = prec(n.a) < p;    // left-associative
            rightParens = prec(n.b) <= p;
        }
        return wrap(n.a, leftParens) + opText + wrap(n.b, rightParens);
    }
    }
    return "?";
}

std::string Expression::text() const { return renderNode(root_); }

} // namespace gmech::expr
