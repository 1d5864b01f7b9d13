#include "pdeonet/spectral/expr.hpp"

#include "pdeonet/nn/errors.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pdeonet::spectral {

enum class Op { constant, var_x, var_y, add, sub, mul, div, neg, pow, sin, cos, exp };

struct Expr::Node {
    Op op;
    double c = 0.0;
    int k = 0;
    std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr, double c = 0.0, int k = 0)
{
    return std::make_shared<const Expr::Node>(Expr::Node{op, c, k, std::move(a), std::move(b)});
}

NodePtr num(double c) { return make(Op::constant, nullptr, nullptr, c); }

bool is_num(const NodePtr& n, double v) { return n->op == Op::constant && n->c == v; }
bool is_const(const NodePtr& n) { return n->op == Op::constant; }

double apply(Op op, double a, double b, int k)
{
    switch (op) {
    case Op::add: return a + b;
    case Op::sub: return a - b;
    case Op::mul: return a * b;
    case Op::div: return a / b;
    case Op::neg: return -a;
    case Op::pow: return std::pow(a, k);
    case Op::sin: return std::sin(a);
    case Op::cos: return std::cos(a);
    case Op::exp: return std::exp(a);
    default: return 0.0;
    }
}

// constructors with light simplification so derivatives stay small
NodePtr add(NodePtr a, NodePtr b)
{
    if (is_num(a, 0.0)) return b;
    if (is_num(b, 0.0)) return a;
    if (is_const(a) && is_const(b)) return num(a->c + b->c);
    return make(Op::add, std::move(a), std::move(b));
}

NodePtr neg(NodePtr a)
{
    if (is_const(a)) return num(-a->c);
    if (a->op == Op::neg) return a->a;
    return make(Op::neg, std::move(a));
}

NodePtr sub(NodePtr a, NodePtr b)
{
    if (is_num(b, 0.0)) return a;
    if (is_num(a, 0.0)) return neg(std::move(b));
    if (is_const(a) && is_const(b)) return num(a->c - b->c);
    return make(Op::sub, std::move(a), std::move(b));
}

NodePtr mul(NodePtr a, NodePtr b)
{
    if (is_num(a, 0.0) || is_num(b, 0.0)) return num(0.0);
    if (is_num(a, 1.0)) return b;
    if (is_num(b, 1.0)) return a;
    if (is_const(a) && is_const(b)) return num(a->c * b->c);
    return make(Op::mul, std::move(a), std::move(b));
}

NodePtr div(NodePtr a, NodePtr b)
{
    if (is_num(a, 0.0)) return num(0.0);
    if (is_num(b, 1.0)) return a;
    if (is_const(a) && is_const(b)) return num(a->c / b->c);
    return make(Op::div, std::move(a), std::move(b));
}

NodePtr powi(NodePtr a, int k)
{
    if (k == 0) return num(1.0);
    if (k == 1) return a;
    if (is_const(a)) return num(std::pow(a->c, k));
    return make(Op::pow, std::move(a), nullptr, 0.0, k);
}

NodePtr unary(Op op, NodePtr a)
{
    if (is_const(a)) return num(apply(op, a->c, 0.0, 0));
    return make(op, std::move(a));
}

double eval_node(const Expr::Node& n, std::span<const double> x, std::span<const double> y)
{
    switch (n.op) {
    case Op::constant: return n.c;
    case Op::var_x:
        if (static_cast<std::size_t>(n.k) >= x.size())
            throw ShapeError("expression uses x" + std::to_string(n.k + 1) + " beyond point dimension");
        return x[static_cast<std::size_t>(n.k)];
    case Op::var_y:
        if (static_cast<std::size_t>(n.k) >= y.size())
            throw ShapeError("expression uses unbound parameter y" + std::to_string(n.k + 1));
        return y[static_cast<std::size_t>(n.k)];
    case Op::add: return eval_node(*n.a, x, y) + eval_node(*n.b, x, y);
    case Op::sub: return eval_node(*n.a, x, y) - eval_node(*n.b, x, y);
    case Op::mul: return eval_node(*n.a, x, y) * eval_node(*n.b, x, y);
    case Op::div: return eval_node(*n.a, x, y) / eval_node(*n.b, x, y);
    default: return apply(n.op, eval_node(*n.a, x, y), 0.0, n.k);
    }
}

NodePtr diff(const NodePtr& n, Op var, int k)
{
    switch (n->op) {
    case Op::constant: return num(0.0);
    case Op::var_x:
    case Op::var_y: return num(n->op == var && n->k == k ? 1.0 : 0.0);
    case Op::add: return add(diff(n->a, var, k), diff(n->b, var, k));
    case Op::sub: return sub(diff(n->a, var, k), diff(n->b, var, k));
    case Op::neg: return neg(diff(n->a, var, k));
    case Op::mul:
        return add(mul(diff(n->a, var, k), n->b), mul(n->a, diff(n->b, var, k)));
    case Op::div: {
        // (a/b)' = a'/b - a b' / b^2
        auto da = diff(n->a, var, k);
        auto db = diff(n->b, var, k);
        return sub(div(da, n->b), div(mul(n->a, db), powi(n->b, 2)));
    }
    case Op::pow:
        return mul(mul(num(n->k), powi(n->a, n->k - 1)), diff(n->a, var, k));
    case Op::sin: return mul(unary(Op::cos, n->a), diff(n->a, var, k));
    case Op::cos: return mul(neg(unary(Op::sin, n->a)), diff(n->a, var, k));
    case Op::exp: return mul(n, diff(n->a, var, k));
    }
    return num(0.0);
}

NodePtr bind_node(const NodePtr& n, std::span<const double> y)
{
    switch (n->op) {
    case Op::constant:
    case Op::var_x: return n;
    case Op::var_y:
        if (static_cast<std::size_t>(n->k) < y.size())
            return num(y[static_cast<std::size_t>(n->k)]);
        return n;
    case Op::add: return add(bind_node(n->a, y), bind_node(n->b, y));
    case Op::sub: return sub(bind_node(n->a, y), bind_node(n->b, y));
    case Op::mul: return mul(bind_node(n->a, y), bind_node(n->b, y));
    case Op::div: return div(bind_node(n->a, y), bind_node(n->b, y));
    case Op::neg: return neg(bind_node(n->a, y));
    case Op::pow: return powi(bind_node(n->a, y), n->k);
    default: return unary(n->op, bind_node(n->a, y));
    }
}

int max_var(const NodePtr& n, Op var)
{
    if (!n) return 0;
    if (n->op == var) return n->k + 1;
    return std::max(max_var(n->a, var), max_var(n->b, var));
}

void print(std::ostream& os, const NodePtr& n)
{
    switch (n->op) {
    case Op::constant: {
        std::ostringstream s;
        s.precision(17);
        s << n->c;
        if (n->c < 0) os << '(' << s.str() << ')';
        else os << s.str();
        return;
    }
    case Op::var_x: os << 'x' << n->k + 1; return;
    case Op::var_y: os << 'y' << n->k + 1; return;
    case Op::add: os << '('; print(os, n->a); os << " + "; print(os, n->b); os << ')'; return;
    case Op::sub: os << '('; print(os, n->a); os << " - "; print(os, n->b); os << ')'; return;
    case Op::mul: os << '('; print(os, n->a); os << " * "; print(os, n->b); os << ')'; return;
    case Op::div: os << '('; print(os, n->a); os << " / "; print(os, n->b); os << ')'; return;
    case Op::neg: os << "(-"; print(os, n->a); os << ')'; return;
    case Op::pow: os << '('; print(os, n->a); os << ")^" << n->k; return;
    case Op::sin: os << "sin("; print(os, n->a); os << ')'; return;
    case Op::cos: os << "cos("; print(os, n->a); os << ')'; return;
    case Op::exp: os << "exp("; print(os, n->a); os << ')'; return;
    }
}

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    NodePtr run()
    {
        auto n = expression();
        skip();
        if (pos_ != s_.size())
            fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return n;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const
    {
        throw PreconditionError("expression \"" + std::string(s_) + "\" at " + std::to_string(pos_) +
                                ": " + msg);
    }

    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }

    bool accept(char c)
    {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expression()
    {
        auto n = term();
        for (;;) {
            if (accept('+')) n = add(n, term());
            else if (accept('-')) n = sub(n, term());
            else return n;
        }
    }

    NodePtr term()
    {
        auto n = unary_minus();
        for (;;) {
            if (accept('*')) n = mul(n, unary_minus());
            else if (accept('/')) n = div(n, unary_minus());
            else return n;
        }
    }

    NodePtr unary_minus()
    {
        if (accept('-')) return neg(unary_minus());
        if (accept('+')) return unary_minus();
        return power();
    }

    NodePtr power()
    {
        auto base = primary();
        if (!accept('^')) return base;
        skip();
        bool negative = accept('-');
        skip();
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
        if (start == pos_) fail("exponent must be an integer literal");
        int k = std::stoi(std::string(s_.substr(start, pos_ - start)));
        if (negative) return div(num(1.0), powi(base, k));
        return powi(base, k);
    }

    NodePtr primary()
    {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end");
        char c = s_[pos_];
        if (accept('(')) {
            auto n = expression();
            if (!accept(')')) fail("missing ')'");
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            double v = std::stod(std::string(s_.substr(pos_)), &used);
            pos_ += used;
            return num(v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_])))
                ++pos_;
            std::string name(s_.substr(start, pos_ - start));
            std::size_t dstart = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
                ++pos_;
            std::string digits(s_.substr(dstart, pos_ - dstart));
            if (name == "pi" && digits.empty()) return num(std::numbers::pi);
            if ((name == "x" || name == "y") && (digits.empty() ? name == "x" : true)) {
                int idx = digits.empty() ? 1 : std::stoi(digits);
                if (idx < 1) fail("variable index starts at 1");
                if (name == "x" && idx > 3) fail("only x1..x3 are supported");
                return make(name == "x" ? Op::var_x : Op::var_y, nullptr, nullptr, 0.0, idx - 1);
            }
            if (!digits.empty()) fail("unknown identifier " + name + digits);
            Op op;
            if (name == "sin") op = Op::sin;
            else if (name == "cos") op = Op::cos;
            else if (name == "exp") op = Op::exp;
            else fail("unknown identifier " + name);
            if (!accept('(')) fail("expected '(' after " + name);
            auto arg = expression();
            if (!accept(')')) fail("missing ')'");
            return unary(op, arg);
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }
};

} // namespace

Expr::Expr() : node_(num(0.0)) {}
Expr::Expr(double c) : node_(num(c)) {}

Expr Expr::parse(std::string_view text) { return Expr(Parser(text).run()); }
Expr Expr::x(int axis) { return Expr(make(Op::var_x, nullptr, nullptr, 0.0, axis)); }
Expr Expr::y(int index) { return Expr(make(Op::var_y, nullptr, nullptr, 0.0, index)); }

double Expr::eval(std::span<const double> x, std::span<const double> y) const
{
    return eval_node(*node_, x, y);
}

Expr Expr::dx(int axis) const { return Expr(diff(node_, Op::var_x, axis)); }
Expr Expr::dy(int index) const { return Expr(diff(node_, Op::var_y, index)); }
Expr Expr::bind(std::span<const double> y) const { return Expr(bind_node(node_, y)); }

bool Expr::is_constant() const { return node_->op == Op::constant; }
double Expr::constant_value() const
{
    if (!is_constant())
        throw PreconditionError("expression is not constant: " + str());
    return node_->c;
}

int Expr::max_x() const { return max_var(node_, Op::var_x); }
int Expr::max_y() const { return max_var(node_, Op::var_y); }

std::string Expr::str() const
{
    std::ostringstream os;
    print(os, node_);
    return os.str();
}

Expr operator+(const Expr& a, const Expr& b) { return Expr(add(a.node_, b.node_)); }
Expr operator-(const Expr& a, const Expr& b) { return Expr(sub(a.node_, b.node_)); }
Expr operator*(const Expr& a, const Expr& b) { return Expr(mul(a.node_, b.node_)); }
Expr operator/(const Expr& a, const Expr& b) { return Expr(div(a.node_, b.node_)); }
Expr operator-(const Expr& a) { return Expr(neg(a.node_)); }
Expr pow(const Expr& a, int n) { return Expr(powi(a.node_, n)); }
Expr sin(const Expr& a) { return Expr(unary(Op::sin, a.node_)); }
Expr cos(const Expr& a) { return Expr(unary(Op::cos, a.node_)); }
Expr exp(const Expr& a) { return Expr(unary(Op::exp, a.node_)); }

} // namespace pdeonet::spectral
