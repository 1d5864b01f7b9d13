#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace pdeonet::spectral {

// Closed-form scalar expressions over x1..x3 (spatial) and y1..yk (parameters).
// Grammar: + - * / ^int, unary minus, sin cos exp, pi, numbers, parentheses.
// `x` is accepted as an alias for x1.
class Expr {
public:
    struct Node;

    Expr();
    explicit Expr(double c);
    static Expr parse(std::string_view text);
    static Expr x(int axis);      // 0-based
    static Expr y(int index);     // 0-based

    double eval(std::span<const double> x, std::span<const double> y = {}) const;
    Expr dx(int axis) const;
    Expr dy(int index) const;
    // Replaces y_k by the given numbers.
    Expr bind(std::span<const double> y) const;

    bool is_constant() const;
    double constant_value() const;
    // Highest x-axis (1-based) and y-index (1-based) referenced, 0 if none.
    int max_x() const;
    int max_y() const;
    std::string str() const;

    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator/(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a);
    friend Expr pow(const Expr& a, int n);
    friend Expr sin(const Expr& a);
    friend Expr cos(const Expr& a);
    friend Expr exp(const Expr& a);

private:
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

} // namespace pdeonet::spectral
