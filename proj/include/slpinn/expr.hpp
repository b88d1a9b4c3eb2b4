#pragma once

// Restricted arithmetic expressions in x, y, t:
//   numbers, + - * / ^ (constant exponent), unary minus, parentheses,
//   sin cos exp sqrt, constant pi.
// Evaluation is generic over the scalar so expressions can be differentiated
// with Jet<double>.

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "slpinn/autodiff.hpp"
#include "slpinn/error.hpp"

namespace slpinn {

class Expression {
public:
    /// Throws ConfigError with the offending position on malformed input.
    static Expression parse(const std::string& text);

    const std::string& text() const { return text_; }

    /// Variables bound in order (x, y, t).
    template <class S>
    S evaluate(const S& x, const S& y, const S& t) const {
        return eval<S>(root_, x, y, t);
    }

    double operator()(double x, double y, double t) const { return evaluate<double>(x, y, t); }

    struct Node {
        enum Kind { Number, VarX, VarY, VarT, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Sqrt } kind;
        double number = 0.0;
        int lhs = -1;
        int rhs = -1;
    };

private:
    template <class S>
    S eval(int idx, const S& x, const S& y, const S& t) const {
        using std::cos;
        using std::exp;
        using std::sin;
        using std::sqrt;
        const Node& n = nodes_[idx];
        switch (n.kind) {
            case Node::Number: return S(n.number);
            case Node::VarX: return x;
            case Node::VarY: return y;
            case Node::VarT: return t;
            case Node::Neg: return S(0.0) - eval<S>(n.lhs, x, y, t);
            case Node::Add: return eval<S>(n.lhs, x, y, t) + eval<S>(n.rhs, x, y, t);
            case Node::Sub: return eval<S>(n.lhs, x, y, t) - eval<S>(n.rhs, x, y, t);
            case Node::Mul: return eval<S>(n.lhs, x, y, t) * eval<S>(n.rhs, x, y, t);
            case Node::Div: return eval<S>(n.lhs, x, y, t) / eval<S>(n.rhs, x, y, t);
            case Node::Pow: {
                const S base = eval<S>(n.lhs, x, y, t);
                const double p = n.number;
                if (p == std::floor(p) && p >= 0.0 && p <= 16.0) {
                    S acc = S(1.0);
                    for (int i = 0; i < static_cast<int>(p); ++i) acc = acc * base;
                    return acc;
                }
                using std::pow;
                return pow(base, p);
            }
            case Node::Sin: return sin(eval<S>(n.lhs, x, y, t));
            case Node::Cos: return cos(eval<S>(n.lhs, x, y, t));
            case Node::Exp: return exp(eval<S>(n.lhs, x, y, t));
            case Node::Sqrt: return sqrt(eval<S>(n.lhs, x, y, t));
        }
        return S(0.0);
    }

    friend class ExpressionParser;
    std::string text_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace slpinn
