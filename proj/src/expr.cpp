#include "slpinn/expr.hpp"

#include <cctype>
#include <cstdlib>
#include <numbers>

namespace slpinn {

class ExpressionParser {
public:
    explicit ExpressionParser(const std::string& s) : s_(s) {}

    Expression run() {
        Expression e;
        e.text_ = s_;
        out_ = &e;
        e.root_ = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected character");
        return e;
    }

private:
    using Node = Expression::Node;

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("expression '" + s_ + "': " + what + " at position " + std::to_string(pos_));
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    int add(Node n) {
        out_->nodes_.push_back(n);
        return static_cast<int>(out_->nodes_.size()) - 1;
    }
    int binary(Node::Kind k, int l, int r) { return add(Node{k, 0.0, l, r}); }

    int expr() {
        int l = term();
        for (;;) {
            if (accept('+')) {
                l = binary(Node::Add, l, term());
            } else if (accept('-')) {
                l = binary(Node::Sub, l, term());
            } else {
                return l;
            }
        }
    }
    int term() {
        int l = unary();
        for (;;) {
            if (accept('*')) {
                l = binary(Node::Mul, l, unary());
            } else if (accept('/')) {
                l = binary(Node::Div, l, unary());
            } else {
                return l;
            }
        }
    }
    int unary() {
        if (accept('-')) return add(Node{Node::Neg, 0.0, unary(), -1});
        if (accept('+')) return unary();
        return power();
    }
    bool constant(int idx) const {
        const Node& n = out_->nodes_[idx];
        if (n.kind == Node::VarX || n.kind == Node::VarY || n.kind == Node::VarT) return false;
        if (n.lhs >= 0 && !constant(n.lhs)) return false;
        if (n.rhs >= 0 && !constant(n.rhs)) return false;
        return true;
    }
    int power() {
        const int base = primary();
        if (!accept('^')) return base;
        const int ex = unary();
        if (!constant(ex)) fail("exponent must be a constant");
        Expression tmp;
        tmp.nodes_ = out_->nodes_;
        tmp.root_ = ex;
        const double p = tmp.evaluate<double>(0.0, 0.0, 0.0);
        return add(Node{Node::Pow, p, base, -1});
    }
    int primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end");
        const char c = s_[pos_];
        if (accept('(')) {
            const int e = expr();
            if (!accept(')')) fail("missing ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) fail("bad number");
            pos_ += static_cast<std::size_t>(end - begin);
            return add(Node{Node::Number, v, -1, -1});
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            const std::string id = s_.substr(start, pos_ - start);
            if (id == "x") return add(Node{Node::VarX});
            if (id == "y") return add(Node{Node::VarY});
            if (id == "t") return add(Node{Node::VarT});
            if (id == "pi") return add(Node{Node::Number, std::numbers::pi, -1, -1});
            Node::Kind k;
            if (id == "sin") {
                k = Node::Sin;
            } else if (id == "cos") {
                k = Node::Cos;
            } else if (id == "exp") {
                k = Node::Exp;
            } else if (id == "sqrt") {
                k = Node::Sqrt;
            } else {
                pos_ = start;
                fail("unknown identifier '" + id + "'");
            }
            if (!accept('(')) fail("expected '(' after " + id);
            const int arg = expr();
            if (!accept(')')) fail("missing ')'");
            return add(Node{k, 0.0, arg, -1});
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
    Expression* out_ = nullptr;
};

Expression Expression::parse(const std::string& text) { return ExpressionParser(text).run(); }

}  // namespace slpinn
