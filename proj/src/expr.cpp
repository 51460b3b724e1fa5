#include "fracwave/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "fracwave/errors.hpp"

namespace fracwave::expr {

struct Expr::Node {
    enum Kind { kConst, kX, kY, kT, kAdd, kSub, kMul, kDiv, kPow, kNeg, kSin, kCos, kExp };
    Kind kind;
    double value = 0.0;
    std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make(Expr::Node::Kind k, NodePtr a = nullptr, NodePtr b = nullptr, double v = 0.0) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = k;
    n->value = v;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

class Parser {
  public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr run() {
        NodePtr n = sum();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return n;
    }

  private:
    const std::string& s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("expression \"" + s_ + "\": " + what + " at position " +
                          std::to_string(pos_));
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }
    bool accept(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    NodePtr sum() {
        NodePtr n = product();
        for (;;) {
            if (accept('+')) {
                n = make(Expr::Node::kAdd, n, product());
            } else if (accept('-')) {
                n = make(Expr::Node::kSub, n, product());
            } else {
                return n;
            }
        }
    }

    NodePtr product() {
        NodePtr n = power();
        for (;;) {
            if (accept('*')) {
                n = make(Expr::Node::kMul, n, power());
            } else if (accept('/')) {
                n = make(Expr::Node::kDiv, n, power());
            } else {
                return n;
            }
        }
    }

    NodePtr power() {
        NodePtr n = unary();
        if (accept('^')) n = make(Expr::Node::kPow, n, power());
        return n;
    }

    NodePtr unary() {
        if (accept('-')) return make(Expr::Node::kNeg, unary());
        return atom();
    }

    NodePtr atom() {
        char c = peek();
        if (c == '(') {
            ++pos_;
            NodePtr n = sum();
            expect(')');
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return ident();
        fail("expected a number, name or '('");
    }

    NodePtr number() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) {
            ++pos_;
        }
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t mark = pos_++;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
                    ++pos_;
            } else {
                pos_ = mark;  // the 'e' was not an exponent
            }
        }
        const std::string text = s_.substr(start, pos_ - start);
        char* end = nullptr;
        double v = std::strtod(text.c_str(), &end);
        if (end == text.c_str() || *end != '\0') fail("malformed number \"" + text + "\"");
        return make(Expr::Node::kConst, nullptr, nullptr, v);
    }

    NodePtr ident() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        const std::string name = s_.substr(start, pos_ - start);
        if (name == "pi") return make(Expr::Node::kConst, nullptr, nullptr, std::numbers::pi);
        if (name == "x") return make(Expr::Node::kX);
        if (name == "y") return make(Expr::Node::kY);
        if (name == "t") return make(Expr::Node::kT);
        Expr::Node::Kind k;
        if (name == "sin") {
            k = Expr::Node::kSin;
        } else if (name == "cos") {
            k = Expr::Node::kCos;
        } else if (name == "exp") {
            k = Expr::Node::kExp;
        } else {
            pos_ = start;
            fail("unknown name \"" + name + "\"");
        }
        expect('(');
        NodePtr arg = sum();
        expect(')');
        return make(k, arg);
    }
};

double eval(const Expr::Node* n, double x, double y, double t) {
    switch (n->kind) {
        case Expr::Node::kConst: return n->value;
        case Expr::Node::kX: return x;
        case Expr::Node::kY: return y;
        case Expr::Node::kT: return t;
        case Expr::Node::kAdd: return eval(n->a.get(), x, y, t) + eval(n->b.get(), x, y, t);
        case Expr::Node::kSub: return eval(n->a.get(), x, y, t) - eval(n->b.get(), x, y, t);
        case Expr::Node::kMul: return eval(n->a.get(), x, y, t) * eval(n->b.get(), x, y, t);
        case Expr::Node::kDiv: return eval(n->a.get(), x, y, t) / eval(n->b.get(), x, y, t);
        case Expr::Node::kPow:
            return std::pow(eval(n->a.get(), x, y, t), eval(n->b.get(), x, y, t));
        case Expr::Node::kNeg: return -eval(n->a.get(), x, y, t);
        case Expr::Node::kSin: return std::sin(eval(n->a.get(), x, y, t));
        case Expr::Node::kCos: return std::cos(eval(n->a.get(), x, y, t));
        case Expr::Node::kExp: return std::exp(eval(n->a.get(), x, y, t));
    }
    return 0.0;
}

}  // namespace

double Expr::operator()(double x, double y, double t) const {
    if (!root_) throw ConfigError("evaluating an empty expression");
    return eval(root_.get(), x, y, t);
}

Expr Expr::parse(const std::string& src) {
    Expr e;
    e.src_ = src;
    e.root_ = Parser(src).run();
    return e;
}

}  // namespace fracwave::expr
