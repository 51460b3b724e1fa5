#pragma once

#include <memory>
#include <string>

namespace fracwave::expr {

/// A parsed closed-form expression in the variables x, y and t.
///
/// Grammar (precedence low to high):
///   sum     := product (('+' | '-') product)*
///   product := power (('*' | '/') power)*
///   power   := unary ('^' power)?                  (right-associative)
///   unary   := '-' unary | atom
///   atom    := number | 'pi' | 'x' | 'y' | 't'
///            | ('sin' | 'cos' | 'exp') '(' sum ')' | '(' sum ')'
///
/// Numbers are plain decimal literals with an optional exponent part.  parse()
/// throws ConfigError with the offending position on malformed input.
class Expr {
  public:
    Expr() = default;

    /// Evaluates with the given variable bindings.
    double operator()(double x, double y, double t) const;

    double at_x(double x) const { return (*this)(x, 0.0, 0.0); }
    double at_xy(double x, double y) const { return (*this)(x, y, 0.0); }
    double at_t(double t) const { return (*this)(0.0, 0.0, t); }

    bool empty() const { return root_ == nullptr; }
    const std::string& source() const { return src_; }

    static Expr parse(const std::string& src);

    struct Node;

  private:
    std::shared_ptr<const Node> root_;
    std::string src_;
};

}  // namespace fracwave::expr
