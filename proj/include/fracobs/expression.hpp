#pragma once

#include <string>
#include <vector>

namespace fracobs {

/// Arithmetic expression over named variables.
///
/// Grammar:
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := ('-' | '+') unary | power
///   power   := primary ('^' unary)?
///   primary := number | constant | variable | func '(' expr (',' expr)* ')' | '(' expr ')'
/// Constants: pi, inf. One-argument functions: sin cos tan exp log sqrt abs tanh.
/// Two-argument functions: min max pow.
class Expression {
public:
    /// Throws UsageError with the offending position on a syntax error or unknown name.
    static Expression parse(const std::string& text, const std::vector<std::string>& variables = {"x"});

    double operator()(const std::vector<double>& values) const;
    double operator()(double x) const;
    double operator()(double x, double y) const;

    const std::string& text() const { return text_; }

private:
    enum class Op { constant, variable, neg, add, sub, mul, div, pow, fn1, fn2 };
    struct Instr {
        Op op;
        double value = 0.0;
        int index = 0;  // variable slot or function id
    };

    std::string text_;
    std::size_t arity_ = 0;
    std::vector<Instr> code_;

    double eval(const double* values) const;
    friend class ExpressionParser;
};

}  // namespace fracobs
