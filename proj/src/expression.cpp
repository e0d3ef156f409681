#include "fracobs/expression.hpp"

#include "fracobs/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>

namespace fracobs {

namespace {

constexpr const char* kFn1[] = {"sin", "cos", "tan", "exp", "log", "sqrt", "abs", "tanh"};
constexpr const char* kFn2[] = {"min", "max", "pow"};

double apply1(int id, double a) {
    switch (id) {
        case 0: return std::sin(a);
        case 1: return std::cos(a);
        case 2: return std::tan(a);
        case 3: return std::exp(a);
        case 4: return std::log(a);
        case 5: return std::sqrt(a);
        case 6: return std::abs(a);
        default: return std::tanh(a);
    }
}

double apply2(int id, double a, double b) {
    switch (id) {
        case 0: return std::min(a, b);
        case 1: return std::max(a, b);
        default: return std::pow(a, b);
    }
}

}  // namespace

class ExpressionParser {
public:
    ExpressionParser(const std::string& text, const std::vector<std::string>& vars, Expression& out)
        : text_(text), vars_(vars), out_(out) {}

    void run() {
        expr();
        skip();
        if (pos_ != text_.size()) {
            fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        }
    }

private:
    const std::string& text_;
    const std::vector<std::string>& vars_;
    Expression& out_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw UsageError("expression \"" + text_ + "\": " + what + " at position " + std::to_string(pos_));
    }

    void skip() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    bool eat(char c) {
        skip();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void emit(Expression::Op op, double value = 0.0, int index = 0) { out_.code_.push_back({op, value, index}); }

    void expr() {
        term();
        for (;;) {
            if (eat('+')) {
                term();
                emit(Expression::Op::add);
            } else if (eat('-')) {
                term();
                emit(Expression::Op::sub);
            } else {
                return;
            }
        }
    }

    void term() {
        unary();
        for (;;) {
            if (eat('*')) {
                unary();
                emit(Expression::Op::mul);
            } else if (eat('/')) {
                unary();
                emit(Expression::Op::div);
            } else {
                return;
            }
        }
    }

    void unary() {
        if (eat('-')) {
            unary();
            emit(Expression::Op::neg);
        } else if (eat('+')) {
            unary();
        } else {
            power();
        }
    }

    void power() {
        primary();
        if (eat('^')) {
            unary();
            emit(Expression::Op::pow);
        }
    }

    void primary() {
        skip();
        if (pos_ >= text_.size()) {
            fail("unexpected end");
        }
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            expr();
            if (!eat(')')) {
                fail("expected ')'");
            }
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = text_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) {
                fail("bad number");
            }
            pos_ += static_cast<std::size_t>(end - begin);
            emit(Expression::Op::constant, v);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                ++pos_;
            }
            const std::string name = text_.substr(start, pos_ - start);
            for (std::size_t k = 0; k < vars_.size(); ++k) {
                if (vars_[k] == name) {
                    emit(Expression::Op::variable, 0.0, static_cast<int>(k));
                    return;
                }
            }
            if (name == "pi") {
                emit(Expression::Op::constant, std::numbers::pi);
                return;
            }
            if (name == "inf") {
                emit(Expression::Op::constant, std::numeric_limits<double>::infinity());
                return;
            }
            for (int id = 0; id < 8; ++id) {
                if (name == kFn1[id]) {
                    call(1, name);
                    emit(Expression::Op::fn1, 0.0, id);
                    return;
                }
            }
            for (int id = 0; id < 3; ++id) {
                if (name == kFn2[id]) {
                    call(2, name);
                    emit(Expression::Op::fn2, 0.0, id);
                    return;
                }
            }
            pos_ = start;
            fail("unknown name '" + name + "'");
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    void call(int args, const std::string& name) {
        if (!eat('(')) {
            fail("expected '(' after " + name);
        }
        for (int k = 0; k < args; ++k) {
            if (k > 0 && !eat(',')) {
                fail(name + " takes " + std::to_string(args) + " arguments");
            }
            expr();
        }
        if (!eat(')')) {
            fail(name + " takes " + std::to_string(args) + " argument" + (args > 1 ? "s" : ""));
        }
    }
};

Expression Expression::parse(const std::string& text, const std::vector<std::string>& variables) {
    Expression e;
    e.text_ = text;
    e.arity_ = variables.size();
    ExpressionParser(text, variables, e).run();
    return e;
}

double Expression::eval(const double* values) const {
    double stack[64];
    int top = 0;
    for (const Instr& in : code_) {
        switch (in.op) {
            case Op::constant: stack[top++] = in.value; break;
            case Op::variable: stack[top++] = values[in.index]; break;
            case Op::neg: stack[top - 1] = -stack[top - 1]; break;
            case Op::add: --top; stack[top - 1] += stack[top]; break;
            case Op::sub: --top; stack[top - 1] -= stack[top]; break;
            case Op::mul: --top; stack[top - 1] *= stack[top]; break;
            case Op::div: --top; stack[top - 1] /= stack[top]; break;
            case Op::pow: --top; stack[top - 1] = std::pow(stack[top - 1], stack[top]); break;
            case Op::fn1: stack[top - 1] = apply1(in.index, stack[top - 1]); break;
            case Op::fn2: --top; stack[top - 1] = apply2(in.index, stack[top - 1], stack[top]); break;
        }
        if (top >= 64) {
            throw UsageError("expression \"" + text_ + "\" is nested too deeply");
        }
    }
    return stack[0];
}

double Expression::operator()(const std::vector<double>& values) const {
    if (values.size() != arity_) {
        throw UsageError("expression \"" + text_ + "\" expects " + std::to_string(arity_) + " variables");
    }
    return eval(values.data());
}

double Expression::operator()(double x) const {
    if (arity_ != 1) {
        throw UsageError("expression \"" + text_ + "\" expects " + std::to_string(arity_) + " variables");
    }
    return eval(&x);
}

double Expression::operator()(double x, double y) const {
    if (arity_ != 2) {
        throw UsageError("expression \"" + text_ + "\" expects " + std::to_string(arity_) + " variables");
    }
    const double v[2] = {x, y};
    return eval(v);
}

}  // namespace fracobs
