#include "mcf/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <vector>

namespace mcf {

struct Expression::Node {
    enum class Op { Number, Var, Neg, Add, Sub, Mul, Div, Pow, Call } op;
    double value = 0.0;
    int var = 0;
    std::string fn;
    std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

NodePtr make(Op op, std::vector<NodePtr> args = {}) {
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->args = std::move(args);
    return n;
}

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr parse() {
        NodePtr e = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected character");
        return e;
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        std::ostringstream os;
        os << "expression error at column " << pos_ + 1 << ": " << what << " in \"" << s_ << "\"";
        throw Error(os.str());
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

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+')) lhs = make(Op::Add, {lhs, term()});
            else if (accept('-')) lhs = make(Op::Sub, {lhs, term()});
            else return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*')) lhs = make(Op::Mul, {lhs, unary()});
            else if (accept('/')) lhs = make(Op::Div, {lhs, unary()});
            else return lhs;
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(Op::Neg, {unary()});
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (accept('^')) return make(Op::Pow, {base, unary()});
        return base;
    }

    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (accept('(')) {
            NodePtr e = expr();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        if (accept('|')) {
            NodePtr e = expr();
            if (!accept('|')) fail("expected closing '|'");
            auto n = make(Op::Call, {e});
            std::const_pointer_cast<Expression::Node>(n)->fn = "abs";
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) fail("malformed number");
            pos_ += static_cast<std::size_t>(end - begin);
            auto n = std::make_shared<Expression::Node>();
            n->op = Op::Number;
            n->value = v;
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            const std::string name = s_.substr(start, pos_ - start);
            if (name == "x1" || name == "x2" || name == "x3") {
                auto n = std::make_shared<Expression::Node>();
                n->op = Op::Var;
                n->var = name[1] - '1';
                return n;
            }
            if (name == "pi") {
                auto n = std::make_shared<Expression::Node>();
                n->op = Op::Number;
                n->value = std::numbers::pi;
                return n;
            }
            static const char* kFunctions[] = {"min", "max", "abs", "sqrt", "exp", "log", "sin", "cos", "tanh"};
            bool known = false;
            for (const char* f : kFunctions) known = known || name == f;
            if (!known) {
                pos_ = start;
                fail("unknown identifier '" + name + "'");
            }
            if (!accept('(')) fail("expected '(' after " + name);
            std::vector<NodePtr> args{expr()};
            while (accept(',')) args.push_back(expr());
            if (!accept(')')) fail("expected ')'");
            const bool variadic = name == "min" || name == "max";
            if (!variadic && args.size() != 1) fail(name + " takes one argument");
            auto n = make(Op::Call, std::move(args));
            std::const_pointer_cast<Expression::Node>(n)->fn = name;
            return n;
        }
        fail(std::string("unexpected '") + c + "'");
    }
};

double eval(const Expression::Node& n, const Point& x) {
    switch (n.op) {
        case Op::Number: return n.value;
        case Op::Var: return x[static_cast<std::size_t>(n.var)];
        case Op::Neg: return -eval(*n.args[0], x);
        case Op::Add: return eval(*n.args[0], x) + eval(*n.args[1], x);
        case Op::Sub: return eval(*n.args[0], x) - eval(*n.args[1], x);
        case Op::Mul: return eval(*n.args[0], x) * eval(*n.args[1], x);
        case Op::Div: return eval(*n.args[0], x) / eval(*n.args[1], x);
        case Op::Pow: {
            const double b = eval(*n.args[0], x);
            const double e = eval(*n.args[1], x);
            // Small integer powers by repeated multiplication keep polynomial
            // data exact.
            if (e == std::round(e) && std::abs(e) <= 8.0) {
                double r = 1.0;
                for (int i = 0; i < static_cast<int>(std::abs(e)); ++i) r *= b;
                return e < 0 ? 1.0 / r : r;
            }
            return std::pow(b, e);
        }
        case Op::Call: {
            const std::string& f = n.fn;
            const double a = eval(*n.args[0], x);
            if (f == "min" || f == "max") {
                double r = a;
                for (std::size_t i = 1; i < n.args.size(); ++i) {
                    const double v = eval(*n.args[i], x);
                    r = (f == "min") ? std::min(r, v) : std::max(r, v);
                }
                return r;
            }
            if (f == "abs") return std::abs(a);
            if (f == "sqrt") return std::sqrt(a);
            if (f == "exp") return std::exp(a);
            if (f == "log") return std::log(a);
            if (f == "sin") return std::sin(a);
            if (f == "cos") return std::cos(a);
            if (f == "tanh") return std::tanh(a);
            return a;
        }
    }
    return 0.0;
}

}  // namespace

Expression Expression::parse(const std::string& source) {
    Expression e;
    e.source_ = source;
    e.root_ = Parser(source).parse();
    return e;
}

double Expression::operator()(const Point& x) const { return eval(*root_, x); }

}  // namespace mcf
