#pragma once

#include <memory>
#include <string>

#include "mcf/geometry.hpp"

namespace mcf {

/// Small arithmetic language for boundary and initial data.
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := ('-' | '+') unary | power
///   power   := primary ('^' unary)?
///   primary := number | x1 | x2 | x3 | pi | '(' expr ')' | '|' expr '|'
///            | fn '(' expr (',' expr)* ')'
///
/// Functions: min, max (any arity >= 1), abs, sqrt, exp, log, sin, cos, tanh.
class Expression {
public:
    /// Throws mcf::Error with the column of the offending token.
    static Expression parse(const std::string& source);

    double operator()(const Point& x) const;
    const std::string& source() const { return source_; }

    struct Node;

private:
    std::string source_;
    std::shared_ptr<const Node> root_;
};

}  // namespace mcf
