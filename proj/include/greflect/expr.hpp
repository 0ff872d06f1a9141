#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "greflect/rgsde.hpp"

namespace greflect {

struct parse_error : std::runtime_error {
    parse_error(const std::string& what, int line, int column)
        : std::runtime_error(what), line(line), column(column) {}
    int line;
    int column;
};

namespace expr {

enum class NodeKind { Literal, Variable, Negate, Add, Sub, Mul, Div, Call };
enum class Func { Sin, Cos, Exp, Tanh, Abs, Min, Max, Sqrt };

// Variable indices: 0 = t, 1 = x, 2 = b, 3 = qv.
struct Node {
    NodeKind kind = NodeKind::Literal;
    double literal = 0.0;
    int variable = 0;
    Func func = Func::Sin;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

using NodePtr = std::shared_ptr<const Node>;

NodePtr literal(double v);
NodePtr variable(int index);
NodePtr negate(NodePtr a);
NodePtr binary(NodeKind kind, NodePtr a, NodePtr b);
NodePtr call(Func f, NodePtr a, NodePtr b = nullptr);

/// Direct recursive interpretation; division by an exact zero throws.
double eval(const Node& node, double t, double x, double b, double qv);

/// Renders with minimal parentheses under the grammar's precedence.
std::string render(const Node& node);

}  // namespace expr

/// Parsed coefficient expression over {t, x, b, qv} with its declared
/// Lipschitz bound in x.
class CoefficientExpr {
  public:
    CoefficientExpr() = default;
    CoefficientExpr(std::string source, expr::NodePtr root, double lipschitz_bound);

    double eval(double t, double x, double b, double qv) const;
    const std::string& source() const { return source_; }
    double lipschitz_bound() const { return lipschitz_bound_; }
    const expr::Node& root() const { return *root_; }

    /// Bitmask of referenced variables (bit i set = variable i used).
    unsigned variable_mask() const { return mask_; }
    bool uses(int variable) const { return (mask_ >> variable) & 1u; }

    Coefficient to_coefficient() const;

  private:
    std::string source_;
    expr::NodePtr root_;
    double lipschitz_bound_ = 0.0;
    unsigned mask_ = 0;
};

/// Recursive-descent parse with standard precedence (unary minus > * / >
/// + -), left associativity and parentheses. Errors carry line/column.
CoefficientExpr parse_coefficient_expr(const std::string& text, double lipschitz_bound = 0.0);

}  // namespace greflect
