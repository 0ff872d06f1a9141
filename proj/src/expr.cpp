#include "greflect/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <vector>

namespace greflect {

namespace expr {

NodePtr literal(double v) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Literal;
    n->literal = v;
    return n;
}

NodePtr variable(int index) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Variable;
    n->variable = index;
    return n;
}

NodePtr negate(NodePtr a) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Negate;
    n->lhs = std::move(a);
    return n;
}

NodePtr binary(NodeKind kind, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
}

NodePtr call(Func f, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Call;
    n->func = f;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
}

double eval(const Node& node, double t, double x, double b, double qv) {
    switch (node.kind) {
        case NodeKind::Literal:
            return node.literal;
        case NodeKind::Variable:
            switch (node.variable) {
                case 0: return t;
                case 1: return x;
                case 2: return b;
                default: return qv;
            }
        case NodeKind::Negate:
            return -eval(*node.lhs, t, x, b, qv);
        case NodeKind::Add:
            return eval(*node.lhs, t, x, b, qv) + eval(*node.rhs, t, x, b, qv);
        case NodeKind::Sub:
            return eval(*node.lhs, t, x, b, qv) - eval(*node.rhs, t, x, b, qv);
        case NodeKind::Mul:
            return eval(*node.lhs, t, x, b, qv) * eval(*node.rhs, t, x, b, qv);
        case NodeKind::Div: {
            const double denom = eval(*node.rhs, t, x, b, qv);
            if (denom == 0.0) throw numeric_error("division by zero in expression");
            return eval(*node.lhs, t, x, b, qv) / denom;
        }
        case NodeKind::Call: {
            const double a = eval(*node.lhs, t, x, b, qv);
            switch (node.func) {
                case Func::Sin: return std::sin(a);
                case Func::Cos: return std::cos(a);
                case Func::Exp: return std::exp(a);
                case Func::Tanh: return std::tanh(a);
                case Func::Abs: return std::abs(a);
                case Func::Sqrt: return std::sqrt(a);
                case Func::Min: return std::min(a, eval(*node.rhs, t, x, b, qv));
                case Func::Max: return std::max(a, eval(*node.rhs, t, x, b, qv));
            }
            return a;
        }
    }
    return 0.0;
}

namespace {

constexpr std::array<const char*, 4> kVariables = {"t", "x", "b", "qv"};
constexpr std::array<const char*, 8> kFuncNames = {"sin", "cos",  "exp", "tanh",
                                                   "abs", "sqrt", "min", "max"};
constexpr std::array<Func, 8> kFuncIds = {Func::Sin, Func::Cos,  Func::Exp, Func::Tanh,
                                          Func::Abs, Func::Sqrt, Func::Min, Func::Max};

int precedence(const Node& n) {
    switch (n.kind) {
        case NodeKind::Add:
        case NodeKind::Sub: return 1;
        case NodeKind::Mul:
        case NodeKind::Div: return 2;
        case NodeKind::Negate: return 3;
        default: return 4;
    }
}

std::string render_child(const Node& child, int parent_prec, bool is_right) {
    std::string s = render(child);
    const int cp = precedence(child);
    if (cp < parent_prec || (cp == parent_prec && is_right)) return "(" + s + ")";
    return s;
}

}  // namespace

std::string render(const Node& node) {
    switch (node.kind) {
        case NodeKind::Literal: return format_double(node.literal);
        case NodeKind::Variable: return kVariables[static_cast<std::size_t>(node.variable)];
        case NodeKind::Negate: return "-" + render_child(*node.lhs, 3, true);
        case NodeKind::Add:
            return render_child(*node.lhs, 1, false) + " + " + render_child(*node.rhs, 1, true);
        case NodeKind::Sub:
            return render_child(*node.lhs, 1, false) + " - " + render_child(*node.rhs, 1, true);
        case NodeKind::Mul:
            return render_child(*node.lhs, 2, false) + "*" + render_child(*node.rhs, 2, true);
        case NodeKind::Div:
            return render_child(*node.lhs, 2, false) + "/" + render_child(*node.rhs, 2, true);
        case NodeKind::Call: {
            for (std::size_t i = 0; i < kFuncIds.size(); ++i) {
                if (kFuncIds[i] == node.func) {
                    std::string s = std::string(kFuncNames[i]) + "(" + render(*node.lhs);
                    if (node.rhs) s += ", " + render(*node.rhs);
                    return s + ")";
                }
            }
            return "?";
        }
    }
    return "?";
}

}  // namespace expr

namespace {

struct Token {
    enum class Kind { Number, Ident, Plus, Minus, Star, Slash, LParen, RParen, Comma, End };
    Kind kind;
    double number = 0.0;
    std::string text;
    int line = 1;
    int column = 1;
};

class Lexer {
  public:
    explicit Lexer(const std::string& src) : src_(src) {}

    Token next() {
        skip_space();
        Token tok;
        tok.line = line_;
        tok.column = column_;
        if (pos_ >= src_.size()) {
            tok.kind = Token::Kind::End;
            return tok;
        }
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = src_.data() + pos_;
            const char* end = src_.data() + src_.size();
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(begin, end, value);
            if (ec != std::errc{})
                throw parse_error("malformed number", line_, column_);
            advance(static_cast<std::size_t>(ptr - begin));
            tok.kind = Token::Kind::Number;
            tok.number = value;
            return tok;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t len = 0;
            while (pos_ + len < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_ + len])) ||
                    src_[pos_ + len] == '_'))
                ++len;
            tok.kind = Token::Kind::Ident;
            tok.text = src_.substr(pos_, len);
            advance(len);
            return tok;
        }
        switch (c) {
            case '+': tok.kind = Token::Kind::Plus; break;
            case '-': tok.kind = Token::Kind::Minus; break;
            case '*': tok.kind = Token::Kind::Star; break;
            case '/': tok.kind = Token::Kind::Slash; break;
            case '(': tok.kind = Token::Kind::LParen; break;
            case ')': tok.kind = Token::Kind::RParen; break;
            case ',': tok.kind = Token::Kind::Comma; break;
            default:
                throw parse_error(std::string("unexpected character '") + c + "'", line_, column_);
        }
        advance(1);
        return tok;
    }

  private:
    void skip_space() {
        while (pos_ < src_.size() &&
               std::isspace(static_cast<unsigned char>(src_[pos_])))
            advance(1);
    }
    void advance(std::size_t n) {
        for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i, ++pos_) {
            if (src_[pos_] == '\n') {
                ++line_;
                column_ = 1;
            } else {
                ++column_;
            }
        }
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
};

class Parser {
  public:
    explicit Parser(const std::string& src) : lexer_(src) { shift(); }

    expr::NodePtr parse() {
        expr::NodePtr root = expression();
        if (current_.kind != Token::Kind::End)
            throw parse_error("trailing input after expression", current_.line, current_.column);
        return root;
    }

  private:
    void shift() { current_ = lexer_.next(); }

    expr::NodePtr expression() {
        expr::NodePtr lhs = term();
        while (current_.kind == Token::Kind::Plus || current_.kind == Token::Kind::Minus) {
            const bool add = current_.kind == Token::Kind::Plus;
            shift();
            lhs = expr::binary(add ? expr::NodeKind::Add : expr::NodeKind::Sub, lhs, term());
        }
        return lhs;
    }

    expr::NodePtr term() {
        expr::NodePtr lhs = factor();
        while (current_.kind == Token::Kind::Star || current_.kind == Token::Kind::Slash) {
            const bool mul = current_.kind == Token::Kind::Star;
            shift();
            lhs = expr::binary(mul ? expr::NodeKind::Mul : expr::NodeKind::Div, lhs, factor());
        }
        return lhs;
    }

    // Unary minus binds tighter than * and /: -2*x is (-2)*x.
    expr::NodePtr factor() {
        if (current_.kind == Token::Kind::Minus) {
            shift();
            return expr::negate(factor());
        }
        return primary();
    }

    expr::NodePtr primary() {
        const Token tok = current_;
        switch (tok.kind) {
            case Token::Kind::Number:
                shift();
                return expr::literal(tok.number);
            case Token::Kind::LParen: {
                shift();
                expr::NodePtr inner = expression();
                expect_rparen(tok);
                return inner;
            }
            case Token::Kind::Ident:
                shift();
                return ident(tok);
            case Token::Kind::End:
                throw parse_error("unexpected end of input", tok.line, tok.column);
            default:
                throw parse_error("expected a value", tok.line, tok.column);
        }
    }

    expr::NodePtr ident(const Token& tok) {
        for (std::size_t i = 0; i < expr::kVariables.size(); ++i) {
            if (tok.text == expr::kVariables[i]) return expr::variable(static_cast<int>(i));
        }
        for (std::size_t i = 0; i < expr::kFuncNames.size(); ++i) {
            if (tok.text != expr::kFuncNames[i]) continue;
            const expr::Func f = expr::kFuncIds[i];
            const bool binary_fn = f == expr::Func::Min || f == expr::Func::Max;
            if (current_.kind != Token::Kind::LParen)
                throw parse_error("function '" + tok.text + "' requires arguments",
                                  current_.line, current_.column);
            shift();
            expr::NodePtr a = expression();
            expr::NodePtr b;
            if (binary_fn) {
                if (current_.kind != Token::Kind::Comma)
                    throw parse_error("function '" + tok.text + "' takes two arguments",
                                      current_.line, current_.column);
                shift();
                b = expression();
            } else if (current_.kind == Token::Kind::Comma) {
                throw parse_error("function '" + tok.text + "' takes one argument",
                                  current_.line, current_.column);
            }
            expect_rparen(tok);
            return expr::call(f, a, b);
        }
        throw parse_error("unknown identifier '" + tok.text + "'", tok.line, tok.column);
    }

    void expect_rparen(const Token& open) {
        if (current_.kind != Token::Kind::RParen)
            throw parse_error("expected ')'", current_.line, current_.column);
        shift();
        (void)open;
    }

    Lexer lexer_;
    Token current_;
};

unsigned collect_mask(const expr::Node& node) {
    unsigned mask = 0;
    if (node.kind == expr::NodeKind::Variable) mask |= 1u << node.variable;
    if (node.lhs) mask |= collect_mask(*node.lhs);
    if (node.rhs) mask |= collect_mask(*node.rhs);
    return mask;
}

}  // namespace

CoefficientExpr::CoefficientExpr(std::string source, expr::NodePtr root, double lipschitz_bound)
    : source_(std::move(source)), root_(std::move(root)), lipschitz_bound_(lipschitz_bound) {
    mask_ = collect_mask(*root_);
}

double CoefficientExpr::eval(double t, double x, double b, double qv) const {
    return expr::eval(*root_, t, x, b, qv);
}

Coefficient CoefficientExpr::to_coefficient() const {
    const expr::NodePtr root = root_;
    return Coefficient::make(
        [root](double t, double x, double b, double qv) {
            return expr::eval(*root, t, x, b, qv);
        },
        lipschitz_bound_, source_);
}

CoefficientExpr parse_coefficient_expr(const std::string& text, double lipschitz_bound) {
    Parser parser(text);
    return CoefficientExpr(text, parser.parse(), lipschitz_bound);
}

}  // namespace greflect
