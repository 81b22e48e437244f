#include "rider/scenario/guard.hpp"

#include <cctype>
#include <charconv>
#include <variant>

namespace rider::scenario {

struct Guard::Node {
  enum class Kind { number, path, neg, lnot, add, sub, mul, div, lt, le, gt, ge, eq, ne, land, lor };
  Kind kind = Kind::number;
  double number = 0.0;
  std::string path;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using Node = Guard::Node;
using NodePtr = std::shared_ptr<const Node>;

struct Token {
  enum class Type { number, ident, op, lparen, rparen, end } type = Type::end;
  std::string text;
  double number = 0.0;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(s.data() + i, s.data() + s.size(), v);
      if (ec != std::errc{}) throw GuardSyntaxError("bad number at offset " + std::to_string(i));
      const auto len = static_cast<std::size_t>(ptr - (s.data() + i));
      out.push_back({Token::Type::number, std::string(s.substr(i, len)), v});
      i += len;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i + 1;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' ||
                              s[j] == '.' || s[j] == '-'))
        ++j;
      out.push_back({Token::Type::ident, std::string(s.substr(i, j - i)), 0.0});
      i = j;
      continue;
    }
    if (c == '(') {
      out.push_back({Token::Type::lparen, "(", 0.0});
      ++i;
      continue;
    }
    if (c == ')') {
      out.push_back({Token::Type::rparen, ")", 0.0});
      ++i;
      continue;
    }
    static constexpr std::string_view two[] = {"<=", ">=", "==", "!=", "&&", "||"};
    bool matched = false;
    for (auto op : two) {
      if (s.substr(i, 2) == op) {
        out.push_back({Token::Type::op, std::string(op), 0.0});
        i += 2;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::string_view("<>+-*/!").find(c) != std::string_view::npos) {
      out.push_back({Token::Type::op, std::string(1, c), 0.0});
      ++i;
      continue;
    }
    throw GuardSyntaxError(std::string("unexpected character '") + c + "' at offset " + std::to_string(i));
  }
  out.push_back({Token::Type::end, "", 0.0});
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::vector<std::string>& paths)
      : tokens_(std::move(tokens)), paths_(paths) {}

  NodePtr parse() {
    auto n = parse_or();
    if (peek().type != Token::Type::end) throw GuardSyntaxError("trailing input near '" + peek().text + "'");
    return n;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  bool accept_op(std::string_view op) {
    const auto& t = peek();
    if ((t.type == Token::Type::op && t.text == op)) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool accept_word(std::string_view w) {
    if (peek().type == Token::Type::ident && peek().text == w) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr binary(Node::Kind k, NodePtr l, NodePtr r) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
  }

  NodePtr parse_or() {
    auto l = parse_and();
    while (accept_op("||") || accept_word("or")) l = binary(Node::Kind::lor, l, parse_and());
    return l;
  }
  NodePtr parse_and() {
    auto l = parse_not();
    while (accept_op("&&") || accept_word("and")) l = binary(Node::Kind::land, l, parse_not());
    return l;
  }
  NodePtr parse_not() {
    if (accept_op("!") || accept_word("not")) return binary(Node::Kind::lnot, parse_not(), nullptr);
    return parse_compare();
  }
  NodePtr parse_compare() {
    auto l = parse_sum();
    static constexpr std::pair<std::string_view, Node::Kind> ops[] = {
        {"<=", Node::Kind::le}, {">=", Node::Kind::ge}, {"==", Node::Kind::eq},
        {"!=", Node::Kind::ne}, {"<", Node::Kind::lt},  {">", Node::Kind::gt}};
    for (const auto& [op, kind] : ops)
      if (accept_op(op)) return binary(kind, l, parse_sum());
    return l;
  }
  NodePtr parse_sum() {
    auto l = parse_product();
    for (;;) {
      if (accept_op("+")) l = binary(Node::Kind::add, l, parse_product());
      else if (accept_op("-")) l = binary(Node::Kind::sub, l, parse_product());
      else return l;
    }
  }
  NodePtr parse_product() {
    auto l = parse_unary();
    for (;;) {
      if (accept_op("*")) l = binary(Node::Kind::mul, l, parse_unary());
      else if (accept_op("/")) l = binary(Node::Kind::div, l, parse_unary());
      else return l;
    }
  }
  NodePtr parse_unary() {
    if (accept_op("-")) return binary(Node::Kind::neg, parse_unary(), nullptr);
    return parse_atom();
  }
  NodePtr parse_atom() {
    const auto t = peek();
    if (t.type == Token::Type::lparen) {
      ++pos_;
      auto n = parse_or();
      if (peek().type != Token::Type::rparen) throw GuardSyntaxError("missing ')'");
      ++pos_;
      return n;
    }
    auto n = std::make_shared<Node>();
    if (t.type == Token::Type::number) {
      ++pos_;
      n->number = t.number;
      return n;
    }
    if (t.type == Token::Type::ident) {
      ++pos_;
      if (t.text == "true" || t.text == "false") {
        n->number = t.text == "true" ? 1.0 : 0.0;
        return n;
      }
      n->kind = Node::Kind::path;
      n->path = t.text;
      paths_.push_back(t.text);
      return n;
    }
    throw GuardSyntaxError(t.type == Token::Type::end ? "unexpected end of guard"
                                                      : "unexpected '" + t.text + "'");
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::vector<std::string>& paths_;
};

std::optional<double> eval(const Node& n, const EngineContext& ctx) {
  using K = Node::Kind;
  switch (n.kind) {
    case K::number: return n.number;
    case K::path: return resolve_path(ctx, n.path);
    case K::neg: {
      auto v = eval(*n.lhs, ctx);
      if (!v) return std::nullopt;
      return -*v;
    }
    case K::lnot: {
      auto v = eval(*n.lhs, ctx);
      if (!v) return std::nullopt;
      return *v == 0.0 ? 1.0 : 0.0;
    }
    case K::land: {
      auto l = eval(*n.lhs, ctx);
      if (l && *l == 0.0) return 0.0;
      auto r = eval(*n.rhs, ctx);
      if (r && *r == 0.0) return 0.0;
      if (!l || !r) return std::nullopt;
      return 1.0;
    }
    case K::lor: {
      auto l = eval(*n.lhs, ctx);
      if (l && *l != 0.0) return 1.0;
      auto r = eval(*n.rhs, ctx);
      if (r && *r != 0.0) return 1.0;
      if (!l || !r) return std::nullopt;
      return 0.0;
    }
    default: break;
  }
  auto l = eval(*n.lhs, ctx);
  auto r = eval(*n.rhs, ctx);
  if (!l || !r) return std::nullopt;
  switch (n.kind) {
    case K::add: return *l + *r;
    case K::sub: return *l - *r;
    case K::mul: return *l * *r;
    case K::div:
      if (*r == 0.0) return std::nullopt;
      return *l / *r;
    case K::lt: return *l < *r ? 1.0 : 0.0;
    case K::le: return *l <= *r ? 1.0 : 0.0;
    case K::gt: return *l > *r ? 1.0 : 0.0;
    case K::ge: return *l >= *r ? 1.0 : 0.0;
    case K::eq: return *l == *r ? 1.0 : 0.0;
    case K::ne: return *l != *r ? 1.0 : 0.0;
    default: return std::nullopt;
  }
}

}  // namespace

Guard Guard::parse(std::string_view text) {
  Guard g;
  g.text_ = std::string(text);
  Parser parser(tokenize(text), g.paths_);
  g.root_ = parser.parse();
  return g;
}

std::optional<double> Guard::evaluate(const EngineContext& ctx) const {
  if (!root_) return 1.0;
  return eval(*root_, ctx);
}

}  // namespace rider::scenario
