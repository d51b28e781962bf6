#include "mpnet/parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "text_parser.hpp"

namespace mpnet::detail {

namespace {

constexpr std::array<std::string_view, 12> kKeywords = {
    "and", "or", "not", "div", "mod", "unit", "true", "false", "ANY", "if", "then", "else"};

// Longest first so that "<=" wins over "<".
constexpr std::array<std::string_view, 22> kSymbols = {
    "!=", "<=", ">=", "->", "(", ")", "{", "}", "[", "]", ",",
    ".",  "=",  "<",  ">",  "+", "-", "*", "@", ";", ":", "/"};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

bool is_keyword(std::string_view word) {
  return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  SourcePos pos;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++pos.line;
        pos.column = 1;
      } else {
        ++pos.column;
      }
    }
  };

  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    Token tok;
    tok.pos = pos;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      std::uint64_t n = 0;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) {
        std::uint64_t d = static_cast<std::uint64_t>(text[j] - '0');
        if (n > (UINT64_MAX - d) / 10) throw SyntaxError(pos, "natural number literal too large");
        n = n * 10 + d;
        ++j;
      }
      if (j < text.size() && ident_start(text[j])) {
        throw SyntaxError(pos, "identifier may not start with a digit");
      }
      tok.type = Token::Type::Nat;
      tok.nat = n;
      tok.text = std::string(text.substr(i, j - i));
      advance(j - i);
    } else if (ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      tok.type = Token::Type::Ident;
      tok.text = std::string(text.substr(i, j - i));
      advance(j - i);
    } else if (c == '"') {
      advance(1);
      std::string s;
      while (true) {
        if (i >= text.size()) throw SyntaxError(tok.pos, "unterminated string literal");
        char d = text[i];
        if (d == '"') {
          advance(1);
          break;
        }
        if (d == '\\' && i + 1 < text.size()) {
          char e = text[i + 1];
          if (e == 'x' && i + 3 < text.size() && hex_digit(text[i + 2]) >= 0 &&
              hex_digit(text[i + 3]) >= 0) {
            s += static_cast<char>(hex_digit(text[i + 2]) * 16 + hex_digit(text[i + 3]));
            advance(4);
          } else if (e == 'n') {
            s += '\n';
            advance(2);
          } else {
            s += e;
            advance(2);
          }
          continue;
        }
        s += d;
        advance(1);
      }
      tok.type = Token::Type::String;
      tok.text = std::move(s);
    } else {
      auto it = std::find_if(kSymbols.begin(), kSymbols.end(),
                             [&](std::string_view s) { return text.substr(i, s.size()) == s; });
      if (it == kSymbols.end()) {
        throw SyntaxError(pos, std::string("unexpected character '") + c + "'");
      }
      tok.type = Token::Type::Symbol;
      tok.text = std::string(*it);
      advance(it->size());
    }
    out.push_back(std::move(tok));
  }
  Token end;
  end.pos = pos;
  out.push_back(end);
  return out;
}

TextParser::TextParser(std::string_view text) : tokens_(tokenize(text)) {}

const Token& TextParser::peek(std::size_t ahead) const {
  return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
}

bool TextParser::at_symbol(std::string_view s, std::size_t ahead) const {
  const Token& t = peek(ahead);
  return t.type == Token::Type::Symbol && t.text == s;
}

bool TextParser::at_word(std::string_view w, std::size_t ahead) const {
  const Token& t = peek(ahead);
  return t.type == Token::Type::Ident && t.text == w;
}

Token TextParser::next() {
  Token t = peek();
  if (pos_ < tokens_.size() - 1) ++pos_;
  return t;
}

bool TextParser::accept_symbol(std::string_view s) {
  if (!at_symbol(s)) return false;
  next();
  return true;
}

bool TextParser::accept_word(std::string_view w) {
  if (!at_word(w)) return false;
  next();
  return true;
}

void TextParser::expect_symbol(std::string_view s) {
  if (!accept_symbol(s)) fail("unexpected token", {"'" + std::string(s) + "'"});
}

void TextParser::expect_word(std::string_view w) {
  if (!accept_word(w)) fail("unexpected token", {"'" + std::string(w) + "'"});
}

std::string TextParser::expect_ident() {
  const Token& t = peek();
  if (t.type != Token::Type::Ident || is_keyword(t.text)) fail("unexpected token", {"identifier"});
  return next().text;
}

std::uint64_t TextParser::expect_nat() {
  if (peek().type != Token::Type::Nat) fail("unexpected token", {"natural number"});
  return next().nat;
}

void TextParser::expect_end() {
  if (!at_end()) fail("unexpected trailing input", {"end of input"});
}

void TextParser::fail(const std::string& message, std::vector<std::string> expected) const {
  const Token& t = peek();
  std::string found;
  switch (t.type) {
    case Token::Type::End: found = "end of input"; break;
    case Token::Type::String: found = "string literal"; break;
    default: found = "'" + t.text + "'"; break;
  }
  throw SyntaxError(t.pos, message + " " + found, std::move(expected));
}

expr::ExprPtr TextParser::expression() { return or_expr(); }

std::vector<expr::ExprPtr> TextParser::expression_list() {
  std::vector<expr::ExprPtr> out{expression()};
  while (accept_symbol(",")) out.push_back(expression());
  return out;
}

expr::ExprPtr TextParser::or_expr() {
  auto lhs = and_expr();
  while (accept_word("or")) lhs = expr::binary(expr::BinOp::Or, lhs, and_expr());
  return lhs;
}

expr::ExprPtr TextParser::and_expr() {
  auto lhs = cmp_expr();
  while (accept_word("and")) lhs = expr::binary(expr::BinOp::And, lhs, cmp_expr());
  return lhs;
}

expr::ExprPtr TextParser::cmp_expr() {
  auto lhs = add_expr();
  static const std::pair<std::string_view, expr::BinOp> ops[] = {
      {"=", expr::BinOp::Eq},  {"!=", expr::BinOp::Ne}, {"<", expr::BinOp::Lt},
      {"<=", expr::BinOp::Le}, {">", expr::BinOp::Gt},  {">=", expr::BinOp::Ge}};
  for (const auto& [sym, op] : ops) {
    if (accept_symbol(sym)) return expr::binary(op, lhs, add_expr());
  }
  return lhs;
}

expr::ExprPtr TextParser::add_expr() {
  auto lhs = mul_expr();
  while (true) {
    if (accept_symbol("+")) {
      lhs = expr::binary(expr::BinOp::Add, lhs, mul_expr());
    } else if (accept_symbol("-")) {
      lhs = expr::binary(expr::BinOp::Sub, lhs, mul_expr());
    } else {
      return lhs;
    }
  }
}

expr::ExprPtr TextParser::mul_expr() {
  auto lhs = unary_expr();
  while (true) {
    if (accept_symbol("*")) {
      lhs = expr::binary(expr::BinOp::Mul, lhs, unary_expr());
    } else if (accept_word("div")) {
      lhs = expr::binary(expr::BinOp::Div, lhs, unary_expr());
    } else if (accept_word("mod")) {
      lhs = expr::binary(expr::BinOp::Mod, lhs, unary_expr());
    } else {
      return lhs;
    }
  }
}

expr::ExprPtr TextParser::unary_expr() {
  if (accept_word("not")) return expr::not_(unary_expr());
  if (accept_word("if")) {
    auto c = expression();
    expect_word("then");
    auto a = expression();
    expect_word("else");
    auto b = expression();
    return expr::if_(c, a, b);
  }
  return postfix_expr();
}

void TextParser::field_list(std::vector<std::string>& names, std::vector<expr::ExprPtr>& values) {
  expect_symbol("{");
  do {
    std::string name = expect_ident();
    if (std::find(names.begin(), names.end(), name) != names.end()) {
      fail("duplicate field '" + name + "' before");
    }
    expect_symbol("=");
    names.push_back(std::move(name));
    values.push_back(expression());
  } while (accept_symbol(","));
  expect_symbol("}");
}

expr::ExprPtr TextParser::postfix_expr() {
  auto base = atom();
  while (true) {
    if (accept_symbol(".")) {
      const Token& t = peek();
      if (t.type == Token::Type::Nat) {
        base = expr::field(base, next().text);
      } else {
        base = expr::field(base, expect_ident());
      }
    } else if (at_symbol("{")) {
      std::vector<std::string> names;
      std::vector<expr::ExprPtr> values;
      field_list(names, values);
      base = expr::update(base, std::move(names), std::move(values));
    } else {
      return base;
    }
  }
}

expr::ExprPtr TextParser::atom() {
  const Token& t = peek();
  if (t.type == Token::Type::Nat) return expr::lit(Value::nat(next().nat));
  if (t.type == Token::Type::Ident) {
    if (accept_word("unit")) return expr::lit(Value::unit());
    if (accept_word("true")) return expr::lit(Value::boolean(true));
    if (accept_word("false")) return expr::lit(Value::boolean(false));
    if (accept_word("ANY")) return expr::lit(Value::any());
    std::string name = expect_ident();
    if (!at_symbol("(")) return expr::var(std::move(name));
    next();
    if (name == "opaque") {
      if (peek().type != Token::Type::String) fail("unexpected token", {"string literal"});
      std::string bytes = next().text;
      expect_symbol(")");
      return expr::lit(Value::opaque(std::move(bytes), "literal"));
    }
    std::vector<expr::ExprPtr> args;
    if (!at_symbol(")")) args = expression_list();
    expect_symbol(")");
    return expr::call(std::move(name), std::move(args));
  }
  if (accept_symbol("(")) {
    if (accept_symbol(")")) return expr::tuple({});
    std::vector<expr::ExprPtr> items{expression()};
    bool trailing_comma = false;
    while (accept_symbol(",")) {
      if (at_symbol(")")) {
        trailing_comma = true;
        break;
      }
      items.push_back(expression());
    }
    expect_symbol(")");
    if (items.size() == 1 && !trailing_comma) return items.front();
    return expr::tuple(std::move(items));
  }
  if (at_symbol("{")) {
    std::vector<std::string> names;
    std::vector<expr::ExprPtr> values;
    field_list(names, values);
    return expr::record(std::move(names), std::move(values));
  }
  fail("unexpected token",
       {"natural number", "identifier", "'unit'", "'true'", "'false'", "'ANY'", "'('", "'{'",
        "'not'", "'if'"});
}

}  // namespace mpnet::detail

namespace mpnet::expr {

namespace {

std::vector<ExprPtr> conditions(detail::TextParser& p) {
  std::vector<ExprPtr> out;
  if (p.accept_symbol("[")) {
    out = p.expression_list();
    p.expect_symbol("]");
  }
  return out;
}

}  // namespace

ExprPtr parse_expr(std::string_view text) {
  detail::TextParser p(text);
  auto e = p.expression();
  p.expect_end();
  return e;
}

InputArcExpr parse_input_arc(std::string_view text) {
  detail::TextParser p(text);
  InputArcExpr arc;
  arc.conditions = conditions(p);
  if (p.accept_symbol("(")) {
    if (p.accept_symbol("[")) {
      arc.pattern = p.expression_list();
      p.expect_symbol("]");
    } else {
      arc.pattern.push_back(p.expression());
    }
    arc.size = static_cast<std::uint64_t>(arc.pattern.size());
    if (p.accept_symbol(",")) {
      const auto& t = p.peek();
      SourcePos size_pos = t.pos;
      if (t.type == detail::Token::Type::Nat) {
        std::uint64_t k = p.next().nat;
        if (k < arc.pattern.size()) {
          throw SyntaxError(size_pos, "size " + std::to_string(k) + " is smaller than the pattern");
        }
        arc.size = k;
      } else if (t.type == detail::Token::Type::Ident && !detail::is_keyword(t.text) &&
                 t.text != kWildcard) {
        arc.size = p.next().text;
      } else {
        p.fail("size must be a natural number or a variable;", {"natural number", "identifier"});
      }
      if (p.accept_symbol(",")) arc.values = p.expect_ident();
    }
    p.expect_symbol(")");
  } else {
    arc.pattern = p.expression_list();
    arc.size = static_cast<std::uint64_t>(arc.pattern.size());
  }
  p.expect_end();
  return arc;
}

OutputArcExpr parse_output_arc(std::string_view text) {
  detail::TextParser p(text);
  OutputArcExpr arc;
  arc.conditions = conditions(p);
  arc.pattern = p.expression_list();
  if (p.accept_symbol("@")) arc.location = p.expression();
  p.expect_end();
  return arc;
}

}  // namespace mpnet::expr
