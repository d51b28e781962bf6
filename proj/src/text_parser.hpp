#pragma once

// Lexer and recursive-descent base shared by the inscription, fragment and
// MPI mini-language parsers.

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "mpnet/error.hpp"
#include "mpnet/expr.hpp"

namespace mpnet::detail {

struct Token {
  enum class Type { End, Nat, Ident, String, Symbol };
  Type type = Type::End;
  std::string text;
  std::uint64_t nat = 0;
  SourcePos pos;
};

std::vector<Token> tokenize(std::string_view text);

bool is_keyword(std::string_view word);

class TextParser {
 public:
  explicit TextParser(std::string_view text);

  expr::ExprPtr expression();
  std::vector<expr::ExprPtr> expression_list();

  const Token& peek(std::size_t ahead = 0) const;
  bool at_symbol(std::string_view s, std::size_t ahead = 0) const;
  bool at_word(std::string_view w, std::size_t ahead = 0) const;
  bool at_end() const { return peek().type == Token::Type::End; }

  Token next();
  bool accept_symbol(std::string_view s);
  bool accept_word(std::string_view w);
  void expect_symbol(std::string_view s);
  void expect_word(std::string_view w);
  std::string expect_ident();
  std::uint64_t expect_nat();
  void expect_end();

  [[noreturn]] void fail(const std::string& message, std::vector<std::string> expected = {}) const;

 private:
  expr::ExprPtr or_expr();
  expr::ExprPtr and_expr();
  expr::ExprPtr cmp_expr();
  expr::ExprPtr add_expr();
  expr::ExprPtr mul_expr();
  expr::ExprPtr unary_expr();
  expr::ExprPtr postfix_expr();
  expr::ExprPtr atom();
  void field_list(std::vector<std::string>& names, std::vector<expr::ExprPtr>& values);

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace mpnet::detail
