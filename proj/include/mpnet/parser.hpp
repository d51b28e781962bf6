#pragma once

#include <string_view>

#include "mpnet/expr.hpp"

namespace mpnet::expr {

/// Parse one expression; trailing input is a syntax error.
ExprPtr parse_expr(std::string_view text);

/// Parse `[conditions] (pattern, size, values)` or a bare pattern list.
/// Derived forms are expanded to the full triple.
InputArcExpr parse_input_arc(std::string_view text);

/// Parse `[conditions] pattern @ location`.
OutputArcExpr parse_output_arc(std::string_view text);

}  // namespace mpnet::expr
