#pragma once

#include <functional>
#include <string>

#include "mfglab/errors.hpp"

namespace mfglab {

using ScalarExpr = std::function<double(double, double)>;

// Small closed grammar for planted coefficient fields:
//   expr   := term (('+' | '-') term)*
//   term   := factor ('*' factor)*
//   factor := number | 'x' | 'y' | 'pi' | 'sin(expr)' | 'cos(expr)'
//           | '(' expr ')' | '-' factor
// Parse failures raise ConfigError with the offending position.
ScalarExpr parse_expression(const std::string& text);

}  // namespace mfglab
