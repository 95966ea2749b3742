#include "mfglab/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace mfglab {

namespace {

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  ScalarExpr parse() {
    ScalarExpr e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing input");
    return e;
  }

 private:
  const std::string& text_;
  size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    os << "expression error at position " << pos_ << ": " << what << " in \"" << text_
       << "\"";
    throw ConfigError(os.str());
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  ScalarExpr expr() {
    ScalarExpr acc = term();
    for (;;) {
      if (eat('+')) {
        ScalarExpr rhs = term();
        acc = [acc, rhs](double x, double y) { return acc(x, y) + rhs(x, y); };
      } else if (eat('-')) {
        ScalarExpr rhs = term();
        acc = [acc, rhs](double x, double y) { return acc(x, y) - rhs(x, y); };
      } else {
        return acc;
      }
    }
  }

  ScalarExpr term() {
    ScalarExpr acc = factor();
    while (eat('*')) {
      ScalarExpr rhs = factor();
      acc = [acc, rhs](double x, double y) { return acc(x, y) * rhs(x, y); };
    }
    return acc;
  }

  ScalarExpr factor() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '-') {
      ++pos_;
      ScalarExpr inner = factor();
      return [inner](double x, double y) { return -inner(x, y); };
    }
    if (c == '(') {
      ++pos_;
      ScalarExpr inner = expr();
      if (!eat(')')) fail("missing ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      char* end = nullptr;
      const double v = std::strtod(text_.c_str() + pos_, &end);
      if (end == text_.c_str() + pos_) fail("bad number");
      pos_ = static_cast<size_t>(end - text_.c_str());
      return [v](double, double) { return v; };
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      while (pos_ < text_.size() &&
             std::isalpha(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      }
      const std::string word = text_.substr(start, pos_ - start);
      if (word == "x") return [](double x, double) { return x; };
      if (word == "y") return [](double, double y) { return y; };
      if (word == "pi") return [](double, double) { return M_PI; };
      if (word == "sin" || word == "cos") {
        if (!eat('(')) fail("expected '(' after " + word);
        ScalarExpr inner = expr();
        if (!eat(')')) fail("missing ')'");
        if (word == "sin") {
          return [inner](double x, double y) { return std::sin(inner(x, y)); };
        }
        return [inner](double x, double y) { return std::cos(inner(x, y)); };
      }
      pos_ = start;
      fail("unknown identifier \"" + word + "\"");
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

}  // namespace

ScalarExpr parse_expression(const std::string& text) { return Parser(text).parse(); }

}  // namespace mfglab
