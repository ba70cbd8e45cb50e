#pragma once

#include <string>
#include <vector>

#include "evsec/specfile.hpp"

namespace evsec {

struct token {
  enum class kind { ident, number, punct, arrow, eof };
  kind k = kind::eof;
  std::string text;
  int line = 0, col = 0;
};

std::vector<token> lex(const std::string& text, std::vector<diagnostic>& diags);

}  // namespace evsec
