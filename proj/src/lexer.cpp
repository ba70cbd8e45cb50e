#include "evsec/lexer.hpp"

namespace evsec {

namespace {

bool ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }

}  // namespace

std::vector<token> lex(const std::string& text, std::vector<diagnostic>& diags) {
  std::vector<token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto bump = [&](size_t n) {
    for (size_t j = 0; j < n && i < text.size(); ++j, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      bump(1);
      continue;
    }
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') bump(1);
      continue;
    }
    if (c == '(' && i + 1 < text.size() && text[i + 1] == '*') {
      int depth = 1;
      int sl = line, sc = col;
      bump(2);
      while (i < text.size() && depth > 0) {
        if (text[i] == '(' && i + 1 < text.size() && text[i + 1] == '*') {
          ++depth;
          bump(2);
        } else if (text[i] == '*' && i + 1 < text.size() && text[i + 1] == ')') {
          --depth;
          bump(2);
        } else {
          bump(1);
        }
      }
      if (depth > 0)
        diags.push_back({sl, sc, "unterminated comment", "close it with *)"});
      continue;
    }
    token t;
    t.line = line;
    t.col = col;
    if (ident_start(c)) {
      size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      t.k = token::kind::ident;
      t.text = text.substr(i, j - i);
      bump(j - i);
    } else if (c >= '0' && c <= '9') {
      size_t j = i;
      while (j < text.size() && text[j] >= '0' && text[j] <= '9') ++j;
      t.k = token::kind::number;
      t.text = text.substr(i, j - i);
      bump(j - i);
    } else if (c == '-' && i + 1 < text.size() && text[i + 1] == '>') {
      t.k = token::kind::arrow;
      t.text = "->";
      bump(2);
    } else {
      t.k = token::kind::punct;
      t.text = std::string(1, c);
      bump(1);
    }
    out.push_back(std::move(t));
  }
  token eof;
  eof.k = token::kind::eof;
  eof.line = line;
  eof.col = col;
  out.push_back(eof);
  return out;
}

}  // namespace evsec
