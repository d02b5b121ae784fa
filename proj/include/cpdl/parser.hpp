#pragma once
// Recursive-descent parser for the concrete syntax.
//
//   formula  := iff
//   iff      := imp ('<->' imp)*
//   imp      := or ('->' imp)?                  right associative
//   or       := and ('|' and)*
//   and      := unary ('&' unary)*
//   unary    := '~' unary | '<'prog'>' unary | '['prog']' unary | primary
//   primary  := 'true' | 'false' | ident | '(' formula ')'
//   prog     := seq ('+' seq)*
//   seq      := post (';' post)*
//   post     := base ('*' | '^')*
//   base     := formula '?'  |  ident  |  '(' prog ')'
//
// A test is a formula followed by '?'; the parser tries that reading first
// and backtracks. Identifiers are lowercase alphanumerics starting with a
// letter; programs and variables share the namespace and are told apart by
// position. '#' starts a comment running to end of line.

#include <cctype>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cpdl/surface.hpp"

namespace cpdl {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(int l, int c, const std::string& msg)
      : std::runtime_error("parse error at " + std::to_string(l) + ":" +
                           std::to_string(c) + ": " + msg),
        line(l), col(c) {}
};

namespace detail {

enum class Tok : std::uint8_t {
  Ident, True, False, Tilde, Amp, Pipe, Arrow, Iff, Lt, Gt, LBrack, RBrack,
  Semi, Plus, Star, Question, Caret, LParen, RParen, End
};

struct Token {
  Tok kind;
  std::string text;
  int line, col;
};

inline std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto push = [&](Tok k, std::string t) { out.push_back({k, std::move(t), line, col}); };
  while (i < src.size()) {
    char c = src[i];
    if (c == '\n') { ++i; ++line; col = 1; continue; }
    if (std::isspace(static_cast<unsigned char>(c))) { ++i; ++col; continue; }
    if (c == '#') { while (i < src.size() && src[i] != '\n') ++i; continue; }
    if (std::islower(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && (std::islower(static_cast<unsigned char>(src[j])) ||
                                std::isdigit(static_cast<unsigned char>(src[j]))))
        ++j;
      std::string word(src.substr(i, j - i));
      if (word == "true") push(Tok::True, word);
      else if (word == "false") push(Tok::False, word);
      else push(Tok::Ident, word);
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    switch (c) {
      case '~': push(Tok::Tilde, "~"); break;
      case '&': push(Tok::Amp, "&"); break;
      case '|': push(Tok::Pipe, "|"); break;
      case '<':
        if (i + 2 < src.size() && src[i + 1] == '-' && src[i + 2] == '>') {
          push(Tok::Iff, "<->"); i += 2; col += 2;
        } else {
          push(Tok::Lt, "<");
        }
        break;
      case '>': push(Tok::Gt, ">"); break;
      case '-':
        if (i + 1 < src.size() && src[i + 1] == '>') {
          push(Tok::Arrow, "->"); ++i; ++col;
        } else {
          throw ParseError(line, col, "stray '-'");
        }
        break;
      case '[': push(Tok::LBrack, "["); break;
      case ']': push(Tok::RBrack, "]"); break;
      case ';': push(Tok::Semi, ";"); break;
      case '+': push(Tok::Plus, "+"); break;
      case '*': push(Tok::Star, "*"); break;
      case '?': push(Tok::Question, "?"); break;
      case '^': push(Tok::Caret, "^"); break;
      case '(': push(Tok::LParen, "("); break;
      case ')': push(Tok::RParen, ")"); break;
      default:
        throw ParseError(line, col, std::string("unexpected character '") + c + "'");
    }
    ++i; ++col;
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  SFml formula() {
    SFml f = iff();
    expect(Tok::End, "end of input");
    return f;
  }

  SPrg program_only() {
    SPrg g = program();
    expect(Tok::End, "end of input");
    return g;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;

  const Token& peek() const { return toks_[pos_]; }
  Token take() { return toks_[pos_++]; }
  bool at(Tok k) const { return peek().kind == k; }
  bool eat(Tok k) { if (at(k)) { ++pos_; return true; } return false; }
  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError(peek().line, peek().col, msg + ", got '" +
                     (peek().kind == Tok::End ? "<end>" : peek().text) + "'");
  }
  void expect(Tok k, const char* what) { if (!eat(k)) fail(std::string("expected ") + what); }

  SFml iff() {
    SFml f = imp();
    while (eat(Tok::Iff)) f = s_bin(SFmlOp::Iff, f, imp());
    return f;
  }

  SFml imp() {
    SFml f = disj();
    if (eat(Tok::Arrow)) f = s_bin(SFmlOp::Imp, f, imp());
    return f;
  }

  SFml disj() {
    SFml f = conj();
    while (eat(Tok::Pipe)) f = s_bin(SFmlOp::Or, f, conj());
    return f;
  }

  SFml conj() {
    SFml f = unary();
    while (eat(Tok::Amp)) f = s_bin(SFmlOp::And, f, unary());
    return f;
  }

  SFml unary() {
    if (eat(Tok::Tilde)) return s_not(unary());
    if (eat(Tok::Lt)) {
      SPrg g = program();
      expect(Tok::Gt, "'>'");
      return s_modal(SFmlOp::Dia, g, unary());
    }
    if (eat(Tok::LBrack)) {
      SPrg g = program();
      expect(Tok::RBrack, "']'");
      return s_modal(SFmlOp::Box, g, unary());
    }
    return primary();
  }

  SFml primary() {
    if (eat(Tok::True)) return s_true();
    if (eat(Tok::False)) return s_false();
    if (at(Tok::Ident)) return s_var(take().text);
    if (eat(Tok::LParen)) {
      SFml f = iff();
      expect(Tok::RParen, "')'");
      return f;
    }
    fail("expected a formula");
  }

  SPrg program() {
    SPrg g = pseq();
    while (eat(Tok::Plus)) g = s_pbin(SPrgOp::Choice, g, pseq());
    return g;
  }

  SPrg pseq() {
    SPrg g = ppost();
    while (eat(Tok::Semi)) g = s_pbin(SPrgOp::Seq, g, ppost());
    return g;
  }

  SPrg ppost() {
    SPrg g = pbase();
    for (;;) {
      if (eat(Tok::Star)) g = s_star(g);
      else if (eat(Tok::Caret)) g = s_conv(g);
      else break;
    }
    return g;
  }

  SPrg pbase() {
    // Try a test first: formula '?'. Backtrack if that shape is absent.
    std::size_t save = pos_;
    try {
      SFml f = iff();
      if (eat(Tok::Question)) return s_test(f);
    } catch (const ParseError&) {
    }
    pos_ = save;
    if (at(Tok::Ident)) return s_atom(take().text);
    if (eat(Tok::LParen)) {
      SPrg g = program();
      expect(Tok::RParen, "')'");
      return g;
    }
    fail("expected a program");
  }
};

}  // namespace detail

inline SFml parse_formula(std::string_view src) {
  return detail::Parser(src).formula();
}

inline SPrg parse_program(std::string_view src) {
  return detail::Parser(src).program_only();
}

// Parse and convert in one step; the usual entry point.
inline Formula parse_nnf(std::string_view src) {
  return to_nnf(parse_formula(src));
}

}  // namespace cpdl
