#pragma once
// Renders formulas back to concrete syntax with minimal parentheses.
// parse_nnf(render(f)) == f for every negation normal form formula f.

#include <string>

#include "cpdl/formula.hpp"

namespace cpdl {

namespace detail {

// Formula precedence: 3 or, 4 and, 5 unary and atoms.
// Program precedence: 1 choice, 2 seq, 3 postfix, 4 atoms.

inline void render_fml(std::string& out, Formula f, int min_prec);

inline void render_prg(std::string& out, Program g, int min_prec) {
  switch (g.op()) {
    case PrgOp::Atom: {
      LiteralProgram lp = g.literal();
      out += Arena::instance().name(lp.atom);
      if (lp.converse) out += '^';
      return;
    }
    case PrgOp::Seq: {
      bool par = min_prec > 2;
      if (par) out += '(';
      render_prg(out, g.left(), 2);
      out += ';';
      render_prg(out, g.right(), 3);
      if (par) out += ')';
      return;
    }
    case PrgOp::Choice: {
      bool par = min_prec > 1;
      if (par) out += '(';
      render_prg(out, g.left(), 1);
      out += " + ";
      render_prg(out, g.right(), 2);
      if (par) out += ')';
      return;
    }
    case PrgOp::Star:
      render_prg(out, g.left(), 3);
      out += '*';
      return;
    case PrgOp::Test: {
      Formula body = g.test_body();
      if (body.op() == FmlOp::Var) {
        render_fml(out, body, 5);
      } else {
        out += '(';
        render_fml(out, body, 0);
        out += ')';
      }
      out += '?';
      return;
    }
  }
}

inline void render_fml(std::string& out, Formula f, int min_prec) {
  switch (f.op()) {
    case FmlOp::Var:
      out += f.var_name();
      return;
    case FmlOp::NegVar:
      out += '~';
      out += f.var_name();
      return;
    case FmlOp::And: {
      bool par = min_prec > 4;
      if (par) out += '(';
      render_fml(out, f.lhs(), 4);
      out += " & ";
      render_fml(out, f.rhs(), 5);
      if (par) out += ')';
      return;
    }
    case FmlOp::Or: {
      bool par = min_prec > 3;
      if (par) out += '(';
      render_fml(out, f.lhs(), 3);
      out += " | ";
      render_fml(out, f.rhs(), 4);
      if (par) out += ')';
      return;
    }
    case FmlOp::Dia:
      out += '<';
      render_prg(out, f.prog(), 0);
      out += '>';
      render_fml(out, f.body(), 5);
      return;
    case FmlOp::Box:
      out += '[';
      render_prg(out, f.prog(), 0);
      out += ']';
      render_fml(out, f.body(), 5);
      return;
  }
}

}  // namespace detail

inline std::string render(Formula f) {
  std::string out;
  detail::render_fml(out, f, 0);
  return out;
}

inline std::string render(Program g) {
  std::string out;
  detail::render_prg(out, g, 0);
  return out;
}

}  // namespace cpdl
