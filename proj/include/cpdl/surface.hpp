#pragma once
// Surface syntax as parsed: full connective set, converse on arbitrary
// programs. Converted to the core NNF representation before solving;
// nothing past this layer sees ->, <->, true/false, plain negation, or
// converse on a compound program.

#include <memory>
#include <stdexcept>
#include <string>

#include "cpdl/formula.hpp"

namespace cpdl {

struct SFormula;
struct SProgram;
using SFml = std::shared_ptr<const SFormula>;
using SPrg = std::shared_ptr<const SProgram>;

enum class SFmlOp : std::uint8_t { Var, True, False, Not, And, Or, Imp, Iff, Dia, Box };
enum class SPrgOp : std::uint8_t { Atom, Seq, Choice, Star, Test, Converse };

struct SFormula {
  SFmlOp op;
  std::string name;  // Var
  SFml a, b;
  SPrg prg;
};

struct SProgram {
  SPrgOp op;
  std::string name;  // Atom
  SPrg a, b;
  SFml test;
};

inline SFml s_var(std::string n) { return std::make_shared<SFormula>(SFormula{SFmlOp::Var, std::move(n), nullptr, nullptr, nullptr}); }
inline SFml s_true() { return std::make_shared<SFormula>(SFormula{SFmlOp::True, {}, nullptr, nullptr, nullptr}); }
inline SFml s_false() { return std::make_shared<SFormula>(SFormula{SFmlOp::False, {}, nullptr, nullptr, nullptr}); }
inline SFml s_not(SFml a) { return std::make_shared<SFormula>(SFormula{SFmlOp::Not, {}, std::move(a), nullptr, nullptr}); }
inline SFml s_bin(SFmlOp op, SFml a, SFml b) { return std::make_shared<SFormula>(SFormula{op, {}, std::move(a), std::move(b), nullptr}); }
inline SFml s_modal(SFmlOp op, SPrg g, SFml a) { return std::make_shared<SFormula>(SFormula{op, {}, std::move(a), nullptr, std::move(g)}); }

inline SPrg s_atom(std::string n) { return std::make_shared<SProgram>(SProgram{SPrgOp::Atom, std::move(n), nullptr, nullptr, nullptr}); }
inline SPrg s_pbin(SPrgOp op, SPrg a, SPrg b) { return std::make_shared<SProgram>(SProgram{op, {}, std::move(a), std::move(b), nullptr}); }
inline SPrg s_star(SPrg a) { return std::make_shared<SProgram>(SProgram{SPrgOp::Star, {}, std::move(a), nullptr, nullptr}); }
inline SPrg s_test(SFml f) { return std::make_shared<SProgram>(SProgram{SPrgOp::Test, {}, nullptr, nullptr, std::move(f)}); }
inline SPrg s_conv(SPrg a) { return std::make_shared<SProgram>(SProgram{SPrgOp::Converse, {}, std::move(a), nullptr, nullptr}); }

// Reserved variable used to desugar the constants: true = q0 | ~q0 and
// false = q0 & ~q0 are valid/unsatisfiable whatever else q0 does, so no
// reservation needs enforcing in the parser.
inline const char* constant_var() { return "q0"; }

Formula to_nnf(const SFml& f, bool negated);
Program push_converse(const SPrg& g, bool conversed);

// Converse distributes over every program former; on a test it vanishes.
// The result contains converse only on atoms.
inline Program push_converse(const SPrg& g, bool conversed = false) {
  switch (g->op) {
    case SPrgOp::Atom:
      return mk_atom(g->name, conversed);
    case SPrgOp::Seq: {
      Program l = push_converse(g->a, conversed);
      Program r = push_converse(g->b, conversed);
      return conversed ? mk_seq(r, l) : mk_seq(l, r);
    }
    case SPrgOp::Choice:
      return mk_choice(push_converse(g->a, conversed), push_converse(g->b, conversed));
    case SPrgOp::Star:
      return mk_star(push_converse(g->a, conversed));
    case SPrgOp::Test:
      return mk_test(to_nnf(g->test, false));
    case SPrgOp::Converse:
      return push_converse(g->a, !conversed);
  }
  throw std::logic_error("push_converse: bad op");
}

// Negation normal form with sugar removal, applied recursively inside test
// bodies. Negating a modality never touches its program.
inline Formula to_nnf(const SFml& f, bool negated = false) {
  switch (f->op) {
    case SFmlOp::Var:
      return negated ? mk_negvar(f->name) : mk_var(f->name);
    case SFmlOp::True: {
      Formula q = mk_var(constant_var()), nq = mk_negvar(constant_var());
      return negated ? mk_and(q, nq) : mk_or(q, nq);
    }
    case SFmlOp::False: {
      Formula q = mk_var(constant_var()), nq = mk_negvar(constant_var());
      return negated ? mk_or(q, nq) : mk_and(q, nq);
    }
    case SFmlOp::Not:
      return to_nnf(f->a, !negated);
    case SFmlOp::And: {
      Formula l = to_nnf(f->a, negated), r = to_nnf(f->b, negated);
      return negated ? mk_or(l, r) : mk_and(l, r);
    }
    case SFmlOp::Or: {
      Formula l = to_nnf(f->a, negated), r = to_nnf(f->b, negated);
      return negated ? mk_and(l, r) : mk_or(l, r);
    }
    case SFmlOp::Imp: {
      // a -> b  ==  ~a | b
      if (negated) return mk_and(to_nnf(f->a, false), to_nnf(f->b, true));
      return mk_or(to_nnf(f->a, true), to_nnf(f->b, false));
    }
    case SFmlOp::Iff: {
      // a <-> b  ==  (a -> b) & (b -> a)
      if (negated)
        return mk_or(mk_and(to_nnf(f->a, false), to_nnf(f->b, true)),
                     mk_and(to_nnf(f->b, false), to_nnf(f->a, true)));
      return mk_and(mk_or(to_nnf(f->a, true), to_nnf(f->b, false)),
                    mk_or(to_nnf(f->b, true), to_nnf(f->a, false)));
    }
    case SFmlOp::Dia: {
      Program g = push_converse(f->prg);
      Formula body = to_nnf(f->a, negated);
      return negated ? mk_box(g, body) : mk_dia(g, body);
    }
    case SFmlOp::Box: {
      Program g = push_converse(f->prg);
      Formula body = to_nnf(f->a, negated);
      return negated ? mk_dia(g, body) : mk_box(g, body);
    }
  }
  throw std::logic_error("to_nnf: bad op");
}

}  // namespace cpdl
