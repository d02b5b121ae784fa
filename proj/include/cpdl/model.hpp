#pragma once
// Finite Kripke structures with labelled edges, an evaluator for the full
// language over them, and a plain-text serialization.

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cpdl/formula.hpp"

namespace cpdl {

struct Model {
  int n = 0;  // worlds are 0..n-1
  std::map<std::string, std::vector<char>> val;  // variable -> truth per world
  std::map<std::string, std::vector<std::pair<int, int>>> rel;  // atom -> edges

  bool var_at(const std::string& name, int w) const {
    auto it = val.find(name);
    return it != val.end() && it->second[static_cast<std::size_t>(w)];
  }
};

// Evaluates formulas against a model, memoizing per (formula, world) and
// caching each program's adjacency matrix.
class Evaluator {
 public:
  explicit Evaluator(const Model& m) : m_(m) {}

  bool sat(Formula f, int w) {
    auto key = std::make_pair(f.id(), w);
    auto it = fmemo_.find(key);
    if (it != fmemo_.end()) return it->second;
    bool out = false;
    switch (f.op()) {
      case FmlOp::Var:
        out = m_.var_at(f.var_name(), w);
        break;
      case FmlOp::NegVar:
        out = !m_.var_at(f.var_name(), w);
        break;
      case FmlOp::And:
        out = sat(f.lhs(), w) && sat(f.rhs(), w);
        break;
      case FmlOp::Or:
        out = sat(f.lhs(), w) || sat(f.rhs(), w);
        break;
      case FmlOp::Dia: {
        const auto& adj = relation(f.prog());
        for (int t = 0; t < m_.n && !out; ++t)
          if (adj[w][t] && sat(f.body(), t)) out = true;
        break;
      }
      case FmlOp::Box: {
        const auto& adj = relation(f.prog());
        out = true;
        for (int t = 0; t < m_.n && out; ++t)
          if (adj[w][t] && !sat(f.body(), t)) out = false;
        break;
      }
    }
    fmemo_[key] = out;
    return out;
  }

  // n x n adjacency of a program.
  const std::vector<std::vector<char>>& relation(Program g) {
    auto it = rmemo_.find(g.id());
    if (it != rmemo_.end()) return it->second;
    std::vector<std::vector<char>> adj(m_.n, std::vector<char>(m_.n, 0));
    switch (g.op()) {
      case PrgOp::Atom: {
        LiteralProgram lp = g.literal();
        const std::string& name = Arena::instance().name(lp.atom);
        auto rit = m_.rel.find(name);
        if (rit != m_.rel.end()) {
          for (auto [u, v] : rit->second) {
            if (lp.converse)
              adj[v][u] = 1;
            else
              adj[u][v] = 1;
          }
        }
        break;
      }
      case PrgOp::Seq: {
        const auto a = relation(g.left());
        const auto b = relation(g.right());
        for (int u = 0; u < m_.n; ++u)
          for (int k = 0; k < m_.n; ++k)
            if (a[u][k])
              for (int v = 0; v < m_.n; ++v)
                if (b[k][v]) adj[u][v] = 1;
        break;
      }
      case PrgOp::Choice: {
        const auto a = relation(g.left());
        const auto b = relation(g.right());
        for (int u = 0; u < m_.n; ++u)
          for (int v = 0; v < m_.n; ++v) adj[u][v] = a[u][v] | b[u][v];
        break;
      }
      case PrgOp::Star: {
        const auto a = relation(g.left());
        for (int u = 0; u < m_.n; ++u) adj[u][u] = 1;
        for (int u = 0; u < m_.n; ++u)
          for (int v = 0; v < m_.n; ++v)
            if (a[u][v]) adj[u][v] = 1;
        for (int k = 0; k < m_.n; ++k)
          for (int u = 0; u < m_.n; ++u)
            if (adj[u][k])
              for (int v = 0; v < m_.n; ++v)
                if (adj[k][v]) adj[u][v] = 1;
        break;
      }
      case PrgOp::Test: {
        for (int u = 0; u < m_.n; ++u)
          if (sat(g.test_body(), u)) adj[u][u] = 1;
        break;
      }
    }
    return rmemo_.emplace(g.id(), std::move(adj)).first->second;
  }

 private:
  const Model& m_;
  std::map<std::pair<Id, int>, bool> fmemo_;
  std::map<Id, std::vector<std::vector<char>>> rmemo_;
};

inline bool model_check(const Model& m, Formula f, int w) {
  Evaluator e(m);
  return e.sat(f, w);
}

// Text form:
//   world <id>            one line per world
//   val <var> <id>...     worlds where the variable holds
//   rel <atom> <from> <to> one line per edge
inline std::string model_to_text(const Model& m) {
  std::ostringstream os;
  for (int w = 0; w < m.n; ++w) os << "world " << w << "\n";
  for (const auto& [name, flags] : m.val) {
    os << "val " << name;
    for (int w = 0; w < m.n; ++w)
      if (flags[static_cast<std::size_t>(w)]) os << " " << w;
    os << "\n";
  }
  for (const auto& [name, edges] : m.rel) {
    std::set<std::pair<int, int>> sorted(edges.begin(), edges.end());
    for (auto [u, v] : sorted) os << "rel " << name << " " << u << " " << v << "\n";
  }
  return os.str();
}

}  // namespace cpdl
