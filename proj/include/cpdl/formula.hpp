#pragma once
// ============================================================================
// Formula core: interned negation-normal-form formulas and programs.
//
// Every formula and program lives exactly once in a process-wide arena, so
// structural equality is id equality and sets of formulas can be hashed
// cheaply. Stored formulas are always in negation normal form: negation
// appears only on propositional variables. Programs allow converse only on
// atomic programs ("literal programs"); the surface layer pushes converse
// inward before anything reaches this module.
// ============================================================================

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cpdl {

using Id = std::uint32_t;

enum class FmlOp : std::uint8_t { Var, NegVar, And, Or, Dia, Box };
enum class PrgOp : std::uint8_t { Atom, Seq, Choice, Star, Test };

namespace detail {

// Append-only store with stable addresses. Insertion is serialized by the
// arena mutex; readers index published slots without locking. Publication
// happens via the release store of the size counter in the arena.
template <typename T>
class ChunkedStore {
  static constexpr std::size_t kChunkBits = 12;
  static constexpr std::size_t kChunkSize = std::size_t{1} << kChunkBits;
  static constexpr std::size_t kMaxChunks = 1 << 14;  // 64M entries, plenty

 public:
  ChunkedStore() { for (auto& c : chunks_) c.store(nullptr, std::memory_order_relaxed); }
  ~ChunkedStore() {
    for (auto& c : chunks_) delete[] c.load(std::memory_order_relaxed);
  }

  // Caller must hold the arena mutex.
  T& slot(std::size_t i) {
    std::size_t hi = i >> kChunkBits, lo = i & (kChunkSize - 1);
    T* chunk = chunks_[hi].load(std::memory_order_acquire);
    if (!chunk) {
      if (hi >= kMaxChunks) throw std::length_error("arena exhausted");
      chunk = new T[kChunkSize]();
      chunks_[hi].store(chunk, std::memory_order_release);
    }
    return chunk[lo];
  }

  const T& at(std::size_t i) const {
    std::size_t hi = i >> kChunkBits, lo = i & (kChunkSize - 1);
    return chunks_[hi].load(std::memory_order_acquire)[lo];
  }

 private:
  std::array<std::atomic<T*>, kMaxChunks> chunks_;
};

struct FmlNode {
  FmlOp op;
  // Var/NegVar: a = name id. And/Or: a,b = operand formula ids.
  // Dia/Box: a = program id, b = body formula id.
  Id a = 0, b = 0;
  // Cached at intern time; both are consulted on hot paths.
  std::uint32_t size = 0;   // |phi| measure, see size() below
  bool eventuality = false;
};

struct PrgNode {
  PrgOp op;
  // Atom: a = name id, b = 1 when converse. Seq/Choice: a,b = program ids.
  // Star: a = program id. Test: a = formula id.
  Id a = 0, b = 0;
  std::uint32_t size = 0;
};

struct TripleKey {
  std::uint8_t op; Id a, b;
  bool operator==(const TripleKey&) const = default;
};
struct TripleKeyHash {
  std::size_t operator()(const TripleKey& k) const {
    std::uint64_t h = k.op;
    h = h * 0x9e3779b97f4a7c15ull + k.a;
    h = h * 0x9e3779b97f4a7c15ull + k.b;
    return static_cast<std::size_t>(h ^ (h >> 32));
  }
};

}  // namespace detail

class Program;
class Formula;

// ----------------------------------------------------------------------------
// Arena singleton. All mutation is serialized; published entries are
// immutable, so concurrent readers need no lock.
// ----------------------------------------------------------------------------
class Arena {
 public:
  static Arena& instance() {
    static Arena a;
    return a;
  }

  Id intern_name(std::string_view name) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = name_ids_.find(std::string(name));
    if (it != name_ids_.end()) return it->second;
    Id id = static_cast<Id>(name_count_.load(std::memory_order_relaxed));
    names_.slot(id) = std::string(name);
    name_ids_.emplace(std::string(name), id);
    name_count_.store(id + 1, std::memory_order_release);
    return id;
  }

  const std::string& name(Id id) const { return names_.at(id); }

  Id intern_fml(detail::FmlNode n) {
    std::lock_guard<std::mutex> lock(mu_);
    detail::TripleKey key{static_cast<std::uint8_t>(n.op), n.a, n.b};
    auto it = fml_ids_.find(key);
    if (it != fml_ids_.end()) return it->second;
    Id id = static_cast<Id>(fml_count_.load(std::memory_order_relaxed));
    fmls_.slot(id) = n;
    fml_ids_.emplace(key, id);
    fml_count_.store(id + 1, std::memory_order_release);
    return id;
  }

  Id intern_prg(detail::PrgNode n) {
    std::lock_guard<std::mutex> lock(mu_);
    detail::TripleKey key{static_cast<std::uint8_t>(n.op), n.a, n.b};
    auto it = prg_ids_.find(key);
    if (it != prg_ids_.end()) return it->second;
    Id id = static_cast<Id>(prg_count_.load(std::memory_order_relaxed));
    prgs_.slot(id) = n;
    prg_ids_.emplace(key, id);
    prg_count_.store(id + 1, std::memory_order_release);
    return id;
  }

  const detail::FmlNode& fml(Id id) const { return fmls_.at(id); }
  const detail::PrgNode& prg(Id id) const { return prgs_.at(id); }

 private:
  Arena() = default;
  std::mutex mu_;
  detail::ChunkedStore<detail::FmlNode> fmls_;
  detail::ChunkedStore<detail::PrgNode> prgs_;
  detail::ChunkedStore<std::string> names_;
  std::unordered_map<detail::TripleKey, Id, detail::TripleKeyHash> fml_ids_;
  std::unordered_map<detail::TripleKey, Id, detail::TripleKeyHash> prg_ids_;
  std::unordered_map<std::string, Id> name_ids_;
  std::atomic<std::size_t> fml_count_{0}, prg_count_{0}, name_count_{0};
};

// An atomic program or the converse of one. The only program shapes allowed
// under a modality's first step in stored formulas.
struct LiteralProgram {
  Id atom = 0;
  bool converse = false;
  bool operator==(const LiteralProgram&) const = default;
  LiteralProgram inverted() const { return {atom, !converse}; }
};

class Program {
 public:
  Program() : id_(invalid()) {}
  explicit Program(Id id) : id_(id) {}
  static constexpr Id invalid() { return 0xffffffffu; }

  Id id() const { return id_; }
  bool valid() const { return id_ != invalid(); }
  bool operator==(const Program&) const = default;

  PrgOp op() const { return node().op; }
  bool is_literal() const { return op() == PrgOp::Atom; }
  LiteralProgram literal() const {
    const auto& n = node();
    if (n.op != PrgOp::Atom) throw std::logic_error("literal(): compound program");
    return {n.a, n.b != 0};
  }
  Program left() const { return Program(node().a); }    // Seq/Choice lhs, Star inner
  Program right() const { return Program(node().b); }   // Seq/Choice rhs
  Formula test_body() const;
  std::uint32_t size() const { return node().size; }

  const detail::PrgNode& node() const { return Arena::instance().prg(id_); }

 private:
  Id id_;
};

class Formula {
 public:
  Formula() : id_(invalid()) {}
  explicit Formula(Id id) : id_(id) {}
  static constexpr Id invalid() { return 0xffffffffu; }

  Id id() const { return id_; }
  bool valid() const { return id_ != invalid(); }
  bool operator==(const Formula&) const = default;

  FmlOp op() const { return node().op; }
  const std::string& var_name() const { return Arena::instance().name(node().a); }
  Formula lhs() const { return Formula(node().a); }
  Formula rhs() const { return Formula(node().b); }
  Program prog() const { return Program(node().a); }
  Formula body() const { return Formula(node().b); }
  std::uint32_t size() const { return node().size; }
  // An eventuality is <g1>...<gk><g*>phi for k >= 0.
  bool is_eventuality() const { return node().eventuality; }

  const detail::FmlNode& node() const { return Arena::instance().fml(id_); }

 private:
  Id id_;
};

inline Formula Program::test_body() const {
  const auto& n = node();
  if (n.op != PrgOp::Test) throw std::logic_error("test_body(): not a test");
  return Formula(n.a);
}

// --- constructors -----------------------------------------------------------

inline Program mk_atom(std::string_view name, bool converse = false) {
  Id nm = Arena::instance().intern_name(name);
  return Program(Arena::instance().intern_prg(
      {PrgOp::Atom, nm, converse ? Id{1} : Id{0}, 1, 0}));
}
inline Program mk_literal(LiteralProgram lp) {
  return Program(Arena::instance().intern_prg(
      {PrgOp::Atom, lp.atom, lp.converse ? Id{1} : Id{0}, 1, 0}));
}
inline Program mk_seq(Program g, Program d) {
  return Program(Arena::instance().intern_prg(
      {PrgOp::Seq, g.id(), d.id(), 1 + g.size() + d.size(), 0}));
}
inline Program mk_choice(Program g, Program d) {
  return Program(Arena::instance().intern_prg(
      {PrgOp::Choice, g.id(), d.id(), 1 + g.size() + d.size(), 0}));
}
inline Program mk_star(Program g) {
  return Program(Arena::instance().intern_prg(
      {PrgOp::Star, g.id(), 0, 1 + g.size(), 0}));
}
inline Program mk_test(Formula f) {
  return Program(Arena::instance().intern_prg(
      {PrgOp::Test, f.id(), 0, 1 + f.size(), 0}));
}

inline Formula mk_var(std::string_view name) {
  Id nm = Arena::instance().intern_name(name);
  return Formula(Arena::instance().intern_fml({FmlOp::Var, nm, 0, 1, false}));
}
inline Formula mk_negvar(std::string_view name) {
  Id nm = Arena::instance().intern_name(name);
  return Formula(Arena::instance().intern_fml({FmlOp::NegVar, nm, 0, 1, false}));
}
inline Formula mk_and(Formula a, Formula b) {
  return Formula(Arena::instance().intern_fml(
      {FmlOp::And, a.id(), b.id(), 1 + a.size() + b.size(), false}));
}
inline Formula mk_or(Formula a, Formula b) {
  return Formula(Arena::instance().intern_fml(
      {FmlOp::Or, a.id(), b.id(), 1 + a.size() + b.size(), false}));
}
inline Formula mk_dia(Program g, Formula f) {
  bool ev = g.op() == PrgOp::Star || f.is_eventuality();
  return Formula(Arena::instance().intern_fml(
      {FmlOp::Dia, g.id(), f.id(), g.size() + f.size(), ev}));
}
inline Formula mk_box(Program g, Formula f) {
  return Formula(Arena::instance().intern_fml(
      {FmlOp::Box, g.id(), f.id(), g.size() + f.size(), false}));
}

// --- canonical order --------------------------------------------------------
// Total order: operator tag first, then components left to right; variable
// and atom names compare as strings. Deterministic across runs, stable under
// later interning. Equality is id comparison.

int compare(Formula a, Formula b);

inline int compare(Program a, Program b) {
  if (a.id() == b.id()) return 0;
  const auto& na = a.node();
  const auto& nb = b.node();
  if (na.op != nb.op) return na.op < nb.op ? -1 : 1;
  switch (na.op) {
    case PrgOp::Atom: {
      const auto& s1 = Arena::instance().name(na.a);
      const auto& s2 = Arena::instance().name(nb.a);
      if (int c = s1.compare(s2)) return c < 0 ? -1 : 1;
      if (na.b != nb.b) return na.b < nb.b ? -1 : 1;
      return 0;
    }
    case PrgOp::Seq:
    case PrgOp::Choice:
      if (int c = compare(a.left(), b.left())) return c;
      return compare(a.right(), b.right());
    case PrgOp::Star:
      return compare(a.left(), b.left());
    case PrgOp::Test:
      return compare(a.test_body(), b.test_body());
  }
  return 0;
}

inline int compare(Formula a, Formula b) {
  if (a.id() == b.id()) return 0;
  const auto& na = a.node();
  const auto& nb = b.node();
  if (na.op != nb.op) return na.op < nb.op ? -1 : 1;
  switch (na.op) {
    case FmlOp::Var:
    case FmlOp::NegVar: {
      int c = a.var_name().compare(b.var_name());
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    case FmlOp::And:
    case FmlOp::Or:
      if (int c = compare(a.lhs(), b.lhs())) return c;
      return compare(a.rhs(), b.rhs());
    case FmlOp::Dia:
    case FmlOp::Box:
      if (int c = compare(a.prog(), b.prog())) return c;
      return compare(a.body(), b.body());
  }
  return 0;
}

inline bool operator<(Formula a, Formula b) { return compare(a, b) < 0; }
inline bool operator<(Program a, Program b) { return compare(a, b) < 0; }

// --- negation in NNF --------------------------------------------------------
// Structural dual; the program under a modality is unchanged, so the result
// is again in NNF and negate_nnf is an involution.

inline Formula negate_nnf(Formula f) {
  switch (f.op()) {
    case FmlOp::Var:    return mk_negvar(f.var_name());
    case FmlOp::NegVar: return mk_var(f.var_name());
    case FmlOp::And:    return mk_or(negate_nnf(f.lhs()), negate_nnf(f.rhs()));
    case FmlOp::Or:     return mk_and(negate_nnf(f.lhs()), negate_nnf(f.rhs()));
    case FmlOp::Dia:    return mk_box(f.prog(), negate_nnf(f.body()));
    case FmlOp::Box:    return mk_dia(f.prog(), negate_nnf(f.body()));
  }
  throw std::logic_error("negate_nnf: bad op");
}

// --- decomposition ----------------------------------------------------------
// Alpha formulas are conjunctive: the node needs every listed part.
// Beta formulas are disjunctive: the node needs one of exactly two parts.
// Modal literals (<l>phi, [l]phi with l a literal program) and propositional
// literals decompose no further here; states handle the modal ones.

enum class FormulaKind : std::uint8_t { Literal, Alpha, Beta, DiamondLit, BoxLit };

struct Classified {
  FormulaKind kind;
  // Alpha: 1 or 2 entries. Beta: exactly 2.
  std::vector<Formula> parts;
  // DiamondLit/BoxLit:
  LiteralProgram lit{};
  Formula lit_body;
};

inline Classified classify(Formula f) {
  switch (f.op()) {
    case FmlOp::Var:
    case FmlOp::NegVar:
      return {FormulaKind::Literal, {}, {}, {}};
    case FmlOp::And:
      return {FormulaKind::Alpha, {f.lhs(), f.rhs()}, {}, {}};
    case FmlOp::Or:
      return {FormulaKind::Beta, {f.lhs(), f.rhs()}, {}, {}};
    case FmlOp::Dia: {
      Program g = f.prog();
      Formula phi = f.body();
      switch (g.op()) {
        case PrgOp::Atom:
          return {FormulaKind::DiamondLit, {}, g.literal(), phi};
        case PrgOp::Seq:
          return {FormulaKind::Alpha, {mk_dia(g.left(), mk_dia(g.right(), phi))}, {}, {}};
        case PrgOp::Choice:
          return {FormulaKind::Beta, {mk_dia(g.left(), phi), mk_dia(g.right(), phi)}, {}, {}};
        case PrgOp::Star:
          return {FormulaKind::Beta, {phi, mk_dia(g.left(), f)}, {}, {}};
        case PrgOp::Test:
          return {FormulaKind::Alpha, {phi, g.test_body()}, {}, {}};
      }
      break;
    }
    case FmlOp::Box: {
      Program g = f.prog();
      Formula phi = f.body();
      switch (g.op()) {
        case PrgOp::Atom:
          return {FormulaKind::BoxLit, {}, g.literal(), phi};
        case PrgOp::Seq:
          return {FormulaKind::Alpha, {mk_box(g.left(), mk_box(g.right(), phi))}, {}, {}};
        case PrgOp::Choice:
          return {FormulaKind::Alpha, {mk_box(g.left(), phi), mk_box(g.right(), phi)}, {}, {}};
        case PrgOp::Star:
          return {FormulaKind::Alpha, {phi, mk_box(g.left(), f)}, {}, {}};
        case PrgOp::Test:
          return {FormulaKind::Beta, {phi, negate_nnf(g.test_body())}, {}, {}};
      }
      break;
    }
  }
  throw std::logic_error("classify: bad op");
}

// Rewrite steps an eventuality can take at one world: {alpha1} for
// diamond alphas, {beta1, beta2} for diamond betas. Only meaningful for
// diamond formulas with a compound program.
inline std::vector<Formula> diamond_successors(Formula f) {
  if (f.op() != FmlOp::Dia || f.prog().is_literal())
    throw std::logic_error("diamond_successors: needs a compound-program diamond");
  Classified c = classify(f);
  if (c.kind == FormulaKind::Alpha) return {c.parts[0]};
  return c.parts;  // beta
}

// --- closure ----------------------------------------------------------------
// Least superset of {phi} closed under modal-literal body extraction and
// alpha/beta decomposition. Its cardinality is bounded by size(phi).

inline std::vector<Formula> closure(Formula phi) {
  std::vector<Formula> out;
  std::vector<Formula> work{phi};
  std::unordered_map<Id, bool> seen;
  seen[phi.id()] = true;
  while (!work.empty()) {
    Formula f = work.back();
    work.pop_back();
    out.push_back(f);
    auto push = [&](Formula g) {
      if (!seen.count(g.id())) {
        seen[g.id()] = true;
        work.push_back(g);
      }
    };
    Classified c = classify(f);
    switch (c.kind) {
      case FormulaKind::Literal:
        break;
      case FormulaKind::DiamondLit:
      case FormulaKind::BoxLit:
        push(c.lit_body);
        break;
      case FormulaKind::Alpha:
      case FormulaKind::Beta:
        for (Formula g : c.parts) push(g);
        break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace cpdl
