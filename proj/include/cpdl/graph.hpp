#pragma once
// Tableau graph: nodes carry a formula set, an annotation map, a parent-state
// pointer with its transition program, a definition timestamp, and a status.
// States are cached globally by formula set; all other nodes are private to
// their creator. Statuses of closed nodes never change again.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "cpdl/formula.hpp"
#include "cpdl/printer.hpp"

namespace cpdl {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = 0xffffffffu;

struct FmlLess {
  bool operator()(Formula a, Formula b) const { return compare(a, b) < 0; }
};

// Canonically sorted, duplicate-free formula set.
class GammaSet {
 public:
  GammaSet() = default;

  static GammaSet of(std::vector<Formula> v) {
    std::sort(v.begin(), v.end(), FmlLess{});
    v.erase(std::unique(v.begin(), v.end(),
                        [](Formula a, Formula b) { return a == b; }),
            v.end());
    GammaSet g;
    g.v_ = std::move(v);
    return g;
  }

  const std::vector<Formula>& items() const { return v_; }
  bool empty() const { return v_.empty(); }
  std::size_t size() const { return v_.size(); }

  bool contains(Formula f) const {
    return std::binary_search(v_.begin(), v_.end(), f, FmlLess{});
  }

  GammaSet with(Formula f) const {
    std::vector<Formula> v = v_;
    v.push_back(f);
    return of(std::move(v));
  }

  GammaSet union_with(const GammaSet& o) const {
    std::vector<Formula> v = v_;
    v.insert(v.end(), o.v_.begin(), o.v_.end());
    return of(std::move(v));
  }

  // this \ o
  GammaSet minus(const GammaSet& o) const {
    std::vector<Formula> v;
    for (Formula f : v_)
      if (!o.contains(f)) v.push_back(f);
    return of(std::move(v));
  }

  bool operator==(const GammaSet& o) const {
    if (v_.size() != o.v_.size()) return false;
    for (std::size_t i = 0; i < v_.size(); ++i)
      if (!(v_[i] == o.v_[i])) return false;
    return true;
  }
  bool operator!=(const GammaSet& o) const { return !(*this == o); }

  std::size_t hash() const {
    std::size_t h = 1469598103934665603ull;
    for (Formula f : v_) {
      h ^= static_cast<std::size_t>(f.id()) + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return h;
  }

  std::string render() const {
    std::string s = "{";
    bool first = true;
    for (Formula f : v_) {
      if (!first) s += ", ";
      first = false;
      s += cpdl::render(f);
    }
    s += "}";
    return s;
  }

 private:
  std::vector<Formula> v_;
};

inline int gamma_compare(const GammaSet& a, const GammaSet& b) {
  const auto& x = a.items();
  const auto& y = b.items();
  std::size_t n = std::min(x.size(), y.size());
  for (std::size_t i = 0; i < n; ++i) {
    int c = compare(x[i], y[i]);
    if (c != 0) return c;
  }
  if (x.size() != y.size()) return x.size() < y.size() ? -1 : 1;
  return 0;
}

// Collection of alternative strengthenings, kept sorted and unique.
using AltSet = std::vector<GammaSet>;

inline void alt_insert(AltSet& alts, const GammaSet& g) {
  auto it = std::lower_bound(alts.begin(), alts.end(), g,
                             [](const GammaSet& a, const GammaSet& b) {
                               return gamma_compare(a, b) < 0;
                             });
  if (it != alts.end() && *it == g) return;
  alts.insert(it, g);
}

inline AltSet alt_union(const AltSet& a, const AltSet& b) {
  AltSet out = a;
  for (const GammaSet& g : b) alt_insert(out, g);
  return out;
}

enum class NodeKind : std::uint8_t { State, Alpha, Beta, Special };

enum class EdgeKind : std::uint8_t { Plain, ByFormula, ByAltSet, Cs };

struct EdgeLabel {
  EdgeKind kind = EdgeKind::Plain;
  std::optional<Formula> fml;   // ByFormula
  std::optional<GammaSet> set;  // ByAltSet

  static EdgeLabel plain() { return {}; }
  static EdgeLabel by_formula(Formula f) {
    EdgeLabel l;
    l.kind = EdgeKind::ByFormula;
    l.fml = f;
    return l;
  }
  static EdgeLabel by_alt(GammaSet g) {
    EdgeLabel l;
    l.kind = EdgeKind::ByAltSet;
    l.set = std::move(g);
    return l;
  }
  static EdgeLabel cs() {
    EdgeLabel l;
    l.kind = EdgeKind::Cs;
    return l;
  }

  bool operator==(const EdgeLabel& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
      case EdgeKind::Plain:
      case EdgeKind::Cs:
        return true;
      case EdgeKind::ByFormula:
        return *fml == *o.fml;
      case EdgeKind::ByAltSet:
        return *set == *o.set;
    }
    return false;
  }
};

struct PrsPair {
  NodeId node;
  Formula fml;

  bool operator==(const PrsPair& o) const {
    return node == o.node && fml == o.fml;
  }
  bool operator<(const PrsPair& o) const {
    if (node != o.node) return node < o.node;
    return compare(fml, o.fml) < 0;
  }
};

// One tracked eventuality. fulfilled==true marks a pending-free entry; a
// key that is absent from the map means the same thing to readers but the
// two forms are kept distinct so recomputation is stable.
struct PrsEntry {
  bool fulfilled = false;
  std::vector<PrsPair> pairs;  // sorted, unique; empty+!fulfilled triggers closure

  static PrsEntry marker() {
    PrsEntry e;
    e.fulfilled = true;
    return e;
  }
  static PrsEntry of(std::vector<PrsPair> p) {
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
    PrsEntry e;
    e.pairs = std::move(p);
    return e;
  }

  bool operator==(const PrsEntry& o) const {
    return fulfilled == o.fulfilled && pairs == o.pairs;
  }
};

using PrsMap = std::map<Formula, PrsEntry, FmlLess>;

enum class StsKind : std::uint8_t { Unexp, Undef, Closed, Open };

struct Status {
  StsKind kind = StsKind::Unexp;
  AltSet alt;  // meaningful once defined; empty before
  PrsMap prs;  // open nodes only

  static Status unexp() { return {}; }
  static Status undef() {
    Status s;
    s.kind = StsKind::Undef;
    return s;
  }
  static Status closed(AltSet alt) {
    Status s;
    s.kind = StsKind::Closed;
    s.alt = std::move(alt);
    return s;
  }
  static Status open(PrsMap prs, AltSet alt) {
    Status s;
    s.kind = StsKind::Open;
    s.prs = std::move(prs);
    s.alt = std::move(alt);
    return s;
  }

  bool defined() const { return kind == StsKind::Closed || kind == StsKind::Open; }

  bool operator==(const Status& o) const {
    if (kind != o.kind || alt != o.alt) return false;
    if (prs.size() != o.prs.size()) return false;
    auto i = prs.begin();
    auto j = o.prs.begin();
    for (; i != prs.end(); ++i, ++j) {
      if (!(i->first == j->first) || !(i->second == j->second)) return false;
    }
    return true;
  }
  bool operator!=(const Status& o) const { return !(*this == o); }

  std::string render() const {
    switch (kind) {
      case StsKind::Unexp: return "unexp";
      case StsKind::Undef: return "undef";
      case StsKind::Closed: {
        std::string s = "closed(";
        bool first = true;
        for (const GammaSet& g : alt) {
          if (!first) s += ", ";
          first = false;
          s += g.render();
        }
        return s + ")";
      }
      case StsKind::Open: {
        std::string s = "open(prs:[";
        bool first = true;
        for (const auto& [f, e] : prs) {
          if (!first) s += "; ";
          first = false;
          s += cpdl::render(f) + (e.fulfilled ? " ok" : " -> {");
          if (!e.fulfilled) {
            bool f2 = true;
            for (const PrsPair& p : e.pairs) {
              if (!f2) s += ", ";
              f2 = false;
              s += "(" + std::to_string(p.node) + "," + cpdl::render(p.fml) + ")";
            }
            s += "}";
          }
        }
        s += "], alt:[";
        first = true;
        for (const GammaSet& g : alt) {
          if (!first) s += ", ";
          first = false;
          s += g.render();
        }
        return s + "])";
      }
    }
    return "?";
  }
};

struct Edge {
  NodeId to;
  EdgeLabel label;
};

using AnnMap = std::map<Formula, Formula, FmlLess>;

struct Node {
  NodeId id = kNoNode;
  NodeKind kind = NodeKind::State;
  GammaSet gamma;
  AnnMap ann;
  NodeId pst = kNoNode;                 // parent state; root and states: none
  std::optional<LiteralProgram> ppr;    // program that reached this phase
  std::uint32_t idx = 0;                // 0 until defined
  Status sts;

  std::vector<Edge> edges;
  std::vector<NodeId> parents;     // graph parents, unique
  std::set<NodeId> consumers;      // nodes whose status computation read ours

  // Derived once at creation, immutable afterwards.
  Formula principal;  // valid for Alpha/Beta nodes
  bool has_principal = false;
  bool incompatible = false;       // specials whose strengthening set is nonempty

  bool expanded() const { return sts.kind != StsKind::Unexp; }

  const Edge* find_edge(const EdgeLabel& l) const {
    for (const Edge& e : edges)
      if (e.label == l) return &e;
    return nullptr;
  }
  NodeId cs_child() const {
    const Edge* e = find_edge(EdgeLabel::cs());
    return e ? e->to : kNoNode;
  }
};

class Graph {
 public:
  NodeId create_node(NodeKind kind, GammaSet gamma, AnnMap ann, NodeId pst,
                     std::optional<LiteralProgram> ppr) {
    NodeId id = static_cast<NodeId>(nodes_.size());
    nodes_.emplace_back();
    Node& n = nodes_.back();
    n.id = id;
    n.kind = kind;
    n.gamma = std::move(gamma);
    n.ann = std::move(ann);
    n.pst = pst;
    n.ppr = ppr;
    if (kind == NodeKind::State) {
      state_index_[n.gamma.hash()].push_back(id);
    }
    return id;
  }

  Node& node(NodeId id) { return nodes_[id]; }
  const Node& node(NodeId id) const { return nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }

  void add_edge(NodeId from, NodeId to, EdgeLabel label) {
    Node& f = nodes_[from];
    if (label.kind != EdgeKind::Plain && f.find_edge(label) != nullptr)
      throw std::logic_error("duplicate labelled edge from node " +
                             std::to_string(from));
    f.edges.push_back({to, label});
    Node& t = nodes_[to];
    if (std::find(t.parents.begin(), t.parents.end(), from) == t.parents.end())
      t.parents.push_back(from);
  }

  NodeId find_state(const GammaSet& gamma) const {
    auto it = state_index_.find(gamma.hash());
    if (it == state_index_.end()) return kNoNode;
    for (NodeId id : it->second)
      if (nodes_[id].gamma == gamma) return id;
    return kNoNode;
  }

  // Applies a status. Assigns the definition timestamp on the transition
  // into a defined status; rejects any change to a closed node.
  void set_status(NodeId id, Status s) {
    Node& n = nodes_[id];
    if (n.sts.kind == StsKind::Closed)
      throw std::logic_error("status of closed node " + std::to_string(id) +
                             " may not change");
    bool was_defined = n.sts.defined();
    n.sts = std::move(s);
    if (!was_defined && n.sts.defined()) n.idx = next_idx_++;
  }

  // y strictly precedes x in definition order.
  bool defined_before(NodeId y, NodeId x) const {
    const Node& ny = nodes_[y];
    const Node& nx = nodes_[x];
    return ny.idx != 0 && (nx.idx == 0 || ny.idx < nx.idx);
  }

  std::uint32_t timestamps_issued() const { return next_idx_ - 1; }

 private:
  std::deque<Node> nodes_;
  std::unordered_map<std::size_t, std::vector<NodeId>> state_index_;
  std::uint32_t next_idx_ = 1;
};

}  // namespace cpdl
