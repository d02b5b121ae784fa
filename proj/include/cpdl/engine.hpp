#pragma once
// Tableau rules. Expansion creates a node's children once; status
// determination computes what a node's status should be from its children's
// current statuses, creating strengthening children on demand. Pending
// eventualities are tracked as (node, formula) pairs; a pair may only point
// at nodes not defined before the owner, which bounds every recursion here.

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "cpdl/graph.hpp"

namespace cpdl {

// Follows the annotation chain at x starting from f. Returns the chain's
// end, or nullopt when the chain loops without leaving the world.
inline std::optional<Formula> defer(const Node& x, Formula f) {
  std::set<Id> seen;
  Formula cur = f;
  for (;;) {
    if (!seen.insert(cur.id()).second) return std::nullopt;
    auto it = x.ann.find(cur);
    if (it == x.ann.end()) return cur;
    cur = it->second;
  }
}

// A set is locally refutable if it has a complementary pair or an
// eventuality whose annotation chain loops at this world.
inline bool has_contradiction(const Node& x) {
  for (Formula f : x.gamma.items())
    if (x.gamma.contains(negate_nnf(f))) return true;
  for (Formula f : x.gamma.items())
    if (f.is_eventuality() && !defer(x, f).has_value()) return true;
  return false;
}

// Does f still force a decomposition step at (gamma, ann)?
inline bool decomposition_required(Formula f, const GammaSet& gamma,
                                   const AnnMap& ann) {
  Classified c = classify(f);
  if (c.kind == FormulaKind::Alpha) {
    bool missing = false;
    for (Formula p : c.parts)
      if (!gamma.contains(p)) missing = true;
    return missing || (f.is_eventuality() && ann.find(f) == ann.end());
  }
  if (c.kind == FormulaKind::Beta) {
    bool none = !gamma.contains(c.parts[0]) && !gamma.contains(c.parts[1]);
    return none || (f.is_eventuality() && ann.find(f) == ann.end());
  }
  return false;
}

// The first decomposable formula in canonical order fixes the node's kind.
inline NodeKind derive_kind(const GammaSet& gamma, const AnnMap& ann,
                            Formula* principal) {
  for (Formula f : gamma.items()) {
    if (decomposition_required(f, gamma, ann)) {
      *principal = f;
      return classify(f).kind == FormulaKind::Alpha ? NodeKind::Alpha
                                                    : NodeKind::Beta;
    }
  }
  return NodeKind::Special;
}

class Engine {
 public:
  explicit Engine(Graph& g) : g_(g) {}

  std::uint64_t prs_cache_hits = 0;

  NodeId create_root(Formula f) {
    return g_.create_node(NodeKind::State, GammaSet::of({f}), {}, kNoNode,
                          std::nullopt);
  }

  // Formulas a strengthened alternative would add: bodies of boxes along the
  // inverted incoming program that the parent state does not already have.
  GammaSet strengthening(const Node& x) const {
    if (!x.ppr) throw std::logic_error("strengthening: node has no incoming program");
    LiteralProgram inv = x.ppr->inverted();
    std::vector<Formula> v;
    for (Formula f : x.gamma.items()) {
      if (f.op() == FmlOp::Box && f.prog().is_literal() &&
          f.prog().literal() == inv)
        v.push_back(f.body());
    }
    return GammaSet::of(std::move(v)).minus(g_.node(x.pst).gamma);
  }

  NodeId create_internal(GammaSet gamma, AnnMap ann, NodeId pst,
                         std::optional<LiteralProgram> ppr) {
    Formula principal;
    NodeKind k = derive_kind(gamma, ann, &principal);
    NodeId id = g_.create_node(k, std::move(gamma), std::move(ann), pst, ppr);
    Node& n = g_.node(id);
    if (k == NodeKind::Alpha || k == NodeKind::Beta) {
      n.principal = principal;
      n.has_principal = true;
    }
    if (k == NodeKind::Special) n.incompatible = !strengthening(n).empty();
    return id;
  }

  // Rule 1. Returns nodes created along the way.
  std::vector<NodeId> expand(NodeId xid) {
    std::vector<NodeId> created;
    if (g_.node(xid).sts.kind != StsKind::Unexp)
      throw std::logic_error("expand: node already expanded");
    if (has_contradiction(g_.node(xid))) {
      g_.set_status(xid, Status::closed({}));
      return created;
    }
    switch (g_.node(xid).kind) {
      case NodeKind::State: {
        const std::vector<Formula> items = g_.node(xid).gamma.items();
        for (Formula f : items) {
          Classified c = classify(f);
          if (c.kind != FormulaKind::DiamondLit) continue;
          std::vector<Formula> child{c.lit_body};
          for (Formula h : items) {
            Classified ch = classify(h);
            if (ch.kind == FormulaKind::BoxLit && ch.lit == c.lit)
              child.push_back(ch.lit_body);
          }
          NodeId y = create_internal(GammaSet::of(std::move(child)), {}, xid,
                                     c.lit);
          g_.add_edge(xid, y, EdgeLabel::by_formula(f));
          created.push_back(y);
        }
        break;
      }
      case NodeKind::Alpha: {
        const Node& x = g_.node(xid);
        Classified c = classify(x.principal);
        std::vector<Formula> v = x.gamma.items();
        for (Formula p : c.parts) v.push_back(p);
        AnnMap ann = x.ann;
        if (x.principal.is_eventuality()) ann[x.principal] = c.parts[0];
        NodeId y = create_internal(GammaSet::of(std::move(v)), std::move(ann),
                                   x.pst, x.ppr);
        g_.add_edge(xid, y, EdgeLabel::plain());
        created.push_back(y);
        break;
      }
      case NodeKind::Beta: {
        for (int i = 0; i < 2; ++i) {
          const Node& x = g_.node(xid);
          Classified c = classify(x.principal);
          std::vector<Formula> v = x.gamma.items();
          v.push_back(c.parts[i]);
          AnnMap ann = x.ann;
          if (x.principal.is_eventuality()) ann[x.principal] = c.parts[i];
          NodeId y = create_internal(GammaSet::of(std::move(v)), std::move(ann),
                                     x.pst, x.ppr);
          g_.add_edge(xid, y, EdgeLabel::plain());
          created.push_back(y);
        }
        break;
      }
      case NodeKind::Special: {
        NodeId t = g_.find_state(g_.node(xid).gamma);
        if (t == kNoNode) {
          t = g_.create_node(NodeKind::State, g_.node(xid).gamma, {}, kNoNode,
                             std::nullopt);
          created.push_back(t);
        }
        g_.add_edge(xid, t, EdgeLabel::cs());
        break;
      }
    }
    g_.set_status(xid, Status::undef());
    return created;
  }

  struct DetCtx {
    NodeId x = kNoNode;
    std::map<std::pair<NodeId, Id>, std::optional<std::vector<PrsPair>>> memo;
    std::vector<NodeId> created;
  };

  using RawPrs = std::map<Formula, std::optional<std::vector<PrsPair>>, FmlLess>;

  // Rules 2 and 3 both evaluate this; the caller stores the result.
  Status det_status(NodeId xid, DetCtx& ctx) {
    ctx.x = xid;
    switch (g_.node(xid).kind) {
      case NodeKind::State:
        return det_sts_state(xid, ctx);
      case NodeKind::Alpha:
      case NodeKind::Beta:
        return det_sts_alphabeta(xid, ctx);
      case NodeKind::Special:
        return det_sts_special(xid, ctx);
    }
    throw std::logic_error("det_status: bad node kind");
  }

  // Pending pairs the eventuality f at child y contributes, from the
  // perspective of ctx.x. nullopt: fulfilled with nothing pending.
  std::optional<std::vector<PrsPair>> det_prs_child(DetCtx& ctx, NodeId yid,
                                                    Formula f) {
    g_.node(yid).consumers.insert(ctx.x);
    std::pair<NodeId, Id> key{yid, f.id()};
    auto hit = ctx.memo.find(key);
    if (hit != ctx.memo.end()) {
      ++prs_cache_hits;
      return hit->second;
    }
    std::optional<std::vector<PrsPair>> out;
    const Node& y = g_.node(yid);
    if (y.sts.kind == StsKind::Closed) {
      out = std::vector<PrsPair>{};
    } else if (!y.sts.defined() || !g_.defined_before(yid, ctx.x)) {
      out = std::vector<PrsPair>{{yid, f}};
    } else {
      auto it = y.sts.prs.find(f);
      if (it == y.sts.prs.end() || it->second.fulfilled) {
        out = std::nullopt;
      } else {
        bool fulfilled = false;
        std::vector<PrsPair> acc;
        for (const PrsPair& p : it->second.pairs) {
          auto sub = det_prs_child(ctx, p.node, p.fml);
          if (!sub.has_value())
            fulfilled = true;
          else
            acc.insert(acc.end(), sub->begin(), sub->end());
        }
        if (fulfilled)
          out = std::nullopt;
        else
          out = std::move(acc);
      }
    }
    ctx.memo.emplace(key, out);
    return out;
  }

 private:
  Graph& g_;

  std::optional<std::vector<PrsPair>> join_children(
      DetCtx& ctx, const std::vector<NodeId>& ys, Formula f) {
    bool fulfilled = false;
    std::vector<PrsPair> acc;
    for (NodeId y : ys) {
      auto sub = det_prs_child(ctx, y, f);
      if (!sub.has_value())
        fulfilled = true;
      else
        acc.insert(acc.end(), sub->begin(), sub->end());
    }
    if (fulfilled) return std::nullopt;
    return acc;
  }

  // Resolves pairs pointing at x itself: an entry is fulfilled if its
  // self-reachable cluster touches a fulfilled entry, and otherwise keeps
  // the union of the cluster's outward pairs. No self pair survives.
  PrsMap filter_prs(NodeId xid, const RawPrs& raw) {
    PrsMap out;
    for (const auto& [f, val] : raw) {
      if (!val.has_value()) {
        out[f] = PrsEntry::marker();
        continue;
      }
      std::vector<Formula> delta{f};
      std::set<Id> seen{f.id()};
      bool fulfilled = false;
      for (std::size_t i = 0; i < delta.size() && !fulfilled; ++i) {
        auto it = raw.find(delta[i]);
        if (it == raw.end() || !it->second.has_value()) {
          fulfilled = true;
          break;
        }
        for (const PrsPair& p : *it->second) {
          if (p.node == xid && seen.insert(p.fml.id()).second)
            delta.push_back(p.fml);
        }
      }
      if (fulfilled) {
        out[f] = PrsEntry::marker();
        continue;
      }
      std::vector<PrsPair> pairs;
      for (Formula d : delta)
        for (const PrsPair& p : *raw.find(d)->second)
          if (p.node != xid) pairs.push_back(p);
      out[f] = PrsEntry::of(std::move(pairs));
    }
    return out;
  }

  Status det_sts_alphabeta(NodeId xid, DetCtx& ctx) {
    const Node& x = g_.node(xid);
    std::vector<NodeId> ys;
    for (const Edge& e : x.edges)
      if (e.label.kind == EdgeKind::Plain) ys.push_back(e.to);
    bool all_closed = !ys.empty();
    AltSet alt;
    for (NodeId y : ys) {
      const Node& ny = g_.node(y);
      if (ny.sts.kind != StsKind::Closed) all_closed = false;
      alt = alt_union(alt, ny.sts.alt);
    }
    if (all_closed) return Status::closed(std::move(alt));
    RawPrs raw;
    for (Formula f : x.gamma.items())
      if (f.is_eventuality()) raw[f] = join_children(ctx, ys, f);
    return Status::open(filter_prs(xid, raw), std::move(alt));
  }

  Status det_sts_state(NodeId xid, DetCtx& ctx) {
    const Node& x = g_.node(xid);
    struct Child {
      Formula label;
      Formula body;
      NodeId y;
    };
    std::vector<Child> cs;
    for (Formula f : x.gamma.items()) {
      Classified c = classify(f);
      if (c.kind != FormulaKind::DiamondLit) continue;
      const Edge* e = x.find_edge(EdgeLabel::by_formula(f));
      if (!e) throw std::logic_error("state missing successor edge");
      cs.push_back({f, c.lit_body, e->to});
    }
    AltSet alt;
    for (const Child& c : cs) {
      const Node& ny = g_.node(c.y);
      if (ny.sts.kind == StsKind::Closed) return Status::closed(ny.sts.alt);
      alt = alt_union(alt, ny.sts.alt);
    }
    RawPrs raw;
    for (const Child& c : cs)
      if (c.body.is_eventuality())
        raw[c.label] = det_prs_child(ctx, c.y, c.body);
    return Status::open(filter_prs(xid, raw), std::move(alt));
  }

  Status det_sts_special(NodeId xid, DetCtx& ctx) {
    {
      const Node& x = g_.node(xid);
      GammaSet streng = strengthening(x);
      if (!streng.empty()) return Status::closed({std::move(streng)});
    }
    NodeId y0 = g_.node(xid).cs_child();
    if (y0 == kNoNode) throw std::logic_error("special node lacks its state");
    // Materialize missing strengthening children suggested by the state.
    {
      const AltSet suggestions = g_.node(y0).sts.alt;
      for (const GammaSet& gi : suggestions) {
        EdgeLabel l = EdgeLabel::by_alt(gi);
        if (g_.node(xid).find_edge(l) == nullptr) {
          const Node& x = g_.node(xid);
          NodeId y = create_internal(x.gamma.union_with(gi), x.ann, x.pst,
                                     x.ppr);
          g_.add_edge(xid, y, l);
          ctx.created.push_back(y);
        }
      }
    }
    const Node& x = g_.node(xid);
    std::vector<NodeId> altkids;
    for (const Edge& e : x.edges)
      if (e.label.kind == EdgeKind::ByAltSet) altkids.push_back(e.to);
    bool all_closed = g_.node(y0).sts.kind == StsKind::Closed;
    AltSet alt;
    for (NodeId y : altkids) {
      const Node& ny = g_.node(y);
      if (ny.sts.kind != StsKind::Closed) all_closed = false;
      alt = alt_union(alt, ny.sts.alt);
    }
    if (all_closed) return Status::closed(std::move(alt));
    std::vector<NodeId> all{y0};
    all.insert(all.end(), altkids.begin(), altkids.end());
    RawPrs raw;
    for (Formula f : x.gamma.items()) {
      if (!f.is_eventuality()) continue;
      std::optional<Formula> d = defer(x, f);
      if (!d)
        throw std::logic_error("looping annotation survived expansion");
      if (!d->is_eventuality()) continue;  // fulfilled within this world
      if (classify(*d).kind != FormulaKind::DiamondLit)
        throw std::logic_error("unsaturated eventuality at a saturated node");
      raw[f] = join_children(ctx, all, *d);
    }
    return Status::open(filter_prs(xid, raw), std::move(alt));
  }
};

}  // namespace cpdl
