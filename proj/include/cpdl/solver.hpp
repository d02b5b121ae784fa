#pragma once
// Drives the rules to quiescence. Two interchangeable schedulers:
//
//  - queue: a dirty-queue propagates status changes to graph parents and to
//    recorded readers; between drains it prefers defining a node one of
//    whose children is open with nothing pending, then expanding the newest
//    unexpanded node, then defining within the newest saturation phase,
//    preferring nodes whose children are all defined over members of
//    not-yet-defined cycles. Exhausted eventualities are closed only when
//    everything else is quiet.
//  - naive: lowest-numbered node, expansion before definition before a full
//    stale-status rescan before exhaustion closing.
//
// Verdict comes from the root: open means satisfiable.

#include <chrono>
#include <cstdint>
#include <deque>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpdl/engine.hpp"

namespace cpdl {

enum class Verdict { Sat, Unsat, Resource };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Sat: return "SAT";
    case Verdict::Unsat: return "UNSAT";
    case Verdict::Resource: return "RESOURCE";
  }
  return "?";
}

enum class SchedulerKind { Queue, Naive };

struct SolverOptions {
  SchedulerKind scheduler = SchedulerKind::Queue;
  std::uint64_t max_nodes = 1000000;
  std::uint64_t max_steps = 20000000;
  std::int64_t timeout_ms = 0;  // 0: unlimited
  bool check_invariants = false;
  bool record_trace = false;
};

struct SolveStats {
  std::string verdict;
  std::uint64_t nodes_total = 0;
  std::uint64_t states = 0;
  std::uint64_t alpha_nodes = 0;
  std::uint64_t beta_nodes = 0;
  std::uint64_t special_nodes = 0;
  std::uint64_t closed = 0;
  std::uint64_t open = 0;
  std::uint64_t rule1 = 0;
  std::uint64_t rule2 = 0;
  std::uint64_t rule3 = 0;
  std::uint64_t rule4 = 0;
  std::uint64_t prs_cache_hits = 0;
  double time_ms = 0.0;
};

struct TraceEvent {
  std::uint64_t seq;
  NodeId node;
  Status sts;
};

class Solver {
 public:
  static constexpr const char* kBootstrapAtom = "__dummy";

  explicit Solver(Formula input, SolverOptions opt = {})
      : opt_(opt), eng_(g_), input_(input) {
    Formula wrapped = mk_dia(mk_atom(kBootstrapAtom), input);
    for (Formula f : closure(wrapped)) closure_ids_.insert(f.id());
    root_ = eng_.create_root(wrapped);
    unexpanded_.push_back(root_);
  }

  Verdict run() {
    auto t0 = std::chrono::steady_clock::now();
    start_ = t0;
    Verdict v = opt_.scheduler == SchedulerKind::Queue ? loop_queue()
                                                       : loop_naive();
    auto t1 = std::chrono::steady_clock::now();
    stats_.time_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    stats_.verdict = verdict_name(v);
    stats_.nodes_total = g_.size();
    for (NodeId i = 0; i < g_.size(); ++i) {
      const Node& n = g_.node(i);
      switch (n.kind) {
        case NodeKind::State: ++stats_.states; break;
        case NodeKind::Alpha: ++stats_.alpha_nodes; break;
        case NodeKind::Beta: ++stats_.beta_nodes; break;
        case NodeKind::Special: ++stats_.special_nodes; break;
      }
      if (n.sts.kind == StsKind::Closed) ++stats_.closed;
      if (n.sts.kind == StsKind::Open) ++stats_.open;
    }
    stats_.prs_cache_hits = eng_.prs_cache_hits;
    verdict_ = v;
    return v;
  }

  Graph& graph() { return g_; }
  const Graph& graph() const { return g_; }
  NodeId root() const { return root_; }
  Formula input() const { return input_; }
  const SolveStats& stats() const { return stats_; }
  const std::vector<TraceEvent>& history() const { return history_; }
  Verdict verdict() const { return verdict_; }

  // Structural well-formedness of the whole graph; throws on violation.
  void validate() const {
    std::set<std::uint32_t> idxs;
    std::vector<NodeId> states;
    for (NodeId i = 0; i < g_.size(); ++i) {
      const Node& n = g_.node(i);
      auto bad = [&](const std::string& what) {
        throw std::logic_error("invariant violated at node " +
                               std::to_string(i) + ": " + what);
      };
      for (Formula f : n.gamma.items())
        if (!closure_ids_.count(f.id())) bad("formula outside closure");
      if (n.kind == NodeKind::State) {
        states.push_back(i);
        if (n.pst != kNoNode || n.ppr || !n.ann.empty())
          bad("state with phase attributes");
      } else {
        if (n.pst == kNoNode || !n.ppr) bad("phase node lacking parent state");
      }
      if (n.sts.defined() != (n.idx != 0)) bad("timestamp/status mismatch");
      if (n.idx != 0 && !idxs.insert(n.idx).second) bad("duplicate timestamp");
      for (const GammaSet& a : n.sts.alt)
        if (a.empty()) bad("empty alternative set");
      if (n.sts.kind == StsKind::Open) {
        for (const auto& [f, e] : n.sts.prs) {
          if (e.fulfilled) continue;
          for (const PrsPair& p : e.pairs) {
            if (p.node == i) bad("self pair survived filtering");
            const Node& y = g_.node(p.node);
            if (!(n.idx != 0 && (y.idx == 0 || n.idx < y.idx)))
              bad("pair points backwards in definition order");
            if (!y.gamma.contains(p.fml)) bad("pair formula outside target set");
            if (y.kind == NodeKind::State &&
                classify(p.fml).kind != FormulaKind::DiamondLit)
              bad("state pair with a non-successor formula");
          }
        }
      }
      int cs_edges = 0;
      for (const Edge& e : n.edges) {
        switch (e.label.kind) {
          case EdgeKind::Plain:
            if (n.kind != NodeKind::Alpha && n.kind != NodeKind::Beta)
              bad("plain edge outside decomposition");
            break;
          case EdgeKind::ByFormula:
            if (n.kind != NodeKind::State) bad("successor edge off a state");
            break;
          case EdgeKind::Cs:
            ++cs_edges;
            if (n.kind != NodeKind::Special) bad("cache edge off a special");
            if (g_.node(e.to).kind != NodeKind::State)
              bad("cache edge not to a state");
            break;
          case EdgeKind::ByAltSet:
            if (n.kind != NodeKind::Special)
              bad("alternative edge off a special");
            if (g_.node(e.to).gamma != n.gamma.union_with(*e.label.set))
              bad("alternative child has wrong formula set");
            break;
        }
      }
      if (cs_edges > 1) bad("multiple cache edges");
      if (n.kind == NodeKind::Special && n.expanded() &&
          n.sts.kind != StsKind::Closed && cs_edges != 1)
        bad("expanded special lacking its cache edge");
    }
    for (std::size_t a = 0; a < states.size(); ++a)
      for (std::size_t b = a + 1; b < states.size(); ++b)
        if (g_.node(states[a]).gamma == g_.node(states[b]).gamma)
          throw std::logic_error("two states share a formula set");
    if (!g_.node(root_).sts.alt.empty())
      throw std::logic_error("root accumulated alternatives");
  }

 private:
  SolverOptions opt_;
  Graph g_;
  Engine eng_;
  Formula input_;
  NodeId root_ = kNoNode;
  std::set<Id> closure_ids_;

  std::deque<NodeId> dirty_;
  std::vector<char> in_dirty_;
  std::vector<NodeId> unexpanded_;  // ascending creation order

  SolveStats stats_;
  std::vector<TraceEvent> history_;
  std::uint64_t seq_ = 0;
  std::uint64_t steps_ = 0;
  Verdict verdict_ = Verdict::Resource;
  std::chrono::steady_clock::time_point start_;

  bool budget_exceeded() {
    if (g_.size() > opt_.max_nodes) return true;
    if (++steps_ > opt_.max_steps) return true;
    if (opt_.timeout_ms > 0 && (steps_ & 0xffu) == 0) {
      auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - start_)
                    .count();
      if (ms > opt_.timeout_ms) return true;
    }
    return false;
  }

  void push_dirty(NodeId x) {
    if (opt_.scheduler != SchedulerKind::Queue) return;
    if (x >= in_dirty_.size()) in_dirty_.resize(g_.size(), 0);
    if (in_dirty_[x]) return;
    in_dirty_[x] = 1;
    dirty_.push_back(x);
  }

  void notify(NodeId x) {
    const Node& n = g_.node(x);
    std::set<NodeId> targets(n.parents.begin(), n.parents.end());
    targets.insert(n.consumers.begin(), n.consumers.end());
    for (NodeId t : targets) push_dirty(t);
  }

  void record(NodeId x) {
    if (opt_.record_trace) history_.push_back({seq_++, x, g_.node(x).sts});
  }

  void after_change(NodeId x) {
    record(x);
    notify(x);
    if (opt_.check_invariants) validate();
  }

  void absorb_created(Engine::DetCtx& ctx) {
    for (NodeId c : ctx.created) unexpanded_.push_back(c);
  }

  void expand_node(NodeId x) {
    std::vector<NodeId> created = eng_.expand(x);
    ++stats_.rule1;
    for (NodeId c : created) unexpanded_.push_back(c);
    after_change(x);
  }

  void define_node(NodeId x) {
    Engine::DetCtx ctx;
    Status st = eng_.det_status(x, ctx);
    absorb_created(ctx);
    ++stats_.rule2;
    g_.set_status(x, std::move(st));
    after_change(x);
  }

  // One stale-status recomputation; commits side effects regardless.
  // Returns true if the stored status changed.
  bool refresh_node(NodeId x) {
    Engine::DetCtx ctx;
    Status st = eng_.det_status(x, ctx);
    absorb_created(ctx);
    if (st != g_.node(x).sts) {
      ++stats_.rule3;
      g_.set_status(x, std::move(st));
      after_change(x);
      return true;
    }
    return false;
  }

  static bool all_fulfilled(const PrsMap& prs) {
    for (const auto& [f, e] : prs)
      if (!e.fulfilled) return false;
    return true;
  }

  NodeId find_class_a() const {
    for (NodeId x = static_cast<NodeId>(g_.size()); x-- > 0;) {
      const Node& n = g_.node(x);
      if (n.sts.kind != StsKind::Undef) continue;
      if (n.kind == NodeKind::Special && n.incompatible) continue;
      for (const Edge& e : n.edges) {
        const Node& c = g_.node(e.to);
        if (c.sts.kind == StsKind::Open && all_fulfilled(c.sts.prs)) return x;
      }
    }
    return kNoNode;
  }

  NodeId find_exhausted() const {
    for (NodeId x = 0; x < g_.size(); ++x) {
      const Node& n = g_.node(x);
      if (n.sts.kind != StsKind::Open) continue;
      for (const auto& [f, e] : n.sts.prs)
        if (!e.fulfilled && e.pairs.empty()) return x;
    }
    return kNoNode;
  }

  // Members of cycles within the not-yet-defined subgraph.
  std::vector<char> undef_cycle_members() const {
    std::size_t n = g_.size();
    std::vector<char> on_cycle(n, 0);
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<char> onstk(n, 0);
    std::vector<NodeId> stk;
    int counter = 0;
    struct Frame {
      NodeId v;
      std::size_t ei;
    };
    for (NodeId s = 0; s < n; ++s) {
      if (g_.node(s).sts.kind != StsKind::Undef || index[s] != -1) continue;
      std::vector<Frame> call{{s, 0}};
      index[s] = low[s] = counter++;
      stk.push_back(s);
      onstk[s] = 1;
      while (!call.empty()) {
        Frame& f = call.back();
        const Node& nf = g_.node(f.v);
        if (f.ei < nf.edges.size()) {
          NodeId w = nf.edges[f.ei++].to;
          if (g_.node(w).sts.kind != StsKind::Undef) continue;
          if (index[w] == -1) {
            index[w] = low[w] = counter++;
            stk.push_back(w);
            onstk[w] = 1;
            call.push_back({w, 0});
          } else if (onstk[w]) {
            low[f.v] = std::min(low[f.v], index[w]);
          }
        } else {
          NodeId v = f.v;
          if (low[v] == index[v]) {
            std::vector<NodeId> comp;
            for (;;) {
              NodeId w = stk.back();
              stk.pop_back();
              onstk[w] = 0;
              comp.push_back(w);
              if (w == v) break;
            }
            if (comp.size() >= 2)
              for (NodeId w : comp) on_cycle[w] = 1;
          }
          call.pop_back();
          if (!call.empty())
            low[call.back().v] = std::min(low[call.back().v], low[v]);
        }
      }
    }
    return on_cycle;
  }

  // Definition candidates: every child defined, or on an undefined cycle.
  // The newest saturation phase goes first; within it, settled children
  // beat cycle membership, newer beats older.
  NodeId pick_grouped_define() const {
    std::vector<char> cyc = undef_cycle_members();
    NodeId best = kNoNode;
    NodeId best_key = 0;
    bool best_ready = false;
    for (NodeId x = 0; x < g_.size(); ++x) {
      const Node& n = g_.node(x);
      if (n.sts.kind != StsKind::Undef) continue;
      bool ready = true;
      for (const Edge& e : n.edges)
        if (!g_.node(e.to).sts.defined()) ready = false;
      bool on_cycle = cyc[x] != 0;
      if (!ready && !on_cycle) continue;
      NodeId key = n.kind == NodeKind::State ? x : n.pst;
      bool better;
      if (best == kNoNode)
        better = true;
      else if (key != best_key)
        better = key > best_key;
      else if (ready != best_ready)
        better = ready;
      else
        better = x > best;
      if (better) {
        best = x;
        best_key = key;
        best_ready = ready;
      }
    }
    return best;
  }

  Verdict loop_queue() {
    for (;;) {
      if (budget_exceeded()) return Verdict::Resource;
      if (g_.node(root_).sts.kind == StsKind::Closed) return Verdict::Unsat;
      if (!dirty_.empty()) {
        NodeId x = dirty_.front();
        dirty_.pop_front();
        in_dirty_[x] = 0;
        if (g_.node(x).sts.kind == StsKind::Open) refresh_node(x);
        continue;
      }
      if (NodeId x = find_class_a(); x != kNoNode) {
        define_node(x);
        continue;
      }
      if (!unexpanded_.empty()) {
        NodeId x = unexpanded_.back();
        unexpanded_.pop_back();
        expand_node(x);
        continue;
      }
      if (NodeId x = pick_grouped_define(); x != kNoNode) {
        define_node(x);
        continue;
      }
      if (NodeId x = find_exhausted(); x != kNoNode) {
        ++stats_.rule4;
        g_.set_status(x, Status::closed(g_.node(x).sts.alt));
        after_change(x);
        continue;
      }
      break;
    }
    const Node& rt = g_.node(root_);
    if (!rt.sts.defined())
      throw std::logic_error("quiescence with an undefined root");
    return rt.sts.kind == StsKind::Open ? Verdict::Sat : Verdict::Unsat;
  }

  Verdict loop_naive() {
    for (;;) {
      if (budget_exceeded()) return Verdict::Resource;
      if (g_.node(root_).sts.kind == StsKind::Closed) return Verdict::Unsat;
      NodeId pick = kNoNode;
      for (NodeId i = 0; i < g_.size(); ++i)
        if (g_.node(i).sts.kind == StsKind::Unexp) {
          pick = i;
          break;
        }
      if (pick != kNoNode) {
        expand_node(pick);
        continue;
      }
      for (NodeId i = 0; i < g_.size(); ++i)
        if (g_.node(i).sts.kind == StsKind::Undef) {
          pick = i;
          break;
        }
      if (pick != kNoNode) {
        define_node(pick);
        continue;
      }
      bool advanced = false;
      for (NodeId i = 0; i < g_.size() && !advanced; ++i) {
        if (g_.node(i).sts.kind != StsKind::Open) continue;
        Engine::DetCtx ctx;
        Status st = eng_.det_status(i, ctx);
        bool made = !ctx.created.empty();
        absorb_created(ctx);
        if (st != g_.node(i).sts) {
          ++stats_.rule3;
          g_.set_status(i, std::move(st));
          after_change(i);
          advanced = true;
        } else if (made) {
          advanced = true;  // fresh children need expansion before anything else
        }
      }
      if (advanced) continue;
      pick = find_exhausted();
      if (pick != kNoNode) {
        ++stats_.rule4;
        g_.set_status(pick, Status::closed(g_.node(pick).sts.alt));
        after_change(pick);
        continue;
      }
      break;
    }
    const Node& rt = g_.node(root_);
    if (!rt.sts.defined())
      throw std::logic_error("quiescence with an undefined root");
    return rt.sts.kind == StsKind::Open ? Verdict::Sat : Verdict::Unsat;
  }
};

// Convenience driver.
inline Verdict solve(Formula f, SolverOptions opt = {}) {
  Solver s(f, opt);
  return s.run();
}

}  // namespace cpdl
