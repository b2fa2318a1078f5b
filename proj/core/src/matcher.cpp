#include "cbkb/matcher.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <queue>

namespace cbkb {

namespace {

double effective_percent(const Quantifier& q) {
  return q.kind == QuantKind::most ? 50.0 : q.percent;
}

bool is_percent_like(const Quantifier& q) {
  return q.kind == QuantKind::at_least_percent || q.kind == QuantKind::most;
}

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

Interval interval_of(const Measure& m) {
  Interval i;
  if (m.comparator != Comparator::at_most) i.lo = m.magnitude;
  if (m.comparator != Comparator::at_least) i.hi = m.magnitude;
  return i;
}

}  // namespace

bool quantifier_subsumes(const Quantifier& general, const Quantifier& specific) {
  if (general == specific) return true;
  switch (general.kind) {
    case QuantKind::at_least:
      return (specific.kind == QuantKind::at_least || specific.kind == QuantKind::exact) &&
             specific.n >= general.n;
    case QuantKind::at_least_percent:
    case QuantKind::most:
      if (specific.kind == QuantKind::universal) return true;
      return is_percent_like(specific) &&
             effective_percent(specific) >= effective_percent(general);
    default: return false;
  }
}

bool is_instantiation(const Quantifier& general, const Quantifier& specific) {
  return general.kind == QuantKind::universal && specific.kind == QuantKind::individual;
}

bool term_subsumes(std::string_view general, std::string_view specific,
                   const Ontology& ont) {
  if (general == specific) return true;
  bool general_formal = ont.is_formal(general);
  bool specific_formal = ont.is_formal(specific);
  if (general_formal) return specific_formal && ont.reaches(specific, general);
  // Informal generalization: a label generalizes the terms bearing that name.
  std::vector<std::string> gs = ont.formal_terms_named(general);
  gs.emplace_back(general);
  std::vector<std::string> ss;
  if (!specific_formal) ss = ont.formal_terms_named(specific);
  ss.emplace_back(specific);
  for (const std::string& s : ss) {
    for (const std::string& g : gs) {
      if (s == g || ont.reaches(s, g)) return true;
    }
  }
  return false;
}

bool measure_refines(const std::optional<Measure>& general,
                     const std::optional<Measure>& specific) {
  if (!general) return true;
  if (!specific) return false;
  if (general->relation != specific->relation || general->unit != specific->unit) {
    return false;
  }
  Interval g = interval_of(*general), s = interval_of(*specific);
  return g.lo <= s.lo && s.hi <= g.hi;
}

namespace {

bool class_within(const ConceptNode& inner, const ConceptNode& outer, const Ontology& ont) {
  return term_subsumes(outer.term, inner.term, ont) &&
         measure_refines(outer.measure, inner.measure);
}

bool class_equal(const ConceptNode& a, const ConceptNode& b, const Ontology& ont) {
  return class_within(a, b, ont) && class_within(b, a, ont);
}

enum class NodeFit : char { none = 0, yes = 1, instantiation = 2 };

NodeFit node_fit(const ConceptNode& g, const ConceptNode& s, const Ontology& ont) {
  const Quantifier& qg = g.quantifier;
  const Quantifier& qs = s.quantifier;
  switch (qg.kind) {
    case QuantKind::individual:
      return qs.kind == QuantKind::individual && g.referent == s.referent &&
                     measure_refines(g.measure, s.measure)
                 ? NodeFit::yes
                 : NodeFit::none;
    case QuantKind::at_least:
      return quantifier_subsumes(qg, qs) && class_within(s, g, ont) ? NodeFit::yes
                                                                     : NodeFit::none;
    case QuantKind::exact:
      return qs == qg && class_equal(g, s, ont) ? NodeFit::yes : NodeFit::none;
    case QuantKind::universal:
      if (qs.kind == QuantKind::universal) {
        return class_within(g, s, ont) ? NodeFit::yes : NodeFit::none;
      }
      if (is_instantiation(qg, qs)) {
        return class_within(s, g, ont) ? NodeFit::instantiation : NodeFit::none;
      }
      return NodeFit::none;
    case QuantKind::at_least_percent:
    case QuantKind::most:
      if (qs.kind == QuantKind::universal) {
        return class_within(g, s, ont) ? NodeFit::yes : NodeFit::none;
      }
      return quantifier_subsumes(qg, qs) && class_equal(g, s, ont) ? NodeFit::yes
                                                                    : NodeFit::none;
    case QuantKind::none: return NodeFit::none;
  }
  return NodeFit::none;
}

class Projector {
 public:
  Projector(const Graph& x, const Graph& y, const Ontology& ont, bool allow_inst)
      : x_(x), y_(y), ont_(ont), allow_inst_(allow_inst) {
    fit_.assign(x.nodes.size() * y.nodes.size(), NodeFit::none);
    for (std::size_t i = 0; i < x.nodes.size(); ++i) {
      for (std::size_t j = 0; j < y.nodes.size(); ++j) {
        NodeFit f = node_fit(x.nodes[i], y.nodes[j], ont);
        if (f == NodeFit::instantiation && !allow_inst) f = NodeFit::none;
        fit_[i * y.nodes.size() + j] = f;
      }
    }
    out_.resize(y.nodes.size());
    in_.resize(y.nodes.size());
    for (std::size_t e = 0; e < y.edges.size(); ++e) {
      out_[y.edges[e].subject].push_back(e);
      in_[y.edges[e].object].push_back(e);
    }
  }

  std::optional<Mapping> run() {
    if (x_.nodes.empty()) return Mapping{};
    if (y_.nodes.empty()) return std::nullopt;
    return is_forest() ? run_tree() : run_backtracking();
  }

 private:
  NodeFit fit(std::size_t i, std::size_t j) const { return fit_[i * y_.nodes.size() + j]; }

  bool relation_ok(std::size_t xe, std::size_t ye) {
    auto key = std::make_pair(x_.edges[xe].relation, y_.edges[ye].relation);
    auto it = rel_cache_.find(key);
    if (it != rel_cache_.end()) return it->second;
    bool ok = term_subsumes(key.first, key.second, ont_);
    rel_cache_.emplace(std::move(key), ok);
    return ok;
  }

  bool is_forest() const {
    std::vector<std::size_t> parent(x_.nodes.size());
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
    std::function<std::size_t(std::size_t)> find = [&](std::size_t a) {
      while (parent[a] != a) a = parent[a] = parent[parent[a]];
      return a;
    };
    for (const Edge& e : x_.edges) {
      std::size_t a = find(e.subject), b = find(e.object);
      if (a == b) return false;
      parent[a] = b;
    }
    return true;
  }

  Mapping finish(std::vector<std::size_t> nodes, std::vector<std::size_t> edges) const {
    Mapping m;
    m.node_map = std::move(nodes);
    m.edge_map = std::move(edges);
    for (std::size_t i = 0; i < m.node_map.size(); ++i) {
      if (fit(i, m.node_map[i]) == NodeFit::instantiation) m.instantiation = true;
      if (x_.nodes[i].quantifier.kind == QuantKind::most ||
          y_.nodes[m.node_map[i]].quantifier.kind == QuantKind::most) {
        m.advisory = true;
      }
    }
    return m;
  }

  // Child-before-parent dynamic program over each tree of the query.
  std::optional<Mapping> run_tree() {
    const std::size_t nx = x_.nodes.size(), ny = y_.nodes.size();
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(nx);  // (edge, other)
    for (std::size_t e = 0; e < x_.edges.size(); ++e) {
      adj[x_.edges[e].subject].emplace_back(e, x_.edges[e].object);
      adj[x_.edges[e].object].emplace_back(e, x_.edges[e].subject);
    }
    std::vector<std::size_t> order, parent_edge(nx, SIZE_MAX);
    std::vector<char> seen(nx, 0);
    for (std::size_t r = 0; r < nx; ++r) {
      if (seen[r]) continue;
      seen[r] = 1;
      std::size_t head = order.size();
      order.push_back(r);
      while (head < order.size()) {
        std::size_t q = order[head++];
        for (auto [e, o] : adj[q]) {
          if (seen[o]) continue;
          seen[o] = 1;
          parent_edge[o] = e;
          order.push_back(o);
        }
      }
    }
    std::vector<std::vector<char>> ok(nx, std::vector<char>(ny, 0));
    for (std::size_t i = 0; i < nx; ++i) {
      for (std::size_t j = 0; j < ny; ++j) ok[i][j] = fit(i, j) != NodeFit::none;
    }
    auto parent_of = [&](std::size_t c) {
      const Edge& e = x_.edges[parent_edge[c]];
      return e.subject == c ? e.object : e.subject;
    };
    // Candidate target edges for the parent edge of `c` when its parent sits
    // on target node t; calls fn(target edge, target node of c).
    auto for_each_step = [&](std::size_t c, std::size_t t, auto&& fn) {
      std::size_t xe = parent_edge[c];
      bool parent_is_subject = x_.edges[xe].object == c;
      const auto& list = parent_is_subject ? out_[t] : in_[t];
      for (std::size_t ye : list) {
        std::size_t other = parent_is_subject ? y_.edges[ye].object : y_.edges[ye].subject;
        if (fn(ye, other)) return true;
      }
      return false;
    };
    for (std::size_t k = order.size(); k-- > 0;) {
      std::size_t c = order[k];
      if (parent_edge[c] == SIZE_MAX) continue;
      std::size_t p = parent_of(c);
      std::size_t xe = parent_edge[c];
      for (std::size_t t = 0; t < ny; ++t) {
        if (!ok[p][t]) continue;
        ok[p][t] = for_each_step(c, t, [&](std::size_t ye, std::size_t other) {
          return ok[c][other] && relation_ok(xe, ye);
        });
      }
    }
    std::vector<std::size_t> node_map(nx, SIZE_MAX), edge_map(x_.edges.size(), SIZE_MAX);
    for (std::size_t q : order) {
      if (parent_edge[q] == SIZE_MAX) {
        // Prefer a non-instantiating image for roots.
        std::size_t best = SIZE_MAX;
        for (std::size_t t = 0; t < ny; ++t) {
          if (!ok[q][t]) continue;
          if (best == SIZE_MAX || (fit(q, best) == NodeFit::instantiation &&
                                   fit(q, t) == NodeFit::yes)) {
            best = t;
          }
        }
        if (best == SIZE_MAX) return std::nullopt;
        node_map[q] = best;
        continue;
      }
      std::size_t xe = parent_edge[q];
      for_each_step(q, node_map[parent_of(q)], [&](std::size_t ye, std::size_t other) {
        if (!ok[q][other] || !relation_ok(xe, ye)) return false;
        node_map[q] = other;
        edge_map[xe] = ye;
        return true;
      });
      if (node_map[q] == SIZE_MAX) return std::nullopt;
    }
    return finish(std::move(node_map), std::move(edge_map));
  }

  std::optional<Mapping> run_backtracking() {
    const std::size_t nx = x_.nodes.size();
    // Connectivity order so that each node after the first of a component
    // has an already assigned neighbour.
    std::vector<std::vector<std::size_t>> adj(nx);
    for (const Edge& e : x_.edges) {
      adj[e.subject].push_back(e.object);
      adj[e.object].push_back(e.subject);
    }
    std::vector<std::size_t> order;
    std::vector<char> seen(nx, 0);
    for (std::size_t r = 0; r < nx; ++r) {
      if (seen[r]) continue;
      seen[r] = 1;
      std::size_t head = order.size();
      order.push_back(r);
      while (head < order.size()) {
        std::size_t q = order[head++];
        for (std::size_t o : adj[q]) {
          if (!seen[o]) {
            seen[o] = 1;
            order.push_back(o);
          }
        }
      }
    }
    std::vector<std::size_t> pos(nx);
    for (std::size_t k = 0; k < nx; ++k) pos[order[k]] = k;
    // Edges checked when their later endpoint is assigned.
    std::vector<std::vector<std::size_t>> check_at(nx);
    for (std::size_t e = 0; e < x_.edges.size(); ++e) {
      const Edge& ed = x_.edges[e];
      check_at[std::max(pos[ed.subject], pos[ed.object])].push_back(e);
    }
    std::vector<std::size_t> node_map(nx, SIZE_MAX), edge_map(x_.edges.size(), SIZE_MAX);
    std::function<bool(std::size_t)> assign = [&](std::size_t k) -> bool {
      if (k == nx) return true;
      std::size_t q = order[k];
      for (int pass = 0; pass < 2; ++pass) {
        NodeFit wanted = pass == 0 ? NodeFit::yes : NodeFit::instantiation;
        for (std::size_t t = 0; t < y_.nodes.size(); ++t) {
          if (fit(q, t) != wanted) continue;
          node_map[q] = t;
          bool good = true;
          for (std::size_t e : check_at[k]) {
            const Edge& ed = x_.edges[e];
            std::size_t ys = node_map[ed.subject], yo = node_map[ed.object];
            edge_map[e] = SIZE_MAX;
            for (std::size_t ye : out_[ys]) {
              if (y_.edges[ye].object == yo && relation_ok(e, ye)) {
                edge_map[e] = ye;
                break;
              }
            }
            if (edge_map[e] == SIZE_MAX) {
              good = false;
              break;
            }
          }
          if (good && assign(k + 1)) return true;
        }
      }
      node_map[q] = SIZE_MAX;
      return false;
    };
    if (!assign(0)) return std::nullopt;
    return finish(std::move(node_map), std::move(edge_map));
  }

  const Graph& x_;
  const Graph& y_;
  const Ontology& ont_;
  bool allow_inst_;
  std::vector<NodeFit> fit_;
  std::vector<std::vector<std::size_t>> out_, in_;
  std::map<std::pair<std::string, std::string>, bool> rel_cache_;
};

bool has_exact(const Graph& g) {
  return std::any_of(g.nodes.begin(), g.nodes.end(), [](const ConceptNode& n) {
    return n.quantifier.kind == QuantKind::exact;
  });
}

bool has_no(const Graph& g) {
  return std::any_of(g.nodes.begin(), g.nodes.end(), [](const ConceptNode& n) {
    return n.quantifier.kind == QuantKind::none;
  });
}

std::optional<Mapping> homomorphism(const Graph& x, const Graph& y, const Ontology& ont,
                                    bool allow_inst) {
  if (auto m = Projector(x, y, ont, false).run()) return m;
  if (!allow_inst) return std::nullopt;
  return Projector(x, y, ont, true).run();
}

const Context* find_context(const Statement& s, ContextKind k) {
  for (const Context& c : s.contexts) {
    if (c.kind == k) return &c;
  }
  return nullptr;
}

// Contexts of the specific statement y refine those of the general x.
bool contexts_refine(const Statement& x, const Statement& y, const Ontology& ont) {
  if (x.is_possible() != y.is_possible()) return false;
  if (const Context* px = find_context(x, ContextKind::place)) {
    const Context* py = find_context(y, ContextKind::place);
    if (!py || !term_subsumes(px->value, py->value, ont)) return false;
  }
  if (const Context* tx = find_context(x, ContextKind::period)) {
    const Context* ty = find_context(y, ContextKind::period);
    if (!ty || ty->value < tx->value || tx->until < ty->until) return false;
  }
  return true;
}

}  // namespace

std::optional<Mapping> project_graph(const Graph& x, const Graph& y, const Ontology& ont,
                                     bool allow_instantiation) {
  auto m = homomorphism(x, y, ont, allow_instantiation);
  if (!m) return std::nullopt;
  // Exact counts only carry over between equivalent graphs.
  if (has_exact(x) && !homomorphism(y, x, ont, false)) return std::nullopt;
  return m;
}

Statement positive_form(const Statement& stmt, bool existential_import) {
  Statement out = stmt;
  if (auto* g = std::get_if<Graph>(&out.body)) {
    for (ConceptNode& n : g->nodes) {
      QuantKind k = n.quantifier.kind;
      if (k == QuantKind::none ||
          (existential_import && (k == QuantKind::universal || is_percent_like(n.quantifier)))) {
        n.quantifier = Quantifier::at_least(1);
      }
    }
  }
  return out;
}

std::optional<Mapping> project(const Statement& x, const Statement& y, const Ontology& ont) {
  const Graph* gx = x.graph();
  const Graph* gy = y.graph();
  if (!gx || !gy) return std::nullopt;
  if (!contexts_refine(x, y, ont)) return std::nullopt;
  bool nx = has_no(*gx), ny = has_no(*gy);
  if (nx != ny) return std::nullopt;
  if (!nx) return project_graph(*gx, *gy, ont);
  // "no X" is entailed by "no Y" when the positive X specializes the positive Y.
  Statement px = positive_form(x, false), py = positive_form(y, false);
  auto m = project_graph(*py.graph(), *px.graph(), ont, false);
  if (m) m->reversed = true;
  return m;
}

const char* to_string(CompareKind k) {
  switch (k) {
    case CompareKind::equivalent: return "equivalent";
    case CompareKind::specializes: return "specializes";
    case CompareKind::generalizes: return "generalizes";
    case CompareKind::instantiation_of: return "instantiation-of";
    case CompareKind::instantiated_by: return "instantiated-by";
    case CompareKind::exclusive: return "exclusive";
    case CompareKind::unrelated: return "unrelated";
  }
  return "?";
}

namespace {

bool negation_excludes(const Statement& negative, const Statement& other, const Ontology& ont) {
  if (!has_no(*negative.graph()) || has_no(*other.graph())) return false;
  Statement pos = positive_form(negative, false);
  Statement imported = positive_form(other, true);
  // Modality never blocks a `no` exclusion.
  pos.contexts.erase(std::remove_if(pos.contexts.begin(), pos.contexts.end(),
                                    [](const Context& c) {
                                      return c.kind == ContextKind::modality_possible;
                                    }),
                     pos.contexts.end());
  imported.contexts.erase(std::remove_if(imported.contexts.begin(), imported.contexts.end(),
                                         [](const Context& c) {
                                           return c.kind == ContextKind::modality_possible;
                                         }),
                          imported.contexts.end());
  return project(pos, imported, ont).has_value();
}

Statement without_measures(const Statement& s) {
  Statement out = s;
  if (auto* g = std::get_if<Graph>(&out.body)) {
    for (ConceptNode& n : g->nodes) n.measure.reset();
  }
  return out;
}

bool disjoint_individual_measures(const Graph& a, const Graph& b, const Mapping& m) {
  for (std::size_t i = 0; i < m.node_map.size(); ++i) {
    const ConceptNode& na = a.nodes[i];
    const ConceptNode& nb = b.nodes[m.node_map[i]];
    if (na.quantifier.kind != QuantKind::individual ||
        nb.quantifier.kind != QuantKind::individual || !na.measure || !nb.measure) {
      continue;
    }
    if (na.measure->relation != nb.measure->relation || na.measure->unit != nb.measure->unit) {
      continue;
    }
    Interval ia = interval_of(*na.measure), ib = interval_of(*nb.measure);
    if (ia.hi < ib.lo || ib.hi < ia.lo) return true;
  }
  return false;
}

bool interval_excludes(const Statement& x, const Statement& y, const Ontology& ont) {
  Statement sx = without_measures(x), sy = without_measures(y);
  auto xy = project(sx, sy, ont);
  auto yx = project(sy, sx, ont);
  if (!xy || !yx || xy->reversed || yx->reversed) return false;
  return disjoint_individual_measures(*x.graph(), *y.graph(), *xy) ||
         disjoint_individual_measures(*y.graph(), *x.graph(), *yx);
}

}  // namespace

CompareResult compare(const Statement& x, const Statement& y, const Ontology& ont,
                      const MatcherOptions& options) {
  CompareResult r;
  if (!x.graph() || !y.graph()) return r;
  if (negation_excludes(x, y, ont) || negation_excludes(y, x, ont)) {
    r.kind = CompareKind::exclusive;
    return r;
  }
  if (options.interval_exclusion && interval_excludes(x, y, ont)) {
    r.kind = CompareKind::exclusive;
    r.interval_exclusion = true;
    return r;
  }
  auto down = project(y, x, ont);  // x specializes y
  auto up = project(x, y, ont);    // y specializes x
  bool down_plain = down && !down->instantiation;
  bool up_plain = up && !up->instantiation;
  r.advisory = (down && down->advisory) || (up && up->advisory);
  if (down_plain && up_plain) {
    r.kind = CompareKind::equivalent;
    r.mapping = up;
  } else if (down_plain) {
    r.kind = CompareKind::specializes;
    r.mapping = down;
  } else if (up_plain) {
    r.kind = CompareKind::generalizes;
    r.mapping = up;
  } else if (down) {
    r.kind = CompareKind::instantiation_of;
    r.mapping = down;
  } else if (up) {
    r.kind = CompareKind::instantiated_by;
    r.mapping = up;
  }
  return r;
}

bool is_conflicting(CompareKind k) { return conflict_kind(k).has_value(); }

std::optional<ConflictKind> conflict_kind(CompareKind k) {
  switch (k) {
    case CompareKind::equivalent: return ConflictKind::equivalence;
    case CompareKind::specializes: return ConflictKind::specialization;
    case CompareKind::generalizes: return ConflictKind::generalization;
    case CompareKind::exclusive: return ConflictKind::exclusion;
    default: return std::nullopt;
  }
}

std::vector<Conflict> detect_conflicts(
    const Statement& stmt, std::span<const Statement* const> stored, const Ontology& ont,
    const std::function<bool(const std::string&)>& explicitly_linked,
    const MatcherOptions& options) {
  std::vector<Conflict> out;
  if (!stmt.graph()) return out;
  for (const Statement* s : stored) {
    if (!s->graph() || (!stmt.id.empty() && s->id == stmt.id)) continue;
    CompareResult r = compare(stmt, *s, ont, options);
    auto kind = conflict_kind(r.kind);
    if (!kind) continue;
    if (explicitly_linked && explicitly_linked(s->id)) continue;
    out.push_back(Conflict{s->id, *kind, r.advisory});
  }
  std::sort(out.begin(), out.end(),
            [](const Conflict& a, const Conflict& b) { return a.existing < b.existing; });
  return out;
}

}  // namespace cbkb
