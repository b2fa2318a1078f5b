#include "cbkb/protocol.hpp"

#include <algorithm>
#include <deque>

#include "cbkb/error.hpp"
#include "cbkb/evaluation.hpp"

namespace cbkb {

namespace {

EditOutcome reject(RejectReason r, std::string detail = {}, std::vector<Conflict> c = {}) {
  return EditOutcome::reject(r, std::move(detail), std::move(c));
}

std::string next_statement_id(KnowledgeBase& kb, const std::string& creator) {
  unsigned& n = kb.statement_counter[creator];
  for (;;) {
    ++n;
    std::string id = creator + "#s" + std::to_string(n);
    if (!kb.exists(id)) return id;
  }
}

void ensure_source(KnowledgeBase& kb, const std::string& id, SourceKind kind) {
  if (!id.empty() && !kb.sources.contains(id)) kb.sources[id] = Source{id, kind};
}

bool valid_token(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), is_token_char);
}

std::optional<std::string> unknown_term(const KnowledgeBase& kb, const Statement& s,
                                        const std::string& allowed_new) {
  for (const std::string& t : mentioned_terms(s)) {
    if (t == allowed_new) continue;
    if (t.find('#') != std::string::npos && !kb.terms.contains(t)) return t;
  }
  return std::nullopt;
}

std::vector<Conflict> conflicts_of(const KnowledgeBase& kb, const Statement& s) {
  std::vector<const Statement*> stored = kb.graph_statements();
  bool stored_self = !s.id.empty() && kb.hierarchy.contains(s.id);
  return detect_conflicts(
      s, stored, kb.hierarchy,
      [&](const std::string& other) { return stored_self && kb.explicitly_linked(s.id, other); },
      kb.matcher);
}

bool is_fully_formal(const Statement& s, const KnowledgeBase& kb) {
  for (const std::string& t : mentioned_terms(s)) {
    if (!kb.hierarchy.is_formal(t)) return false;
  }
  return true;
}

LinkKind classification_kind(const Statement& spec, const Statement& gen, const KnowledgeBase& kb) {
  CompareResult r = compare(spec, gen, kb.hierarchy, kb.matcher);
  if (r.kind == CompareKind::instantiation_of) return LinkKind::example;
  if (is_fully_formal(spec, kb) && is_fully_formal(gen, kb)) return LinkKind::logical_deduction_of;
  return LinkKind::informal_generalization;
}

void add_system_link(KnowledgeBase& kb, LinkKind kind, const std::string& from,
                     const std::string& to) {
  try {
    kb.hierarchy.add_link(HierarchyLink{kind, from, to, "", "", true});
  } catch (const Error&) {
    // Mutually specializing statements; the opposite link already orders them.
  }
}

// Materializes the placement of a stored statement; statements without a
// generalization hang under the root.
void place(KnowledgeBase& kb, const std::string& id) {
  const Statement& s = kb.statements.at(id);
  bool anchored = false;
  if (s.graph()) {
    Placement p = classify_statement(s, kb);
    for (const std::string& g : p.direct_generalizations) {
      add_system_link(kb, classification_kind(s, kb.statements.at(g), kb), id, g);
      anchored = true;
    }
    for (const std::string& sp : p.direct_specializations) {
      add_system_link(kb, classification_kind(kb.statements.at(sp), s, kb), sp, id);
      // The new statement now sits between sp and its former direct
      // generalizations (or the root).
      for (const HierarchyLink& l : kb.hierarchy.links_from(sp)) {
        bool bypassed = l.to == Hierarchy::kRoot ||
                        std::find(p.direct_generalizations.begin(),
                                  p.direct_generalizations.end(),
                                  l.to) != p.direct_generalizations.end();
        if (l.system && bypassed) kb.hierarchy.remove_link(l);
      }
    }
  }
  if (!anchored) {
    add_system_link(kb, LinkKind::informal_generalization, id, Hierarchy::kRoot);
  }
}

void unplace(KnowledgeBase& kb, const std::string& id) {
  std::vector<HierarchyLink> drop;
  for (const HierarchyLink& l : kb.hierarchy.links_from(id)) {
    if (l.system) drop.push_back(l);
  }
  for (const HierarchyLink& l : kb.hierarchy.links_to(id)) {
    if (l.system) drop.push_back(l);
  }
  for (const HierarchyLink& l : drop) kb.hierarchy.remove_link(l);
}

// Statements joined to `id` by classification links.
std::set<std::string> system_neighbours(const KnowledgeBase& kb, const std::string& id) {
  std::set<std::string> out;
  for (const HierarchyLink& l : kb.hierarchy.links_from(id)) {
    if (l.system && kb.statements.contains(l.to)) out.insert(l.to);
  }
  for (const HierarchyLink& l : kb.hierarchy.links_to(id)) {
    if (l.system && kb.statements.contains(l.from)) out.insert(l.from);
  }
  return out;
}

void reclassify(KnowledgeBase& kb, const std::set<std::string>& ids) {
  std::set<std::string> all = ids;
  for (const std::string& id : ids) {
    if (!kb.statements.contains(id)) continue;
    auto n = system_neighbours(kb, id);
    all.insert(n.begin(), n.end());
  }
  for (const std::string& id : all) {
    if (kb.statements.contains(id)) unplace(kb, id);
  }
  for (const std::string& id : all) {
    if (kb.statements.contains(id)) place(kb, id);
  }
}

std::string store_statement(KnowledgeBase& kb, Statement& s, const EditContext& ctx) {
  s.id = next_statement_id(kb, s.creator);
  if (s.date.empty()) s.date = ctx.timestamp;
  kb.hierarchy.add_object(s.id, ObjectKind::statement);
  if (s.kind == StatementKind::definition) {
    kb.terms.at(defined_term(s)).definitions.push_back(s.id);
  }
  kb.statements[s.id] = s;
  return s.id;
}

void erase_statement(KnowledgeBase& kb, const std::string& id) {
  auto it = kb.statements.find(id);
  if (it == kb.statements.end()) return;
  if (it->second.kind == StatementKind::definition) {
    auto t = kb.terms.find(defined_term(it->second));
    if (t != kb.terms.end()) std::erase(t->second.definitions, id);
  }
  kb.statements.erase(it);
  kb.hierarchy.remove_object(id);
  kb.inherited.erase(id);
  std::erase_if(kb.rating_index, [&](const auto& e) { return std::get<1>(e.first) == id; });
  std::erase_if(kb.ratings, [&](const auto& e) { return e.second.object == id; });
}

// Conflicts of the given statements against every stored statement that no
// user link connects them to.
std::vector<Conflict> unlinked_conflicts(const KnowledgeBase& kb,
                                         const std::set<std::string>& ids) {
  std::vector<Conflict> out;
  std::set<std::string> seen;
  for (const std::string& id : ids) {
    const Statement* s = kb.statement(id);
    if (!s || !s->graph()) continue;
    for (const Conflict& c : conflicts_of(kb, *s)) {
      if (seen.insert(c.existing).second) out.push_back(c);
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Conflict& a, const Conflict& b) { return a.existing < b.existing; });
  return out;
}

std::optional<std::string> find_stored(const KnowledgeBase& kb, const Statement& e) {
  for (const auto& [id, s] : kb.statements) {
    if (s.creator == e.creator && s.kind == e.kind && s.believer == e.believer &&
        s.interpreted == e.interpreted && s.body == e.body && s.contexts == e.contexts) {
      return id;
    }
  }
  return std::nullopt;
}

std::vector<std::string> users_mentioning(const KnowledgeBase& kb, const std::string& term,
                                          const std::string& except) {
  std::set<std::string> users;
  for (const auto& [id, s] : kb.statements) {
    if (s.creator != except && mentioned_terms(s).contains(term)) users.insert(s.creator);
  }
  return {users.begin(), users.end()};
}

// Number of statements by `users` left in conflict with `definitions`.
std::size_t damage(const KnowledgeBase& kb, const std::vector<std::string>& definitions,
                   const std::set<std::string>& users) {
  std::size_t n = 0;
  for (const auto& [id, s] : kb.statements) {
    if (!users.contains(s.creator) || !s.graph() || s.kind == StatementKind::definition) continue;
    for (const std::string& d : definitions) {
      CompareResult r = compare(s, kb.statements.at(d), kb.hierarchy, kb.matcher);
      if (is_conflicting(r.kind)) {
        ++n;
        break;
      }
    }
  }
  return n;
}

EditOutcome insert_graph(KnowledgeBase& kb, const std::string& agent, Statement stmt,
                         const EditContext& ctx, const std::string& cover_target) {
  std::string def_term = defined_term(stmt);
  bool new_term = !def_term.empty() && !kb.terms.contains(def_term);
  if (auto u = unknown_term(kb, stmt, new_term ? def_term : std::string())) {
    return reject(RejectReason::unknown_object, *u);
  }
  if (new_term && !valid_token(Identifier::parse(def_term).name)) {
    return reject(RejectReason::ill_formed, "malformed-name " + def_term);
  }

  // A new term is anchored under the root before conflicts are computed, so
  // that its definition is compared against what its name already covers.
  if (new_term) {
    Identifier id = Identifier::parse(def_term);
    Term t;
    t.id = def_term;
    t.creator = id.creator;
    t.names = {id.name};
    t.created = ctx.timestamp;
    ensure_source(kb, id.creator, SourceKind::external_vocabulary);
    kb.terms[t.id] = t;
    kb.hierarchy.add_term(t, {HierarchyLink{LinkKind::subtype, t.id, Hierarchy::kRoot, agent,
                                            "", false}});
  }

  std::vector<Conflict> own, others;
  for (const Conflict& c : conflicts_of(kb, stmt)) {
    (kb.statements.at(c.existing).creator == agent ? own : others).push_back(c);
  }
  if (!own.empty()) {
    bool exclusion = std::any_of(own.begin(), own.end(), [](const Conflict& c) {
      return c.kind == ConflictKind::exclusion;
    });
    return reject(exclusion ? RejectReason::own_inconsistency : RejectReason::own_redundancy, {},
                  own);
  }

  EditOutcome out;
  if (stmt.kind == StatementKind::definition) {
    if (new_term) {
      if (!others.empty()) return reject(RejectReason::term_def_inconsistent, {}, others);
      out.created.push_back(def_term);
    } else if (!others.empty()) {
      const Term& term = kb.terms.at(def_term);
      for (const Conflict& c : others) {
        const Statement& e = kb.statements.at(c.existing);
        if (term.creator != agent && e.creator == term.creator &&
            e.kind == StatementKind::definition && defined_term(e) == def_term) {
          return reject(RejectReason::term_def_inconsistent, "contradicts-term-creator", others);
        }
      }
      std::set<std::string> users;
      for (const Conflict& c : others) users.insert(kb.statements.at(c.existing).creator);
      std::string sid = store_statement(kb, stmt, ctx);
      CloneReport report = clone_term(kb, def_term, sid, users, ctx);
      std::set<std::string> touched(report.rewritten_statements.begin(),
                                    report.rewritten_statements.end());
      touched.insert(sid);
      if (auto left = unlinked_conflicts(kb, touched); !left.empty()) {
        return reject(RejectReason::implicit_conflict, "cloning-leaves-conflicts", left);
      }
      out.status = EditStatus::accepted_with_cloning;
      out.created.push_back(sid);
      for (const ClonedTerm& c : report.clones) out.created.push_back(c.new_term);
      out.clone_report = std::move(report);
      out.warnings = contextualization_warnings(kb.statements.at(sid));
      return out;
    }
  } else if (!others.empty()) {
    std::vector<Conflict> uncovered;
    for (const Conflict& c : others) {
      bool covered = !cover_target.empty() &&
                     (c.existing == cover_target || kb.explicitly_linked(cover_target, c.existing));
      if (!covered) uncovered.push_back(c);
    }
    if (!uncovered.empty()) return reject(RejectReason::implicit_conflict, {}, uncovered);
  }
  std::string sid = store_statement(kb, stmt, ctx);
  place(kb, sid);
  out.created.push_back(sid);
  out.warnings = contextualization_warnings(stmt);
  return out;
}

bool covering_relation(std::string_view relation) {
  return is_corrective_relation(relation) || relation == "specialization" ||
         relation == "generalization" || relation == "equivalence" || relation == "example";
}

// User link recording a meta relation "subject has for relation object".
HierarchyLink meta_link(const std::string& relation, const std::string& subject,
                        const std::string& object, const std::string& creator) {
  HierarchyLink l;
  l.creator = creator;
  l.relation = relation;
  l.from = object;
  l.to = subject;
  if (is_corrective_relation(relation)) {
    l.kind = LinkKind::corrective;
  } else if (is_argumentation_relation(relation)) {
    l.kind = LinkKind::argumentation;
  } else if (relation == "specialization") {
    l.kind = LinkKind::logical_deduction_of;
  } else if (relation == "generalization") {
    l.kind = LinkKind::logical_deduction_of;
    std::swap(l.from, l.to);
  } else if (relation == "equivalence") {
    l.kind = LinkKind::equivalence;
  } else {
    l.kind = LinkKind::example;
  }
  return l;
}

EditOutcome add_meta(KnowledgeBase& kb, const std::string& agent, Statement stmt,
                     const EditContext& ctx) {
  MetaBody m = *stmt.meta();
  auto resolve = [&](const StatementRef& r) -> std::optional<std::string> {
    if (!r.is_embedded()) {
      if (kb.statements.contains(r.id)) return r.id;
      return std::nullopt;
    }
    return find_stored(kb, *r.embedded);
  };
  std::optional<std::string> subject = resolve(m.subject);
  std::optional<std::string> object = resolve(m.object);
  if (!subject && !m.subject.is_embedded()) return reject(RejectReason::unknown_object, m.subject.id);
  if (!object && !m.object.is_embedded()) return reject(RejectReason::unknown_object, m.object.id);
  if (!subject && !object) {
    return reject(RejectReason::unknown_object, "meta-statement references no stored statement");
  }

  EditOutcome out;
  auto insert_embedded = [&](const StatementRef& r, const std::string& other) -> EditOutcome {
    Statement e = *r.embedded;
    if (e.creator != agent) return reject(RejectReason::not_creator, e.creator);
    if (auto v = check_well_formed(e); !v.empty()) return reject(RejectReason::ill_formed, v.front());
    if (e.meta()) return reject(RejectReason::ill_formed, "nested-meta-statement");
    if (e.kind == StatementKind::informal) {
      EditOutcome o;
      std::string id = store_statement(kb, e, ctx);
      place(kb, id);
      o.created.push_back(id);
      return o;
    }
    return insert_graph(kb, agent, e, ctx, covering_relation(m.relation) ? other : std::string());
  };
  auto absorb = [&](const EditOutcome& o) {
    out.created.insert(out.created.end(), o.created.begin(), o.created.end());
    out.warnings.insert(out.warnings.end(), o.warnings.begin(), o.warnings.end());
    if (o.clone_report) {
      out.status = EditStatus::accepted_with_cloning;
      out.clone_report = o.clone_report;
    }
  };
  if (!subject) {
    EditOutcome o = insert_embedded(m.subject, *object);
    if (!o.ok()) return o;
    absorb(o);
    subject = kb.statements.contains(o.created.front()) ? o.created.front() : o.created.back();
  }
  if (!object) {
    EditOutcome o = insert_embedded(m.object, *subject);
    if (!o.ok()) return o;
    absorb(o);
    object = kb.statements.contains(o.created.front()) ? o.created.front() : o.created.back();
  }

  Statement meta = stmt;
  meta.body = MetaBody{StatementRef{*subject, nullptr}, m.relation, StatementRef{*object, nullptr}};
  for (const Statement* s : kb.statements_by(agent)) {
    if (s->meta() && s->body == meta.body) {
      return reject(RejectReason::own_redundancy, {},
                    {Conflict{s->id, ConflictKind::equivalence, false}});
    }
  }
  try {
    kb.hierarchy.add_link(meta_link(m.relation, *subject, *object, agent));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::cycle_introduced) {
      return reject(RejectReason::cycle_introduced, e.what());
    }
    throw;
  }
  std::string mid = store_statement(kb, meta, ctx);
  place(kb, mid);
  out.created.push_back(mid);
  return out;
}

std::vector<std::string> meta_referrers(const KnowledgeBase& kb, const std::string& id) {
  std::vector<std::string> out;
  for (const auto& [sid, s] : kb.statements) {
    const MetaBody* m = s.meta();
    if (m && (m->subject.id == id || m->object.id == id)) out.push_back(sid);
  }
  return out;
}

void rename_statement(KnowledgeBase& kb, const std::string& from, const std::string& to) {
  Statement s = kb.statements.at(from);
  kb.statements.erase(from);
  s.id = to;
  kb.statements[to] = s;
  kb.hierarchy.rename_object(from, to);
  for (auto& [id, other] : kb.statements) {
    if (MetaBody* m = std::get_if<MetaBody>(&other.body)) {
      if (m->subject.id == from) m->subject.id = to;
      if (m->object.id == from) m->object.id = to;
    }
  }
  for (auto& [id, t] : kb.terms) std::replace(t.definitions.begin(), t.definitions.end(), from, to);
  std::map<std::tuple<std::string, std::string, std::string>, std::string> index;
  for (auto& [key, rid] : kb.rating_index) {
    auto k = key;
    if (std::get<1>(k) == from) std::get<1>(k) = to;
    index[k] = rid;
  }
  kb.rating_index = std::move(index);
  for (auto& [rid, r] : kb.ratings) {
    if (r.object == from) r.object = to;
  }
  if (kb.inherited.erase(from)) kb.inherited.insert(to);
}

void rename_term_everywhere(KnowledgeBase& kb, const std::string& from, const std::string& to,
                            const std::string& new_creator, std::vector<std::string>& rewritten) {
  Term t = kb.terms.at(from);
  kb.terms.erase(from);
  t.id = to;
  t.creator = new_creator;
  kb.terms[to] = t;
  kb.hierarchy.rename_object(from, to, Identifier::parse(to).name);
  for (auto& [id, s] : kb.statements) {
    if (mentioned_terms(s).contains(from)) {
      s = rename_term(std::move(s), from, to);
      rewritten.push_back(id);
    }
  }
  for (auto& [clone, origin] : kb.clone_of) {
    if (origin == from) origin = to;
  }
  kb.clone_of[to] = from;
}

}  // namespace

Statement rename_term(Statement stmt, const std::string& from, const std::string& to) {
  if (Graph* g = std::get_if<Graph>(&stmt.body)) {
    for (ConceptNode& n : g->nodes) {
      if (n.term == from) n.term = to;
      if (n.referent == from) n.referent = to;
      if (n.measure && n.measure->relation == from) n.measure->relation = to;
    }
    for (Edge& e : g->edges) {
      if (e.relation == from) e.relation = to;
    }
  }
  for (Context& c : stmt.contexts) {
    if (c.kind == ContextKind::place && c.value == from) c.value = to;
  }
  return stmt;
}

Placement classify_statement(const Statement& stmt, const KnowledgeBase& kb) {
  std::vector<const Statement*> gens, specs;
  for (const Statement* t : kb.graph_statements()) {
    if (t->id == stmt.id && !stmt.id.empty()) continue;
    CompareKind k = compare(stmt, *t, kb.hierarchy, kb.matcher).kind;
    if (k == CompareKind::specializes || k == CompareKind::instantiation_of) gens.push_back(t);
    if (k == CompareKind::generalizes || k == CompareKind::instantiated_by) specs.push_back(t);
  }
  auto below = [&](const Statement* a, const Statement* b) {
    CompareKind k = compare(*a, *b, kb.hierarchy, kb.matcher).kind;
    return k == CompareKind::specializes || k == CompareKind::instantiation_of;
  };
  Placement p;
  for (const Statement* g : gens) {
    bool minimal = std::none_of(gens.begin(), gens.end(),
                                [&](const Statement* o) { return o != g && below(o, g); });
    if (minimal) p.direct_generalizations.push_back(g->id);
  }
  for (const Statement* s : specs) {
    bool maximal = std::none_of(specs.begin(), specs.end(),
                                [&](const Statement* o) { return o != s && below(s, o); });
    if (maximal) p.direct_specializations.push_back(s->id);
  }
  return p;
}

std::vector<Conflict> conflicts_for_draft(const KnowledgeBase& kb, const Statement& draft) {
  if (!draft.graph()) return {};
  Statement s = draft;
  s.id.clear();
  return conflicts_of(kb, s);
}

std::vector<std::pair<std::string, std::string>> organization_violations(
    const KnowledgeBase& kb) {
  std::vector<std::pair<std::string, std::string>> out;
  std::vector<const Statement*> stored = kb.graph_statements();
  for (std::size_t i = 0; i < stored.size(); ++i) {
    for (std::size_t j = i + 1; j < stored.size(); ++j) {
      CompareKind k = compare(*stored[i], *stored[j], kb.hierarchy, kb.matcher).kind;
      if (is_conflicting(k) && !kb.explicitly_linked(stored[i]->id, stored[j]->id)) {
        out.emplace_back(stored[i]->id, stored[j]->id);
      }
    }
  }
  return out;
}

EditOutcome register_source(KnowledgeBase& kb, const std::string& id, SourceKind kind) {
  if (!valid_token(id)) return reject(RejectReason::ill_formed, "malformed-name " + id);
  if (kb.sources.contains(id)) return reject(RejectReason::ill_formed, "already-registered " + id);
  kb.sources[id] = Source{id, kind};
  EditOutcome out;
  out.created.push_back(id);
  return out;
}

EditOutcome add_statement(KnowledgeBase& kb, const std::string& agent, Statement stmt,
                          const EditContext& ctx) {
  if (!kb.is_registered(agent)) return reject(RejectReason::not_registered, agent);
  if (stmt.creator != agent) return reject(RejectReason::not_creator, stmt.creator);
  if (auto v = check_well_formed(stmt); !v.empty()) {
    return reject(RejectReason::ill_formed, v.front());
  }
  if (stmt.kind == StatementKind::informal) {
    return reject(RejectReason::informal_unlinked);
  }
  KnowledgeBase work = kb;
  EditOutcome out = stmt.meta() ? add_meta(work, agent, std::move(stmt), ctx)
                                : insert_graph(work, agent, std::move(stmt), ctx, {});
  if (out.ok()) kb = std::move(work);
  return out;
}

CloneReport clone_term(KnowledgeBase& kb, const std::string& term, const std::string& trigger,
                       const std::set<std::string>& users, const EditContext& ctx) {
  const std::string definer = kb.statements.at(trigger).creator;
  const std::string name = Identifier::parse(term).name;

  // Keep the definitions that leave the fewest statements of the other users
  // in conflict; the trigger wins ties.
  std::vector<std::string> candidates = kb.terms.at(term).definitions;
  std::string dropped = trigger;
  std::size_t best = SIZE_MAX;
  std::vector<std::string> order{trigger};
  for (const std::string& c : candidates) {
    if (c != trigger) order.push_back(c);
  }
  for (const std::string& c : order) {
    std::vector<std::string> remaining;
    for (const std::string& d : candidates) {
      if (d != c) remaining.push_back(d);
    }
    std::size_t dmg = damage(kb, remaining, users);
    if (dmg < best) {
      best = dmg;
      dropped = c;
    }
  }

  CloneReport report;
  report.original_term = term;
  std::set<std::string> involved = users;
  involved.insert(definer);
  std::set<std::string> rewritten;
  for (const std::string& u : involved) {
    std::string cid = mint_identifier(u, name, kb.taken_ids()).str();
    Term clone;
    clone.id = cid;
    clone.creator = u;
    clone.names = {name};
    clone.created = ctx.timestamp;
    kb.terms[cid] = clone;
    kb.hierarchy.add_term(clone, {HierarchyLink{LinkKind::subtype, cid, term, u, "", false}});
    kb.clone_of[cid] = term;
    for (auto& [id, s] : kb.statements) {
      if (s.creator != u || !mentioned_terms(s).contains(term)) continue;
      bool defines = s.kind == StatementKind::definition && defined_term(s) == term;
      s = rename_term(std::move(s), term, cid);
      if (defines) {
        std::erase(kb.terms.at(term).definitions, id);
        kb.terms.at(cid).definitions.push_back(id);
      }
      rewritten.insert(id);
    }
    report.clones.push_back(
        ClonedTerm{cid, u, u == definer ? std::nullopt : std::optional<std::string>(dropped)});
  }
  reclassify(kb, rewritten);
  report.rewritten_statements.assign(rewritten.begin(), rewritten.end());
  return report;
}

EditOutcome remove_statement(KnowledgeBase& kb, const std::string& agent,
                             const std::string& sid, const EditContext& ctx) {
  if (!kb.is_registered(agent)) return reject(RejectReason::not_registered, agent);
  auto it = kb.statements.find(sid);
  if (it == kb.statements.end()) return reject(RejectReason::unknown_object, sid);
  if (it->second.creator != agent) return reject(RejectReason::not_creator, it->second.creator);

  KnowledgeBase work = kb;
  EditOutcome out;
  const Statement removed = it->second;
  std::set<std::string> component = work.hierarchy.statement_component(sid, false);

  // The statement and the agent's own meta-statements built on it.
  std::set<std::string> doomed{sid};
  std::deque<std::string> queue{sid};
  std::string heir;
  while (!queue.empty()) {
    std::string cur = queue.front();
    queue.pop_front();
    for (const std::string& r : meta_referrers(work, cur)) {
      const std::string& creator = work.statements.at(r).creator;
      if (creator != agent) {
        if (heir.empty() || r < heir) heir = r;
      } else if (doomed.insert(r).second) {
        queue.push_back(r);
      }
    }
  }

  if (!heir.empty()) {
    // Other users argue about this statement: it survives under one of them,
    // still attributed to its original author as interpreted source.
    std::string new_owner = work.statements.at(heir).creator;
    std::string new_id = next_statement_id(work, new_owner);
    rename_statement(work, sid, new_id);
    Statement& s = work.statements.at(new_id);
    s.creator = new_owner;
    s.interpreted = agent;
    work.inherited.insert(new_id);
    out.created.push_back(new_id);
    out.detail = "reattributed " + sid + " -> " + new_id;
    kb = std::move(work);
    return out;
  }

  std::vector<std::string> rewritten;
  if (removed.kind == StatementKind::definition) {
    std::string term = defined_term(removed);
    std::vector<std::string> others = users_mentioning(work, term, agent);
    if (!others.empty()) {
      CloneReport report;
      report.original_term = term;
      const Term& t = work.terms.at(term);
      bool sole = t.definitions.size() == 1 && t.definitions.front() == sid;
      if (t.creator == agent && sole) {
        const std::string& heir_user = others.front();
        std::string new_id =
            mint_identifier(heir_user, Identifier::parse(term).name, work.taken_ids()).str();
        rename_term_everywhere(work, term, new_id, heir_user, rewritten);
        report.clones.push_back(ClonedTerm{new_id, heir_user, sid});
      } else {
        for (const std::string& u : others) {
          std::string cid =
              mint_identifier(u, Identifier::parse(term).name, work.taken_ids()).str();
          Term clone;
          clone.id = cid;
          clone.creator = u;
          clone.names = {Identifier::parse(term).name};
          clone.created = ctx.timestamp;
          work.terms[cid] = clone;
          work.hierarchy.add_term(clone,
                                  {HierarchyLink{LinkKind::subtype, cid, term, u, "", false}});
          work.clone_of[cid] = term;
          for (auto& [id, s] : work.statements) {
            if (s.creator == u && mentioned_terms(s).contains(term)) {
              s = rename_term(std::move(s), term, cid);
              rewritten.push_back(id);
            }
          }
          report.clones.push_back(ClonedTerm{cid, u, sid});
        }
      }
      std::sort(rewritten.begin(), rewritten.end());
      rewritten.erase(std::unique(rewritten.begin(), rewritten.end()), rewritten.end());
      std::erase(rewritten, sid);
      report.rewritten_statements = rewritten;
      out.status = EditStatus::accepted_with_cloning;
      out.clone_report = std::move(report);
    }
  }

  std::set<std::string> neighbours;
  for (const std::string& d : doomed) {
    auto n = system_neighbours(work, d);
    neighbours.insert(n.begin(), n.end());
  }
  for (const std::string& d : doomed) erase_statement(work, d);
  for (const std::string& d : doomed) neighbours.erase(d);
  neighbours.insert(rewritten.begin(), rewritten.end());
  reclassify(work, neighbours);

  // Pairs that were only connected through the removed statements.
  std::set<std::string> check;
  for (const std::string& c : component) {
    if (work.statements.contains(c)) check.insert(c);
  }
  check.insert(rewritten.begin(), rewritten.end());
  if (auto left = unlinked_conflicts(work, check); !left.empty()) {
    return reject(RejectReason::implicit_conflict, "removal-unlinks-conflicts", left);
  }
  kb = std::move(work);
  return out;
}

EditOutcome add_fl(KnowledgeBase& kb, const std::string& agent,
                   const std::vector<FlTuple>& tuples, const EditContext& ctx) {
  if (!kb.is_registered(agent)) return reject(RejectReason::not_registered, agent);
  KnowledgeBase work = kb;
  EditOutcome out;
  std::set<std::string> relinked;
  for (const FlTuple& t : tuples) {
    const std::string creator = t.source.value_or(agent);
    if (!valid_token(creator)) return reject(RejectReason::ill_formed, "malformed-name " + creator);
    ensure_source(work, creator,
                  creator == agent ? SourceKind::user : SourceKind::external_vocabulary);
    std::optional<LinkKind> kind;
    if (t.relation == "subtype") kind = LinkKind::subtype;
    if (t.relation == "instance") kind = LinkKind::instance;
    if (t.relation == "subprocess") kind = LinkKind::subprocess;
    if (t.relation == "equivalence") kind = LinkKind::equivalence;
    for (const std::string& o : t.objects) {
      if (kind) {
        if (!work.terms.contains(t.subject)) {
          return reject(RejectReason::unknown_object, t.subject);
        }
        HierarchyLink link{*kind, o, t.subject, creator, "", false};
        if (!work.terms.contains(o)) {
          Identifier id = Identifier::parse(o);
          if (id.creator.empty() || !valid_token(id.name) || !valid_token(id.creator)) {
            return reject(RejectReason::ill_formed, "new terms need a creator prefix: " + o);
          }
          Term term;
          term.id = o;
          term.creator = id.creator;
          term.names = {id.name};
          term.created = ctx.timestamp;
          ensure_source(work, id.creator, SourceKind::external_vocabulary);
          try {
            work.hierarchy.add_term(term, {link});
          } catch (const Error& e) {
            return reject(RejectReason::cycle_introduced, e.what());
          }
          work.terms[o] = term;
          out.created.push_back(o);
        } else {
          try {
            work.hierarchy.add_link(link);
          } catch (const Error& e) {
            return reject(RejectReason::cycle_introduced, e.what());
          }
          relinked.insert(o);
        }
        continue;
      }
      for (const std::string* term : {&t.relation, &t.subject, &o}) {
        if (term->find('#') != std::string::npos && !work.terms.contains(*term)) {
          return reject(RejectReason::unknown_object, *term);
        }
      }
      Statement s;
      s.creator = creator;
      s.believer = creator;
      s.kind = StatementKind::belief;
      Graph g;
      g.nodes.push_back(ConceptNode{t.subject, Quantifier::universal(), std::nullopt, std::nullopt});
      g.nodes.push_back(ConceptNode{o, Quantifier::at_least(1), std::nullopt, std::nullopt});
      g.edges.push_back(Edge{1, t.relation, 0});
      s.body = std::move(g);
      s.contexts = {Context{ContextKind::modality_possible, "", ""}};
      EditOutcome r = insert_graph(work, creator, s, ctx, {});
      if (!r.ok()) return r;
      out.created.insert(out.created.end(), r.created.begin(), r.created.end());
    }
  }
  if (!relinked.empty()) {
    // New subsumptions may relate statements stored earlier.
    std::set<std::string> affected;
    for (const auto& [id, s] : work.statements) {
      for (const std::string& term : mentioned_terms(s)) {
        bool below = std::any_of(relinked.begin(), relinked.end(), [&](const std::string& r) {
          return work.hierarchy.reaches(term, r);
        });
        if (below) {
          affected.insert(id);
          break;
        }
      }
    }
    if (auto left = unlinked_conflicts(work, affected); !left.empty()) {
      return reject(RejectReason::implicit_conflict, "link-relates-stored-statements", left);
    }
    reclassify(work, affected);
  }
  kb = std::move(work);
  return out;
}

bool is_mutating(CommandKind kind) {
  return kind != CommandKind::spec_of && kind != CommandKind::query_graph;
}

EditOutcome apply_command(KnowledgeBase& kb, const std::string& agent, const Command& cmd,
                          const EditContext& ctx) {
  switch (cmd.kind) {
    case CommandKind::register_source: {
      SourceKind kind = SourceKind::user;
      if (cmd.action == "file") kind = SourceKind::file;
      if (cmd.action == "language") kind = SourceKind::language;
      if (cmd.action == "external-vocabulary") kind = SourceKind::external_vocabulary;
      return register_source(kb, cmd.target, kind);
    }
    case CommandKind::assert_statement: {
      Statement s = *cmd.statement;
      if (s.creator.empty()) s.creator = agent;
      if (s.kind == StatementKind::belief && !s.believer) s.believer = s.creator;
      return add_statement(kb, agent, std::move(s), ctx);
    }
    case CommandKind::assert_fl: return add_fl(kb, agent, cmd.fl, ctx);
    case CommandKind::remove: return remove_statement(kb, agent, cmd.target, ctx);
    case CommandKind::rate:
      if (!kb.is_registered(agent)) return reject(RejectReason::not_registered, agent);
      return submit_rating(kb, agent, cmd.target, cmd.criterion, cmd.value, ctx.timestamp);
    case CommandKind::def_measure:
      if (!kb.is_registered(agent)) return reject(RejectReason::not_registered, agent);
      return define_measure(kb, cmd.target, cmd.expression);
    case CommandKind::set_filter:
      if (!kb.is_registered(agent)) return reject(RejectReason::not_registered, agent);
      return define_filter(kb, cmd.target, cmd.action, cmd.expression);
    case CommandKind::spec_of:
    case CommandKind::query_graph: break;
  }
  throw Error(ErrorCode::unsupported, "unsupported: queries do not change the knowledge base");
}

}  // namespace cbkb
