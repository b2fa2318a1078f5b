#include "cbkb/kb.hpp"

namespace cbkb {

const std::vector<std::string>& builtin_relation_types() {
  static const std::vector<std::string> names = {
      "subtype",  "instance",    "part",     "agent",     "duration",
      "corrective_restriction",  "corrective_generalization",
      "argument", "objection",   "equivalence", "example", "subprocess"};
  return names;
}

KnowledgeBase KnowledgeBase::preloaded() {
  KnowledgeBase kb;
  auto add = [&](const std::string& id, const std::string& parent) {
    Term t;
    t.id = id;
    t.names = {id};
    kb.terms[id] = t;
    if (parent.empty()) return;
    kb.hierarchy.add_term(t, {HierarchyLink{LinkKind::subtype, id, parent, "", "", false}});
  };
  Term root;
  root.id = Hierarchy::kRoot;
  root.names = {root.id};
  kb.terms[root.id] = root;
  add("process", Hierarchy::kRoot);
  add("relation-type", Hierarchy::kRoot);
  for (const std::string& r : builtin_relation_types()) add(r, "relation-type");
  return kb;
}

bool KnowledgeBase::exists(const std::string& id) const {
  return terms.contains(id) || statements.contains(id) || ratings.contains(id) ||
         sources.contains(id);
}

const Statement* KnowledgeBase::statement(const std::string& id) const {
  auto it = statements.find(id);
  return it == statements.end() ? nullptr : &it->second;
}

std::vector<const Statement*> KnowledgeBase::graph_statements() const {
  std::vector<const Statement*> out;
  for (const auto& [id, s] : statements) {
    if (s.graph()) out.push_back(&s);
  }
  return out;
}

std::vector<const Statement*> KnowledgeBase::statements_by(const std::string& creator) const {
  std::vector<const Statement*> out;
  for (const auto& [id, s] : statements) {
    if (s.creator == creator) out.push_back(&s);
  }
  return out;
}

std::set<std::string> KnowledgeBase::taken_ids() const {
  std::set<std::string> out;
  for (const auto& [id, t] : terms) out.insert(id);
  for (const auto& [id, s] : statements) out.insert(id);
  for (const auto& [id, r] : ratings) out.insert(id);
  return out;
}

bool KnowledgeBase::explicitly_linked(const std::string& a, const std::string& b) const {
  if (!hierarchy.contains(a) || !hierarchy.contains(b)) return false;
  return hierarchy.explicitly_related(a, b, false);
}

}  // namespace cbkb
