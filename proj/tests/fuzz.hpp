#pragma once
// Random command streams from a handful of users over a small bird/flight
// vocabulary, plus the invariant checks run after each accepted command.

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cbkb/protocol.hpp"
#include "cbkb/store.hpp"

namespace cbkb::fuzz {

inline const std::vector<std::string>& users() {
  static const std::vector<std::string> u = {"u1", "u2", "u3", "u4", "u5"};
  return u;
}

inline std::string setup_script() {
  std::string s;
  s += "register pm;\n";
  for (const std::string& u : users()) s += "register " + u + ";\n";
  s += "thing subtype: wn#animal (wn);\n";
  s += "wn#animal subtype: wn#bird wn#fish (wn);\n";
  s += "wn#bird subtype: wn#penguin (wn);\n";
  s += "process subtype: wn#flight (wn);\n";
  s += "wn#flight subtype: wn#long_flight (wn);\n";
  s += "wn#bird instance: wn#Tweety (wn);\n";
  return s;
}

struct Step {
  std::string agent;
  std::string text;
};

class Generator {
 public:
  explicit Generator(unsigned seed) : rng_(seed) {}

  Step next(const KnowledgeBase& kb) {
    const std::string agent = pick(users());
    int roll = uniform(100);
    if (roll < 35) return {agent, agent + "#`" + clause(agent) + "´;"};
    if (roll < 45) return {agent, agent + "#`" + definition(agent) + "´;"};
    if (roll < 60) {
      std::string target = foreign_statement(kb, agent);
      if (!target.empty()) {
        const char* rel = uniform(2) ? "corrective_generalization" : "corrective_restriction";
        return {agent, agent + "#`" + target + " has for " + rel + " " + agent + "#`" +
                           clause(agent) + "´´;"};
      }
      return {agent, agent + "#`" + clause(agent) + "´;"};
    }
    if (roll < 72) {
      std::vector<std::string> own;
      for (const Statement* s : kb.statements_by(agent)) own.push_back(s->id);
      if (!own.empty() && uniform(5)) return {agent, "remove " + pick(own) + ";"};
      return {agent, "remove " + pick(users()) + "#s" + std::to_string(1 + uniform(9)) + ";"};
    }
    if (roll < 84) {
      std::vector<std::string> ids;
      for (const auto& [id, s] : kb.statements) ids.push_back(id);
      std::string object = ids.empty() || !uniform(6) ? "wn#bird" : pick(ids);
      if (!uniform(8)) object = "u9#s1";
      double v = uniform(12) / 10.0;
      return {agent, "rate " + object + " " + pick(criteria()) + " " + number(v) + ";"};
    }
    if (roll < 90) {
      return {agent, pick(animals()) + " " + pick({"part", "agent"}) + ": " + pick(animals()) +
                         ";"};
    }
    if (roll < 94) return {agent, "spec of " + pick(animals()) + ";"};
    if (roll < 97) return {agent, "register " + pick(users()) + ";"};
    if (roll < 99) return {agent, agent + "#\"birds mostly fly\";"};
    return {agent, "every bird can;"};
  }

 private:
  static const std::vector<std::string>& animals() {
    static const std::vector<std::string> a = {"wn#animal", "wn#bird", "wn#penguin", "wn#fish"};
    return a;
  }
  static const std::vector<std::string>& criteria() {
    static const std::vector<std::string> c = {"acceptance", "acceptance", "originality"};
    return c;
  }

  std::string clause(const std::string& agent) {
    static const std::vector<std::string> q = {"every", "no", "75% of", "at least 2", "a",
                                               "most", "50% of", "any"};
    std::string quant = pick(q);
    std::string subject = pick(animals());
    if (quant == "any") quant = "every";
    if (!uniform(8)) return "wn#Tweety can be agent of a " + flight();
    if (!uniform(10)) subject = agent + "#" + pick({"bird", "fish"});
    return quant + " " + subject + " can be agent of a " + flight();
  }

  std::string definition(const std::string& agent) {
    std::string term = uniform(2) ? agent + "#" + pick({"bird", "fish", "walker"})
                                  : pick(animals());
    return "any " + term + " can be agent of a " + flight();
  }

  std::string flight() { return uniform(3) ? "wn#flight" : "wn#long_flight"; }

  std::string foreign_statement(const KnowledgeBase& kb, const std::string& agent) {
    std::vector<std::string> ids;
    for (const Statement* s : kb.graph_statements()) {
      if (s->creator != agent) ids.push_back(s->id);
    }
    return ids.empty() ? std::string() : pick(ids);
  }

  static std::string number(double v) {
    std::string s = std::to_string(v);
    while (s.size() > 1 && s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    return s;
  }

  int uniform(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  template <class C>
  typename C::value_type pick(const C& c) {
    return c[static_cast<std::size_t>(uniform(static_cast<int>(c.size())))];
  }
  std::string pick(std::initializer_list<const char*> c) {
    return *(c.begin() + uniform(static_cast<int>(c.size())));
  }

  std::mt19937 rng_;
};

// Follows clone and rename links back to the original term.
inline std::string origin(const KnowledgeBase& kb, std::string term) {
  for (auto it = kb.clone_of.find(term); it != kb.clone_of.end(); it = kb.clone_of.find(term)) {
    term = it->second;
  }
  return term;
}

inline Statement with_origins(const KnowledgeBase& kb, Statement s) {
  if (const Graph* g = s.graph()) {
    std::vector<std::string> terms;
    for (const ConceptNode& node : g->nodes) terms.push_back(node.term);
    for (const std::string& t : terms) {
      std::string o = origin(kb, t);
      if (o != t) s = rename_term(s, t, o);
    }
  }
  return s;
}

// What a referenced statement says, whoever holds it now.
inline std::string content(const KnowledgeBase& kb, const std::string& id) {
  const Statement* s = kb.statement(id);
  if (!s) return id;
  Statement n = with_origins(kb, *s);
  n.id.clear();
  n.creator.clear();
  n.believer.reset();
  n.interpreted.reset();
  n.date.clear();
  return "<" + canonical_statement(n) + ">";
}

// Each user's own statements with every term mapped to its origin and every
// statement reference replaced by its content, so that cloning and
// re-attribution do not count as a change.
inline std::map<std::string, std::multiset<std::string>> holdings(const KnowledgeBase& kb) {
  std::map<std::string, std::multiset<std::string>> out;
  for (const auto& [id, s] : kb.statements) {
    if (kb.inherited.contains(id)) continue;
    Statement n = with_origins(kb, s);
    if (MetaBody* m = std::get_if<MetaBody>(&n.body)) {
      if (!m->subject.is_embedded()) m->subject.id = content(kb, m->subject.id);
      if (!m->object.is_embedded()) m->object.id = content(kb, m->object.id);
    }
    out[s.creator].insert(canonical_statement(n));
  }
  return out;
}

struct Violation {
  std::string invariant;
  std::string detail;
};

// Checks run after `agent` had a command accepted, taking the state from
// `before` to `after`.
inline std::vector<Violation> check_accepted(const KnowledgeBase& before,
                                             const KnowledgeBase& after,
                                             const std::string& agent) {
  std::vector<Violation> out;
  for (const auto& [a, b] : organization_violations(after)) {
    const Statement* sa = after.statement(a);
    const Statement* sb = after.statement(b);
    if (sa && sb && sa->creator != sb->creator) {
      out.push_back({"organization", a + " " + b});
    }
  }
  if (!after.hierarchy.is_acyclic()) out.push_back({"dag", "cycle among strict links"});
  auto old_holdings = holdings(before);
  auto new_holdings = holdings(after);
  for (const auto& [user, held] : old_holdings) {
    if (user == agent) continue;
    const std::multiset<std::string>& now = new_holdings[user];
    if (now == held) continue;
    std::string detail = user;
    for (const std::string& s : held) {
      if (!now.contains(s)) detail += " lost [" + s + "]";
    }
    for (const std::string& s : now) {
      if (!held.contains(s)) detail += " gained [" + s + "]";
    }
    out.push_back({"loss-less", detail});
  }
  return out;
}

}  // namespace cbkb::fuzz
