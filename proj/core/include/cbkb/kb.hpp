#pragma once
// The complete, copyable state of one knowledge base. Edits run on a copy
// and replace the original only when accepted.

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "cbkb/hierarchy.hpp"
#include "cbkb/matcher.hpp"
#include "cbkb/model.hpp"

namespace cbkb {

struct Rating {
  std::string id;
  std::string rater;
  std::string object;
  std::string criterion;
  double value = 0.0;
  std::string date;
  bool operator==(const Rating&) const = default;
};

struct FilterDef {
  std::string action;  // hide | small-font
  std::string expression;
  bool operator==(const FilterDef&) const = default;
};

struct KnowledgeBase {
  std::map<std::string, Source> sources;
  std::map<std::string, Term> terms;
  std::map<std::string, Statement> statements;
  Hierarchy hierarchy;
  std::map<std::string, std::string> clone_of;  // clone or renamed term -> origin
  std::map<std::string, unsigned> statement_counter;
  std::map<std::string, unsigned> rating_counter;
  std::map<std::string, Rating> ratings;  // by id
  std::map<std::tuple<std::string, std::string, std::string>, std::string> rating_index;
  std::map<std::string, std::string> measures;
  std::map<std::string, FilterDef> filters;
  // Beliefs kept alive for dependent users after their creator removed them.
  std::set<std::string> inherited;
  MatcherOptions matcher;

  // Root `thing`, `process`, `relation-type` and the built-in relation types.
  static KnowledgeBase preloaded();

  bool is_registered(const std::string& source) const { return sources.contains(source); }
  bool exists(const std::string& id) const;
  const Statement* statement(const std::string& id) const;
  std::vector<const Statement*> graph_statements() const;
  std::vector<const Statement*> statements_by(const std::string& creator) const;
  std::set<std::string> taken_ids() const;

  // Statement-to-statement links made by users (classification excluded).
  bool explicitly_linked(const std::string& a, const std::string& b) const;
};

// Built-in relation type names of the preloaded upper ontology.
const std::vector<std::string>& builtin_relation_types();

}  // namespace cbkb
