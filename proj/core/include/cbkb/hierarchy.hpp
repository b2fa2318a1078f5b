#pragma once
// The single extended-specialization hierarchy over terms and statements.
// Links run from the more specific object to the more general one
// (`u1#bird --subtype--> wn#bird`); corrective and argumentation links run
// from the correcting/arguing statement to its target.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cbkb/matcher.hpp"
#include "cbkb/model.hpp"
#include "cbkb/notation.hpp"

namespace cbkb {

enum class LinkKind {
  subtype,
  instance,
  logical_deduction_of,
  informal_generalization,
  subprocess,
  equivalence,
  example,
  corrective,
  argumentation,
};

const char* to_string(LinkKind k);
std::optional<LinkKind> link_kind_from_string(std::string_view s);

// Links forming the strict specialization order (must stay acyclic).
bool is_strict(LinkKind k);

struct HierarchyLink {
  LinkKind kind = LinkKind::subtype;
  std::string from;
  std::string to;
  std::string creator;
  std::string relation;  // meta relation name for corrective / argumentation
  bool system = false;   // materialized by classification

  auto operator<=>(const HierarchyLink&) const = default;
  bool operator==(const HierarchyLink&) const = default;
};

struct Placement {
  std::vector<std::string> direct_generalizations;
  std::vector<std::string> direct_specializations;
  bool operator==(const Placement&) const = default;
};

enum class ObjectKind { term, statement };

class Hierarchy : public Ontology {
 public:
  static constexpr const char* kRoot = "thing";

  Hierarchy();
  Hierarchy(const Hierarchy& other);
  Hierarchy& operator=(const Hierarchy& other);
  Hierarchy(Hierarchy&&) noexcept = default;
  Hierarchy& operator=(Hierarchy&&) noexcept = default;

  // Registers an object without anchoring (the root, statements).
  void add_object(const std::string& id, ObjectKind kind,
                  std::optional<std::string> name = std::nullopt);

  // Adds a term with at least one subtype / instance / equivalence /
  // informal-generalization / subprocess anchor to an existing object.
  // Throws Error(no_anchor | unknown_object | cycle_introduced).
  void add_term(const Term& term, const std::vector<HierarchyLink>& anchors);

  // Throws Error(unknown_object | cycle_introduced).
  void add_link(const HierarchyLink& link);
  void remove_link(const HierarchyLink& link);
  void remove_object(const std::string& id);
  void rename_object(const std::string& from, const std::string& to,
                     std::optional<std::string> new_name = std::nullopt);

  bool contains(const std::string& id) const { return objects_.contains(id); }
  bool is_statement(const std::string& id) const;
  const std::set<HierarchyLink>& links() const { return links_; }
  std::vector<HierarchyLink> links_from(const std::string& id) const;
  std::vector<HierarchyLink> links_to(const std::string& id) const;
  const std::map<std::string, ObjectKind>& objects() const { return objects_; }

  // Ontology
  bool reaches(std::string_view specific, std::string_view general) const override;
  std::vector<std::string> formal_terms_named(std::string_view name) const override;
  bool is_formal(std::string_view term) const override;

  // Objects reachable through inverse specialization links within
  // `max_depth` levels (each object once, at its shallowest depth).
  // Throws Error(unknown_object).
  TreeNode specializations_of(const std::string& root,
                              std::size_t max_depth = SIZE_MAX) const;

  // True when a chain of links between statements connects a and b.
  // With `include_system` false, links materialized by classification are
  // ignored. Throws Error(unknown_object).
  bool explicitly_related(const std::string& a, const std::string& b,
                          bool include_system = true) const;

  // Statements connected to `id` through statement-to-statement links.
  std::set<std::string> statement_component(const std::string& id,
                                            bool include_system = true) const;

  bool strict_reaches(const std::string& from, const std::string& to) const;
  bool is_acyclic() const;
  // Objects other than the root that cannot reach it.
  std::vector<std::string> unanchored() const;

 private:
  struct Cache {
    std::mutex mutex;
    std::map<std::string, std::set<std::string>> ancestors;
  };

  void invalidate() { cache_ = std::make_shared<Cache>(); }
  void rebuild_index();
  const std::set<std::string>& ancestors_locked(Cache& c, const std::string& id) const;

  std::map<std::string, ObjectKind> objects_;
  std::map<std::string, std::set<std::string>> names_;  // name -> formal terms
  std::set<HierarchyLink> links_;
  std::map<std::string, std::vector<HierarchyLink>> up_, down_;
  std::shared_ptr<Cache> cache_;
};

}  // namespace cbkb
