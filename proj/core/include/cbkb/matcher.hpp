#pragma once
// Extended specialization between statements, computed by graph projection
// with quantifier, measure, term and context subsumption.
//
// Node rules (general node g, specific node s):
//   at-least m  <- at-least n / exact n with n >= m, class(s) within class(g)
//   exact m     <- exact m with equal classes, and the whole graphs must be
//                  equivalent (mutual projection)
//   every       <- every with class(g) within class(s); an individual of
//                  class(g) is an instantiation, flagged separately
//   p% / most   <- every with class(g) within class(s), or q% with q >= p on
//                  an equal class; `most` is read as 50% and flagged advisory
//   individual  <- the same individual
// A class is a term plus an optional measure interval.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cbkb/model.hpp"

namespace cbkb {

// Read access to the term hierarchy used for subsumption.
class Ontology {
 public:
  virtual ~Ontology() = default;
  // True when `specific` equals `general` or reaches it through subtype,
  // instance, equivalence or informal-generalization links.
  virtual bool reaches(std::string_view specific, std::string_view general) const = 0;
  virtual std::vector<std::string> formal_terms_named(std::string_view name) const = 0;
  virtual bool is_formal(std::string_view term) const = 0;
};

bool quantifier_subsumes(const Quantifier& general, const Quantifier& specific);

// Universal quantification weakened to a named individual.
bool is_instantiation(const Quantifier& general, const Quantifier& specific);

bool term_subsumes(std::string_view general, std::string_view specific,
                   const Ontology& ontology);

bool measure_refines(const std::optional<Measure>& general,
                     const std::optional<Measure>& specific);

struct Mapping {
  std::vector<std::size_t> node_map;  // query node -> target node
  std::vector<std::size_t> edge_map;  // query edge -> target edge
  bool instantiation = false;
  bool advisory = false;
  bool reversed = false;  // negated statements: map runs target -> query
};

// Projection of graph `x` (general) into graph `y` (specific). Forest-shaped
// queries are solved by a tree dynamic program; other queries by backtracking.
std::optional<Mapping> project_graph(const Graph& x, const Graph& y,
                                     const Ontology& ontology,
                                     bool allow_instantiation = true);

// Statement-level projection: adds context refinement and negation handling.
std::optional<Mapping> project(const Statement& x, const Statement& y,
                               const Ontology& ontology);

enum class CompareKind {
  equivalent,
  specializes,
  generalizes,
  instantiation_of,
  instantiated_by,
  exclusive,
  unrelated,
};

const char* to_string(CompareKind k);

struct CompareResult {
  CompareKind kind = CompareKind::unrelated;
  std::optional<Mapping> mapping;
  bool advisory = false;
  bool interval_exclusion = false;
};

struct MatcherOptions {
  // Same-shaped statements whose individual nodes carry disjoint measure
  // intervals are reported as exclusive.
  bool interval_exclusion = true;
};

// `specializes` means x specializes y.
CompareResult compare(const Statement& x, const Statement& y, const Ontology& ontology,
                      const MatcherOptions& options = {});

bool is_conflicting(CompareKind k);
std::optional<ConflictKind> conflict_kind(CompareKind k);

// One conflict per stored graph statement related to `stmt` by equivalence,
// specialization, generalization or exclusion, skipping those for which
// `explicitly_linked` returns true. Output is ordered by statement id.
std::vector<Conflict> detect_conflicts(
    const Statement& stmt, std::span<const Statement* const> stored,
    const Ontology& ontology,
    const std::function<bool(const std::string&)>& explicitly_linked = {},
    const MatcherOptions& options = {});

// Replaces the `no` quantifier by `at least 1` and, when `existential_import`
// is set, universal / percent / most by `at least 1`.
Statement positive_form(const Statement& stmt, bool existential_import);

}  // namespace cbkb
