#pragma once
// Domain types shared by every module of the knowledge base: identifiers,
// sources, terms, quantified concept nodes, statements and edit outcomes.
//
// Terms and statements are referenced by their rendered identifier string
// (`creator#name` or `creator#name-k`). Unprefixed tokens in a statement are
// informal labels unless a creator-less term of that name exists in the KB
// (the preloaded upper ontology).

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cbkb {

struct Identifier {
  std::string creator;  // empty for creator-less vocabulary
  std::string name;
  std::optional<unsigned> suffix;

  std::string str() const;

  // Splits `creator#name[-k]`. A token without '#' yields an empty creator.
  static Identifier parse(std::string_view text);

  friend bool operator==(const Identifier& a, const Identifier& b) {
    return a.str() == b.str();
  }
  friend std::strong_ordering operator<=>(const Identifier& a,
                                          const Identifier& b) {
    return a.str() <=> b.str();
  }
};

// True for letters, digits, '_', '-', '.'.
bool is_token_char(char c);

// Returns `creator#name` when free, else the lowest `creator#name-k` (k >= 2)
// not present in `taken`. Throws Error(malformed_name) with the offending
// position for an empty or non-token name.
Identifier mint_identifier(std::string_view creator, std::string_view name,
                           const std::set<std::string>& taken);

enum class SourceKind { user, file, language, external_vocabulary };

struct Source {
  std::string id;
  SourceKind kind = SourceKind::user;
  bool operator==(const Source&) const = default;
};

enum class QuantKind {
  individual,
  exact,
  at_least,
  at_least_percent,
  most,
  universal,
  none,
};

struct Quantifier {
  QuantKind kind = QuantKind::at_least;
  unsigned n = 1;        // exact / at_least
  double percent = 0.0;  // at_least_percent

  static Quantifier individual() { return {QuantKind::individual, 0, 0.0}; }
  static Quantifier exact(unsigned n) { return {QuantKind::exact, n, 0.0}; }
  static Quantifier at_least(unsigned n) { return {QuantKind::at_least, n, 0.0}; }
  static Quantifier percent_of(double p) {
    return {QuantKind::at_least_percent, 0, p};
  }
  static Quantifier most() { return {QuantKind::most, 0, 0.0}; }
  static Quantifier universal() { return {QuantKind::universal, 0, 0.0}; }
  static Quantifier no() { return {QuantKind::none, 0, 0.0}; }

  bool operator==(const Quantifier&) const = default;
};

enum class Comparator { at_least, at_most, equal };

struct Measure {
  std::string relation;  // e.g. duration
  Comparator comparator = Comparator::equal;
  double magnitude = 0.0;
  std::string unit;
  bool operator==(const Measure&) const = default;
};

struct ConceptNode {
  std::string term;  // identifier or informal label
  Quantifier quantifier;
  std::optional<std::string> referent;  // set iff quantifier is individual
  std::optional<Measure> measure;
  bool operator==(const ConceptNode&) const = default;
};

struct Edge {
  std::size_t subject = 0;
  std::string relation;
  std::size_t object = 0;
  bool operator==(const Edge&) const = default;
};

struct Graph {
  std::vector<ConceptNode> nodes;
  std::vector<Edge> edges;
  bool operator==(const Graph&) const = default;
};

struct Statement;

// A reference to another statement inside a meta-statement: either the id of
// a stored statement or an embedded statement (resolved on insertion).
struct StatementRef {
  std::string id;
  std::shared_ptr<const Statement> embedded;

  bool is_embedded() const { return embedded != nullptr; }
  friend bool operator==(const StatementRef& a, const StatementRef& b);
};

struct MetaBody {
  StatementRef subject;  // the statement that "has for" ...
  std::string relation;  // corrective_restriction, argument, ...
  StatementRef object;
  bool operator==(const MetaBody&) const = default;
};

struct TextBody {
  std::string text;
  bool operator==(const TextBody&) const = default;
};

using Body = std::variant<Graph, MetaBody, TextBody>;

enum class ContextKind { modality_possible, place, period };

struct Context {
  ContextKind kind = ContextKind::modality_possible;
  std::string value;  // place term or period start
  std::string until;  // period end
  bool operator==(const Context&) const = default;
  auto operator<=>(const Context&) const = default;
};

enum class StatementKind { definition, belief, informal };

struct Statement {
  std::string id;  // empty until stored
  std::string creator;
  std::optional<std::string> believer;
  std::optional<std::string> interpreted;  // the source being represented
  StatementKind kind = StatementKind::belief;
  Body body;
  std::vector<Context> contexts;  // kept sorted
  std::string date;               // empty means "not stated"

  const Graph* graph() const { return std::get_if<Graph>(&body); }
  const MetaBody* meta() const { return std::get_if<MetaBody>(&body); }
  const TextBody* text() const { return std::get_if<TextBody>(&body); }
  bool is_possible() const;
  bool operator==(const Statement&) const = default;
};

enum class Formality { formal, informal };

struct Term {
  std::string id;
  std::string creator;  // may be empty for the upper ontology
  Formality formality = Formality::formal;
  std::set<std::string> names;
  std::vector<std::string> definitions;  // statement ids
  std::string created;
  bool operator==(const Term&) const = default;
};

// Meta relations recognised between statements.
bool is_corrective_relation(std::string_view relation);
bool is_argumentation_relation(std::string_view relation);
bool is_explicit_statement_relation(std::string_view relation);

enum class ConflictKind {
  exclusion,
  specialization,
  generalization,
  equivalence,
  instantiation,
};

// `kind` describes how the new statement relates to `existing`.
struct Conflict {
  std::string existing;
  ConflictKind kind = ConflictKind::specialization;
  bool advisory = false;  // involves the `most` quantifier
  bool operator==(const Conflict&) const = default;
};

enum class EditStatus { accepted, rejected, accepted_with_cloning };

enum class RejectReason {
  not_creator,
  own_inconsistency,
  own_redundancy,
  implicit_conflict,
  informal_unlinked,
  term_def_inconsistent,
  unknown_object,
  ill_formed,
  no_anchor,
  cycle_introduced,
  not_registered,
  out_of_range,
  ill_typed_expression,
};

struct ClonedTerm {
  std::string new_term;
  std::string for_user;
  std::optional<std::string> dropped_definition;
  bool operator==(const ClonedTerm&) const = default;
};

struct CloneReport {
  std::string original_term;
  std::vector<ClonedTerm> clones;
  std::vector<std::string> rewritten_statements;
  bool operator==(const CloneReport&) const = default;
};

struct EditOutcome {
  EditStatus status = EditStatus::accepted;
  std::optional<RejectReason> reason;
  std::vector<Conflict> conflicts;
  std::optional<CloneReport> clone_report;
  std::vector<std::string> created;  // ids of objects created by the edit
  std::vector<std::string> warnings;
  std::string detail;

  bool ok() const { return status != EditStatus::rejected; }

  static EditOutcome reject(RejectReason reason, std::string detail = {},
                            std::vector<Conflict> conflicts = {});
  bool operator==(const EditOutcome&) const = default;
};

// Returns the names of violated structural invariants; empty when well formed.
std::vector<std::string> check_well_formed(const Statement& stmt);

// Advisory issues that never cause rejection (e.g. missing place/period).
std::vector<std::string> contextualization_warnings(const Statement& stmt);

// Term of the subject node of a definition, empty for other statements.
std::string defined_term(const Statement& stmt);

// All term and relation labels a statement mentions (graph bodies only).
std::set<std::string> mentioned_terms(const Statement& stmt);

const char* to_string(QuantKind k);
const char* to_string(StatementKind k);
const char* to_string(ConflictKind k);
const char* to_string(EditStatus s);
const char* to_string(RejectReason r);
const char* to_string(SourceKind k);
const char* to_string(ContextKind k);

// Stable one-line rendering of an outcome, used for golden files and digests.
std::string describe(const EditOutcome& outcome);

}  // namespace cbkb
