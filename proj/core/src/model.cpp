#include "cbkb/model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "cbkb/error.hpp"

namespace cbkb {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::malformed_name: return "malformed-name";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::unknown_object: return "unknown-object";
    case ErrorCode::no_anchor: return "no-anchor";
    case ErrorCode::cycle_introduced: return "cycle-introduced";
    case ErrorCode::out_of_range: return "out-of-range";
    case ErrorCode::ill_typed_expression: return "ill-typed-expression";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::gap_in_sequence: return "gap-in-sequence";
    case ErrorCode::write_failure: return "write-failure";
    case ErrorCode::corrupt_entry: return "corrupt-entry";
    case ErrorCode::not_registered: return "not-registered";
  }
  return "?";
}

ParseError::ParseError(std::size_t line, std::size_t column,
                       std::string expected, std::string found)
    : Error(ErrorCode::parse_error,
            std::to_string(line) + ":" + std::to_string(column) +
                ": expected " + expected + ", found '" + found + "'"),
      line_(line),
      column_(column),
      expected_(std::move(expected)),
      found_(std::move(found)) {}

std::string Identifier::str() const {
  std::string out;
  if (!creator.empty()) out = creator + "#";
  out += name;
  if (suffix) out += "-" + std::to_string(*suffix);
  return out;
}

Identifier Identifier::parse(std::string_view text) {
  Identifier id;
  auto hash = text.find('#');
  std::string_view rest = text;
  if (hash != std::string_view::npos) {
    id.creator = std::string(text.substr(0, hash));
    rest = text.substr(hash + 1);
  }
  auto dash = rest.rfind('-');
  if (dash != std::string_view::npos && dash > 0 && dash + 1 < rest.size()) {
    auto digits = rest.substr(dash + 1);
    unsigned k = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc() && p == digits.data() + digits.size() && k >= 2 &&
        digits.front() != '0') {
      id.name = std::string(rest.substr(0, dash));
      id.suffix = k;
      return id;
    }
  }
  id.name = std::string(rest);
  return id;
}

bool is_token_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
         c == '.';
}

Identifier mint_identifier(std::string_view creator, std::string_view name,
                           const std::set<std::string>& taken) {
  if (name.empty()) {
    throw Error(ErrorCode::malformed_name, "malformed-name: empty name at position 0");
  }
  for (std::size_t i = 0; i < name.size(); ++i) {
    if (!is_token_char(name[i])) {
      throw Error(ErrorCode::malformed_name,
                  "malformed-name: invalid character '" + std::string(1, name[i]) +
                      "' at position " + std::to_string(i));
    }
  }
  Identifier id{std::string(creator), std::string(name), std::nullopt};
  if (!taken.contains(id.str())) return id;
  for (unsigned k = 2;; ++k) {
    id.suffix = k;
    if (!taken.contains(id.str())) return id;
  }
}

bool operator==(const StatementRef& a, const StatementRef& b) {
  if (a.id != b.id) return false;
  if (a.is_embedded() != b.is_embedded()) return false;
  return !a.is_embedded() || *a.embedded == *b.embedded;
}

bool Statement::is_possible() const {
  return std::any_of(contexts.begin(), contexts.end(), [](const Context& c) {
    return c.kind == ContextKind::modality_possible;
  });
}

bool is_corrective_relation(std::string_view r) {
  return r == "corrective_restriction" || r == "corrective_generalization" ||
         r == "corrective_specialization";
}

bool is_argumentation_relation(std::string_view r) {
  return r == "argument" || r == "objection";
}

bool is_explicit_statement_relation(std::string_view r) {
  return is_corrective_relation(r) || is_argumentation_relation(r) ||
         r == "specialization" || r == "generalization" || r == "equivalence" ||
         r == "example";
}

EditOutcome EditOutcome::reject(RejectReason reason, std::string detail,
                                std::vector<Conflict> conflicts) {
  EditOutcome o;
  o.status = EditStatus::rejected;
  o.reason = reason;
  o.detail = std::move(detail);
  o.conflicts = std::move(conflicts);
  return o;
}

std::vector<std::string> check_well_formed(const Statement& stmt) {
  std::vector<std::string> v;
  if (stmt.creator.empty()) v.emplace_back("missing-creator");
  switch (stmt.kind) {
    case StatementKind::definition:
      if (stmt.believer) v.emplace_back("definition-has-believer");
      if (!stmt.graph()) {
        v.emplace_back("definition-body-not-graph");
      } else if (!stmt.graph()->nodes.empty() &&
                 stmt.graph()->nodes.front().quantifier.kind != QuantKind::universal) {
        v.emplace_back("definition-subject-not-universal");
      } else if (!stmt.graph()->nodes.empty() &&
                 stmt.graph()->nodes.front().term.find('#') == std::string::npos) {
        v.emplace_back("definition-of-informal-term");
      }
      break;
    case StatementKind::belief:
      if (!stmt.believer) v.emplace_back("belief-missing-believer");
      if (stmt.text()) v.emplace_back("belief-body-is-text");
      break;
    case StatementKind::informal:
      if (!stmt.text()) v.emplace_back("informal-body-not-text");
      break;
  }
  if (const Graph* g = stmt.graph()) {
    if (g->nodes.empty()) v.emplace_back("empty-graph");
    for (const Edge& e : g->edges) {
      if (e.subject >= g->nodes.size() || e.object >= g->nodes.size()) {
        v.emplace_back("edge-out-of-range");
        break;
      }
      if (e.relation.empty()) {
        v.emplace_back("edge-without-relation");
        break;
      }
    }
    for (const ConceptNode& n : g->nodes) {
      if (n.referent.has_value() != (n.quantifier.kind == QuantKind::individual)) {
        v.emplace_back("individual-referent-mismatch");
        break;
      }
    }
    for (const ConceptNode& n : g->nodes) {
      const auto& q = n.quantifier;
      if (q.kind == QuantKind::at_least_percent &&
          (q.percent <= 0.0 || q.percent > 100.0)) {
        v.emplace_back("percent-out-of-range");
        break;
      }
    }
  }
  if (const MetaBody* m = stmt.meta()) {
    if (!is_explicit_statement_relation(m->relation)) {
      v.emplace_back("unknown-meta-relation");
    }
  }
  return v;
}

std::vector<std::string> contextualization_warnings(const Statement& stmt) {
  std::vector<std::string> w;
  const Graph* g = stmt.graph();
  if (stmt.kind != StatementKind::belief || !g) return w;
  bool general = std::any_of(g->nodes.begin(), g->nodes.end(), [](const ConceptNode& n) {
    return n.quantifier.kind == QuantKind::universal ||
           n.quantifier.kind == QuantKind::at_least_percent ||
           n.quantifier.kind == QuantKind::most;
  });
  if (!general) return w;
  auto has = [&](ContextKind k) {
    return std::any_of(stmt.contexts.begin(), stmt.contexts.end(),
                       [k](const Context& c) { return c.kind == k; });
  };
  if (!has(ContextKind::place) || !has(ContextKind::period)) {
    w.emplace_back("belief-not-contextualized-in-place-and-period");
  }
  return w;
}

std::string defined_term(const Statement& stmt) {
  if (stmt.kind != StatementKind::definition || !stmt.graph() ||
      stmt.graph()->nodes.empty()) {
    return {};
  }
  return stmt.graph()->nodes.front().term;
}

std::set<std::string> mentioned_terms(const Statement& stmt) {
  std::set<std::string> out;
  const Graph* g = stmt.graph();
  if (!g) return out;
  for (const ConceptNode& n : g->nodes) {
    out.insert(n.term);
    if (n.measure) out.insert(n.measure->relation);
  }
  for (const Edge& e : g->edges) out.insert(e.relation);
  for (const Context& c : stmt.contexts) {
    if (c.kind == ContextKind::place) out.insert(c.value);
  }
  return out;
}

const char* to_string(QuantKind k) {
  switch (k) {
    case QuantKind::individual: return "individual";
    case QuantKind::exact: return "exact";
    case QuantKind::at_least: return "at-least";
    case QuantKind::at_least_percent: return "at-least-percent";
    case QuantKind::most: return "most";
    case QuantKind::universal: return "universal";
    case QuantKind::none: return "no";
  }
  return "?";
}

const char* to_string(StatementKind k) {
  switch (k) {
    case StatementKind::definition: return "definition";
    case StatementKind::belief: return "belief";
    case StatementKind::informal: return "informal";
  }
  return "?";
}

const char* to_string(ConflictKind k) {
  switch (k) {
    case ConflictKind::exclusion: return "exclusion";
    case ConflictKind::specialization: return "specialization";
    case ConflictKind::generalization: return "generalization";
    case ConflictKind::equivalence: return "equivalence";
    case ConflictKind::instantiation: return "instantiation";
  }
  return "?";
}

const char* to_string(EditStatus s) {
  switch (s) {
    case EditStatus::accepted: return "accepted";
    case EditStatus::rejected: return "rejected";
    case EditStatus::accepted_with_cloning: return "accepted-with-cloning";
  }
  return "?";
}

const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::not_creator: return "not-creator";
    case RejectReason::own_inconsistency: return "own-inconsistency";
    case RejectReason::own_redundancy: return "own-redundancy";
    case RejectReason::implicit_conflict: return "implicit-conflict";
    case RejectReason::informal_unlinked: return "informal-unlinked";
    case RejectReason::term_def_inconsistent: return "term-def-inconsistent";
    case RejectReason::unknown_object: return "unknown-object";
    case RejectReason::ill_formed: return "ill-formed";
    case RejectReason::no_anchor: return "no-anchor";
    case RejectReason::cycle_introduced: return "cycle-introduced";
    case RejectReason::not_registered: return "not-registered";
    case RejectReason::out_of_range: return "out-of-range";
    case RejectReason::ill_typed_expression: return "ill-typed-expression";
  }
  return "?";
}

const char* to_string(SourceKind k) {
  switch (k) {
    case SourceKind::user: return "user";
    case SourceKind::file: return "file";
    case SourceKind::language: return "language";
    case SourceKind::external_vocabulary: return "external-vocabulary";
  }
  return "?";
}

const char* to_string(ContextKind k) {
  switch (k) {
    case ContextKind::modality_possible: return "modality-possible";
    case ContextKind::place: return "place";
    case ContextKind::period: return "period";
  }
  return "?";
}

std::string describe(const EditOutcome& o) {
  std::ostringstream out;
  out << to_string(o.status);
  if (o.reason) out << " reason=" << to_string(*o.reason);
  if (!o.created.empty()) {
    out << " created=";
    for (std::size_t i = 0; i < o.created.size(); ++i) {
      out << (i ? "," : "") << o.created[i];
    }
  }
  if (!o.conflicts.empty()) {
    out << " conflicts=";
    for (std::size_t i = 0; i < o.conflicts.size(); ++i) {
      const Conflict& c = o.conflicts[i];
      out << (i ? "," : "") << c.existing << ":" << to_string(c.kind)
          << (c.advisory ? "?" : "");
    }
  }
  if (o.clone_report) {
    const CloneReport& r = *o.clone_report;
    out << " cloned=" << r.original_term << "->";
    for (std::size_t i = 0; i < r.clones.size(); ++i) {
      out << (i ? "," : "") << r.clones[i].new_term << "@" << r.clones[i].for_user;
      if (r.clones[i].dropped_definition) {
        out << "-" << *r.clones[i].dropped_definition;
      }
    }
    out << " rewritten=";
    for (std::size_t i = 0; i < r.rewritten_statements.size(); ++i) {
      out << (i ? "," : "") << r.rewritten_statements[i];
    }
  }
  return out.str();
}

}  // namespace cbkb
