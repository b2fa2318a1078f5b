#pragma once
// The collaborative editing protocol: ownership, rejection of implicit
// conflicts, term cloning and loss-less correction. Every operation works on
// a copy of the knowledge base and commits it only when accepted, so a
// rejected edit leaves the state untouched.

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cbkb/kb.hpp"
#include "cbkb/notation.hpp"

namespace cbkb {

struct EditContext {
  std::string timestamp;  // becomes the creation date of new objects
};

EditOutcome register_source(KnowledgeBase& kb, const std::string& id, SourceKind kind);

EditOutcome add_statement(KnowledgeBase& kb, const std::string& agent, Statement stmt,
                          const EditContext& ctx = {});

EditOutcome remove_statement(KnowledgeBase& kb, const std::string& agent,
                             const std::string& sid, const EditContext& ctx = {});

// Term-relation tuples: hierarchy relations create or link terms, any other
// relation becomes a possible belief of the tuple's source.
EditOutcome add_fl(KnowledgeBase& kb, const std::string& agent,
                   const std::vector<FlTuple>& tuples, const EditContext& ctx = {});

// Splits `term` into per-user clones: `trigger` (a stored definition by the
// definer) moves to the definer's clone, each user in `users` receives a clone
// and has every statement mentioning `term` rewritten to it.
CloneReport clone_term(KnowledgeBase& kb, const std::string& term, const std::string& trigger,
                       const std::set<std::string>& users, const EditContext& ctx = {});

// Minimal stored statements that `stmt` specializes or instantiates, and
// maximal ones that it generalizes.
Placement classify_statement(const Statement& stmt, const KnowledgeBase& kb);

// Conflicts the draft would raise (dry run, nothing is stored).
std::vector<Conflict> conflicts_for_draft(const KnowledgeBase& kb, const Statement& draft);

// Pairs of stored graph statements that the matcher relates (instantiation
// excluded) but that no user link connects. Same-creator pairs are included.
std::vector<std::pair<std::string, std::string>> organization_violations(
    const KnowledgeBase& kb);

// Queries do not change the state and are never journaled.
bool is_mutating(CommandKind kind);

// Applies one mutating command as `agent`. Throws Error(unsupported) for
// queries.
EditOutcome apply_command(KnowledgeBase& kb, const std::string& agent, const Command& cmd,
                          const EditContext& ctx = {});

// Replaces every occurrence of term `from` in a statement's graph.
Statement rename_term(Statement stmt, const std::string& from, const std::string& to);

}  // namespace cbkb
