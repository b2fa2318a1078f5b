#pragma once
// Controlled notations: the sentence notation (statements in backquotes),
// the compact term-relation notation, the command language and a KIF
// renderer for the first-order fragment.
//
// Sentence grammar (LL(2)):
//   Sentence := [USER '#'] [USER '#'] ( '`' Clause {Context} '´' | '"' TEXT '"' )
//   Clause   := Ref 'has' 'for' REL Ref
//             | Subj Copula REL 'of' Obj [ 'with' REL ['at least'|'at most'] NUM UNIT ]
//   Subj     := Det TERM+ | TERM+               (bare term: individual)
//   Det      := every | any | no | most | a | an | NUM '%' 'of' | 'at least' NUM | NUM
//   Copula   := is | are | can be | is able to be | are able to be
//   Obj      := (a | an | the | Det) TERM+ | TERM+
//   Context  := ['and'] 'in' 'place' TERM | ['and'] 'in' 'period' DATE 'to' DATE
//   Ref      := ID | Sentence

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cbkb/model.hpp"

namespace cbkb {

struct FlTuple {
  std::string subject;
  std::string relation;
  std::vector<std::string> objects;
  std::optional<std::string> source;
  bool operator==(const FlTuple&) const = default;
};

enum class CommandKind {
  assert_statement,
  assert_fl,
  remove,
  spec_of,
  query_graph,
  rate,
  set_filter,
  def_measure,
  register_source,
};

struct Command {
  CommandKind kind = CommandKind::assert_statement;
  std::optional<Statement> statement;  // assert / query
  std::vector<FlTuple> fl;              // assert_fl
  std::string target;                   // object id or measure/filter/source name
  unsigned depth = 0;                   // spec_of; 0 = unbounded
  std::string criterion;                // rate
  double value = 0.0;                   // rate
  std::string action;                   // set_filter: hide | small-font; register: source kind
  std::string expression;               // normalized prefix expression
  bool operator==(const Command&) const = default;
};

struct ParseOptions {
  std::string default_creator;
};

Statement parse_sentence(std::string_view text, const ParseOptions& opts = {});

// One tuple per (subject, relation, object); absent sources take the default
// creator when one is configured.
std::vector<FlTuple> parse_fl(std::string_view text, const ParseOptions& opts = {});

Command parse_command(std::string_view text, const ParseOptions& opts = {});

// Splits a command file (`;`-terminated units, `//` comments) into the source
// text of each command. Line numbers of ParseErrors refer to the whole input.
struct CommandSource {
  std::string text;
  std::size_t line = 1;
};
std::vector<CommandSource> split_commands(std::string_view file_text);

std::string render_fe(const Statement& stmt);
std::string render_fl(const std::vector<FlTuple>& tuples);
std::string render_command(const Command& cmd);

// Throws Error(unsupported) for percent/most/no quantifiers and for
// place/period contexts.
std::string render_kif(const Statement& stmt);

struct TreeNode {
  std::string id;
  std::string link;     // relation label to the parent; empty for the root
  std::string creator;  // creator of that link
  std::vector<TreeNode> children;
  bool operator==(const TreeNode&) const = default;
};

// One node per line, two spaces of indentation per level, children in
// identifier order.
std::string render_tree(const TreeNode& root);

std::string format_number(double value);

}  // namespace cbkb
