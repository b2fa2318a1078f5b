#include "cbkb/service.hpp"

#include <chrono>
#include <ctime>
#include <regex>
#include <sstream>

#include "cbkb/error.hpp"
#include "cbkb/evaluation.hpp"
#include "cbkb/notation.hpp"
#include "cbkb/protocol.hpp"

namespace cbkb {

using nlohmann::json;

std::string utc_now() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string render_statement(const Statement& s) {
  try {
    return render_fe(s);
  } catch (const Error&) {
  }
  const Graph* g = s.graph();
  if (g && g->edges.size() == 1 && g->nodes.size() == 2 && g->edges[0].subject == 1) {
    return render_fl({FlTuple{g->nodes[0].term, g->edges[0].relation, {g->nodes[1].term},
                              s.creator}});
  }
  return canonical_statement(s);
}

namespace {

json quantifier_json(const Quantifier& q) {
  json j{{"kind", to_string(q.kind)}};
  if (q.kind == QuantKind::exact || q.kind == QuantKind::at_least) j["n"] = q.n;
  if (q.kind == QuantKind::at_least_percent) j["percent"] = q.percent;
  return j;
}

json tree_json(const TreeNode& t) {
  json j{{"id", t.id}};
  if (!t.link.empty()) j["link"] = t.link;
  if (!t.creator.empty()) j["creator"] = t.creator;
  json kids = json::array();
  for (const TreeNode& c : t.children) kids.push_back(tree_json(c));
  j["children"] = kids;
  return j;
}

const char* corrective_relation_for(ConflictKind k) {
  switch (k) {
    case ConflictKind::generalization: return "corrective_generalization";
    case ConflictKind::equivalence: return "equivalence";
    default: return "corrective_restriction";
  }
}

Response error_response(const Error& e) {
  json body{{"status", "error"}, {"error", to_string(e.code())}, {"message", e.what()}};
  if (const auto* p = dynamic_cast<const ParseError*>(&e)) {
    body["line"] = p->line();
    body["column"] = p->column();
    body["expected"] = p->expected();
    body["found"] = p->found();
    return {400, body};
  }
  int status = 422;
  if (e.code() == ErrorCode::unknown_object) status = 404;
  if (e.code() == ErrorCode::write_failure) status = 500;
  return {status, body};
}

Command parse_single(const std::string& agent, const std::string& text) {
  std::vector<CommandSource> units = split_commands(text);
  if (units.size() != 1) {
    throw ParseError(1, 1, "exactly one command", std::to_string(units.size()) + " commands");
  }
  return parse_command(units.front().text, ParseOptions{agent});
}

}  // namespace

json statement_json(const Statement& s) {
  json j{{"id", s.id}, {"creator", s.creator}, {"kind", to_string(s.kind)}, {"date", s.date},
         {"rendered", render_statement(s)}};
  if (s.believer) j["believer"] = *s.believer;
  if (s.interpreted) j["interpreted"] = *s.interpreted;
  json ctx = json::array();
  for (const Context& c : s.contexts) {
    json cj{{"kind", to_string(c.kind)}};
    if (!c.value.empty()) cj["value"] = c.value;
    if (!c.until.empty()) cj["until"] = c.until;
    ctx.push_back(cj);
  }
  j["contexts"] = ctx;
  if (const Graph* g = s.graph()) {
    json nodes = json::array();
    for (const ConceptNode& n : g->nodes) {
      json nj{{"term", n.term}, {"quantifier", quantifier_json(n.quantifier)}};
      if (n.referent) nj["referent"] = *n.referent;
      if (n.measure) {
        const char* cmp[] = {">=", "<=", "="};
        nj["measure"] = {{"relation", n.measure->relation},
                         {"comparator", cmp[static_cast<int>(n.measure->comparator)]},
                         {"magnitude", n.measure->magnitude},
                         {"unit", n.measure->unit}};
      }
      nodes.push_back(nj);
    }
    json edges = json::array();
    for (const Edge& e : g->edges) {
      edges.push_back({{"subject", e.subject}, {"relation", e.relation}, {"object", e.object}});
    }
    j["graph"] = {{"nodes", nodes}, {"edges", edges}};
  } else if (const MetaBody* m = s.meta()) {
    j["meta"] = {{"subject", m->subject.id}, {"relation", m->relation}, {"object", m->object.id}};
  } else {
    j["text"] = s.text()->text;
  }
  return j;
}

std::string corrective_template(const std::string& agent, const Conflict& c,
                                const Statement& draft) {
  return agent + "#`" + c.existing + " has for " + corrective_relation_for(c.kind) + " " +
         render_statement(draft) + "\xC2\xB4";
}

int http_status(const EditOutcome& o) {
  if (o.ok()) return 200;
  switch (*o.reason) {
    case RejectReason::not_creator: return 403;
    case RejectReason::not_registered: return 401;
    case RejectReason::unknown_object: return 404;
    case RejectReason::own_inconsistency:
    case RejectReason::own_redundancy:
    case RejectReason::implicit_conflict:
    case RejectReason::informal_unlinked:
    case RejectReason::term_def_inconsistent:
    case RejectReason::cycle_introduced: return 409;
    default: return 422;
  }
}

json outcome_json(const EditOutcome& o, const KnowledgeBase& kb, const std::string& agent,
                  const std::optional<Statement>& draft) {
  json j{{"status", to_string(o.status)}, {"summary", describe(o)}};
  if (o.reason) j["reason"] = to_string(*o.reason);
  if (!o.detail.empty()) j["detail"] = o.detail;
  j["created"] = o.created;
  j["warnings"] = o.warnings;
  json conflicts = json::array();
  for (const Conflict& c : o.conflicts) {
    json cj{{"id", c.existing}, {"kind", to_string(c.kind)}, {"advisory", c.advisory}};
    if (const Statement* s = kb.statement(c.existing)) cj["statement"] = statement_json(*s);
    if (draft && draft->graph()) cj["template"] = corrective_template(agent, c, *draft);
    conflicts.push_back(cj);
  }
  j["conflicts"] = conflicts;
  if (o.clone_report) {
    json clones = json::array();
    for (const ClonedTerm& c : o.clone_report->clones) {
      json cj{{"new_term", c.new_term}, {"for_user", c.for_user}};
      if (c.dropped_definition) cj["dropped_definition"] = *c.dropped_definition;
      clones.push_back(cj);
    }
    j["clone_report"] = {{"original_term", o.clone_report->original_term},
                         {"clones", clones},
                         {"rewritten_statements", o.clone_report->rewritten_statements}};
  }
  return j;
}

Service::Service(Options options) : options_(std::move(options)) {
  if (!options_.clock) options_.clock = utc_now;
  if (options_.journal) {
    journal_ = std::make_unique<Journal>(*options_.journal);
    current_ = std::make_shared<const KnowledgeBase>(replay(journal_->entries()));
  } else {
    current_ = std::make_shared<const KnowledgeBase>(KnowledgeBase::preloaded());
  }
}

std::shared_ptr<const KnowledgeBase> Service::state() const {
  std::lock_guard lock(publish_mutex_);
  return current_;
}

std::uint64_t Service::journal_length() const {
  std::lock_guard lock(write_mutex_);
  return journal_entries().size();
}

const std::vector<JournalEntry>& Service::journal_entries() const {
  return journal_ ? journal_->entries() : memory_journal_;
}

Response Service::command(const std::string& agent, const std::string& text) {
  Command cmd;
  try {
    cmd = parse_single(agent, text);
  } catch (const Error& e) {
    return error_response(e);
  }
  if (!is_mutating(cmd.kind)) return query(agent, cmd);

  std::lock_guard lock(write_mutex_);
  std::shared_ptr<const KnowledgeBase> before = state();
  KnowledgeBase work = *before;
  std::string timestamp = options_.clock();
  EditOutcome out;
  try {
    out = apply_command(work, agent, cmd, EditContext{timestamp});
  } catch (const Error& e) {
    return error_response(e);
  }
  std::optional<Statement> draft = cmd.statement;
  if (draft && draft->creator.empty()) draft->creator = agent;
  json body = outcome_json(out, out.ok() ? work : *before, agent, draft);
  if (out.ok()) {
    JournalEntry entry{journal_entries().size() + 1, timestamp, agent, outcome_digest(out),
                       render_command(cmd)};
    try {
      if (journal_) {
        journal_->append(entry);
      } else {
        memory_journal_.push_back(entry);
      }
    } catch (const Error& e) {
      return error_response(e);
    }
    body["sequence"] = entry.sequence;
    std::lock_guard publish(publish_mutex_);
    current_ = std::make_shared<const KnowledgeBase>(std::move(work));
  }
  return {http_status(out), body};
}

Response Service::dry_run(const std::string& agent, const std::string& text) const {
  try {
    std::string unit(text);
    auto last = unit.find_last_not_of(" \t\r\n");
    if (last != std::string::npos && unit[last] != ';') unit += ";";
    Command cmd = parse_single(agent, unit);
    if (cmd.kind != CommandKind::assert_statement) {
      throw ParseError(1, 1, "a statement", render_command(cmd));
    }
    Statement draft = *cmd.statement;
    auto kb = state();
    json conflicts = json::array();
    for (const Conflict& c : conflicts_for_draft(*kb, draft)) {
      json cj{{"id", c.existing}, {"kind", to_string(c.kind)}, {"advisory", c.advisory},
              {"template", corrective_template(agent, c, draft)}};
      if (const Statement* s = kb->statement(c.existing)) cj["statement"] = statement_json(*s);
      conflicts.push_back(cj);
    }
    return {200, json{{"status", "dry-run"}, {"draft", statement_json(draft)},
                      {"conflicts", conflicts}}};
  } catch (const Error& e) {
    return error_response(e);
  }
}

Response Service::query(const std::string& agent, const Command& cmd) const {
  (void)agent;
  try {
    if (cmd.kind == CommandKind::spec_of) {
      return spec(cmd.target, cmd.depth);
    }
    auto kb = state();
    json results = json::array();
    for (const Statement* s : kb->graph_statements()) {
      CompareKind k = compare(*s, *cmd.statement, kb->hierarchy, kb->matcher).kind;
      if (k == CompareKind::equivalent || k == CompareKind::specializes ||
          k == CompareKind::instantiation_of) {
        results.push_back(statement_json(*s));
      }
    }
    return {200, json{{"status", "query"}, {"results", results}}};
  } catch (const Error& e) {
    return error_response(e);
  }
}

Response Service::object(const std::string& id) const {
  auto kb = state();
  json j;
  if (const Statement* s = kb->statement(id)) {
    j = statement_json(*s);
    j["type"] = "statement";
  } else if (auto t = kb->terms.find(id); t != kb->terms.end()) {
    j = {{"type", "term"},       {"id", id},
         {"creator", t->second.creator}, {"names", t->second.names},
         {"definitions", t->second.definitions}, {"created", t->second.created}};
    if (auto c = kb->clone_of.find(id); c != kb->clone_of.end()) j["clone_of"] = c->second;
  } else if (auto r = kb->ratings.find(id); r != kb->ratings.end()) {
    j = {{"type", "rating"},         {"id", id},
         {"rater", r->second.rater}, {"object", r->second.object},
         {"criterion", r->second.criterion}, {"value", r->second.value}};
  } else if (auto src = kb->sources.find(id); src != kb->sources.end()) {
    j = {{"type", "source"}, {"id", id}, {"kind", to_string(src->second.kind)}};
  } else {
    return {404, json{{"status", "error"}, {"error", "unknown-object"}, {"message", id}}};
  }
  json links = json::array();
  if (kb->hierarchy.contains(id)) {
    for (const HierarchyLink& l : kb->hierarchy.links_from(id)) {
      links.push_back({{"kind", to_string(l.kind)}, {"to", l.to}, {"creator", l.creator},
                       {"relation", l.relation}, {"system", l.system}});
    }
  }
  j["links"] = links;
  return {200, j};
}

Response Service::spec(const std::string& root, unsigned depth) const {
  try {
    auto kb = state();
    TreeNode tree = kb->hierarchy.specializations_of(root, depth == 0 ? SIZE_MAX : depth);
    return {200, json{{"status", "tree"}, {"rendered", render_tree(tree)}, {"tree", tree_json(tree)}}};
  } catch (const Error& e) {
    return error_response(e);
  }
}

Response Service::ratings(const std::string& object) const {
  auto kb = state();
  if (!kb->exists(object)) {
    return {404, json{{"status", "error"}, {"error", "unknown-object"}, {"message", object}}};
  }
  json list = json::array();
  for (const auto& [id, r] : kb->ratings) {
    if (r.object != object) continue;
    list.push_back({{"id", id}, {"rater", r.rater}, {"criterion", r.criterion}, {"value", r.value},
                    {"date", r.date}});
  }
  Evaluator ev(*kb, kDefaultMeasure);
  return {200, json{{"object", object}, {"ratings", list}, {"score", ev.score(object)}}};
}

Response Service::users() const {
  auto kb = state();
  json list = json::array();
  Evaluator ev(*kb, kDefaultMeasure);
  for (const auto& [id, s] : kb->sources) {
    list.push_back({{"id", id}, {"kind", to_string(s.kind)}, {"score", ev.user_score(id)}});
  }
  return {200, json{{"users", list}}};
}

std::vector<ScriptResult> run_script(Service& service, std::string_view text,
                                     const std::string& default_agent) {
  static const std::regex directive(R"(^\s*//\s*as\s+(\S+)\s*$)");
  std::vector<std::pair<std::size_t, std::string>> switches;
  std::istringstream lines{std::string(text)};
  std::string line;
  for (std::size_t n = 1; std::getline(lines, line); ++n) {
    std::smatch m;
    if (std::regex_match(line, m, directive)) switches.emplace_back(n, m[1]);
  }
  std::vector<ScriptResult> out;
  std::vector<CommandSource> units;
  try {
    units = split_commands(text);
  } catch (const Error& e) {
    const auto* p = dynamic_cast<const ParseError*>(&e);
    out.push_back({p ? p->line() : 0, default_agent, "", error_response(e)});
    return out;
  }
  for (const CommandSource& u : units) {
    std::string agent = default_agent;
    for (const auto& [n, who] : switches) {
      if (n <= u.line) agent = who;
    }
    Response r = service.command(agent, u.text);
    if (r.body.contains("line") && r.body["line"].is_number()) {
      r.body["line"] = r.body["line"].get<std::size_t>() + u.line - 1;
    }
    out.push_back({u.line, agent, u.text, std::move(r)});
  }
  return out;
}

}  // namespace cbkb
