#pragma once
// Request handling shared by the HTTP server and the command-line tool.
// Mutating commands are serialized through one writer; reads work on the
// snapshot published after the last accepted edit.

#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cbkb/kb.hpp"
#include "cbkb/store.hpp"

namespace cbkb {

struct Response {
  int status = 200;
  nlohmann::json body;
};

// Sentence form when the statement has one, term-relation form otherwise.
std::string render_statement(const Statement& s);
nlohmann::json statement_json(const Statement& s);
nlohmann::json outcome_json(const EditOutcome& o, const KnowledgeBase& kb,
                            const std::string& agent, const std::optional<Statement>& draft);
int http_status(const EditOutcome& o);

// `<agent>#`<existing> has for <relation> <draft>´` for one conflict.
std::string corrective_template(const std::string& agent, const Conflict& c,
                                const Statement& draft);

class Service {
 public:
  struct Options {
    std::optional<std::filesystem::path> journal;  // in-memory when absent
    std::function<std::string()> clock;            // UTC ISO-8601 by default
  };

  explicit Service(Options options);

  Response command(const std::string& agent, const std::string& text);
  Response dry_run(const std::string& agent, const std::string& text) const;
  Response object(const std::string& id) const;
  Response spec(const std::string& root, unsigned depth) const;
  Response ratings(const std::string& object) const;
  Response users() const;

  std::shared_ptr<const KnowledgeBase> state() const;
  std::uint64_t journal_length() const;
  const std::vector<JournalEntry>& journal_entries() const;

 private:
  Response query(const std::string& agent, const Command& cmd) const;

  Options options_;
  std::unique_ptr<Journal> journal_;
  std::vector<JournalEntry> memory_journal_;
  mutable std::mutex write_mutex_;
  mutable std::mutex publish_mutex_;
  std::shared_ptr<const KnowledgeBase> current_;
};

std::string utc_now();

// Runs a command file. A comment line `// as <user>` switches the acting user
// for the commands that follow; before the first one `default_agent` acts.
struct ScriptResult {
  std::size_t line = 0;
  std::string agent;
  std::string command;
  Response response;
};
std::vector<ScriptResult> run_script(Service& service, std::string_view text,
                                     const std::string& default_agent);

// Blocks serving HTTP until the process is stopped.
//   POST /command       body = command text      (X-User names the agent)
//   POST /dry-run       body = sentence          conflicts without storing
//   GET  /object/<id>
//   GET  /spec?root=<id>&depth=<n>
//   GET  /ratings?object=<id>
//   PUT  /ratings       body = {"object","criterion","value"}
//   GET  /users
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  // Blocks until stop() is called from another thread.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

void serve_http(Service& service, const std::string& host, int port);

}  // namespace cbkb
