// kbtool: command-line front end to a knowledge base directory.
//
//   kbtool [--kb DIR] init
//   kbtool [--kb DIR] load FILE [--as USER]
//   kbtool [--kb DIR] serve [--host H] [--port N]
//   kbtool [--kb DIR] repl --as USER
//   kbtool [--kb DIR] check
//   kbtool [--kb DIR] export --kif | --snapshot
//
// DIR defaults to $CBKB_DIR, then ./kb. The journal lives in DIR/journal.log.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cbkb/error.hpp"
#include "cbkb/notation.hpp"
#include "cbkb/protocol.hpp"
#include "cbkb/service.hpp"
#include "cbkb/store.hpp"

namespace fs = std::filesystem;
using namespace cbkb;

namespace {

fs::path journal_path(const fs::path& dir) { return dir / "journal.log"; }

void print_response(const Response& r) {
  const auto& b = r.body;
  if (b.contains("rendered") && b.value("status", "") == "tree") {
    std::cout << b["rendered"].get<std::string>();
    return;
  }
  if (b.contains("summary")) {
    std::cout << b["summary"].get<std::string>() << "\n";
    if (b.contains("conflicts")) {
      for (const auto& c : b["conflicts"]) {
        if (c.contains("template")) std::cout << "  correct with: " << c["template"].get<std::string>() << "\n";
      }
    }
    return;
  }
  std::cout << b.dump(2) << "\n";
}

int check(const fs::path& dir) {
  Journal journal(journal_path(dir));
  KnowledgeBase kb = replay(journal.entries());
  int failures = 0;
  auto report = [&](bool ok, const std::string& what) {
    std::cout << (ok ? "PASS " : "FAIL ") << what << "\n";
    if (!ok) ++failures;
  };
  report(true, "replay of " + std::to_string(journal.entries().size()) + " entries");
  report(kb.hierarchy.is_acyclic(), "strict links form a DAG");
  auto violations = organization_violations(kb);
  std::size_t cross = 0;
  for (const auto& [a, b] : violations) {
    const Statement* sa = kb.statement(a);
    const Statement* sb = kb.statement(b);
    if (sa && sb && sa->creator != sb->creator) {
      ++cross;
      std::cout << "  unlinked: " << a << " " << b << "\n";
    }
  }
  report(cross == 0, "no unlinked conflict between statements of distinct creators");
  report(kb.hierarchy.unanchored().empty(), "every object reaches thing");
  KnowledgeBase again = replay(journal.entries());
  report(snapshot_hash(again) == snapshot_hash(kb), "replay is deterministic");
  std::cout << "snapshot " << snapshot_hash(kb) << "\n";
  return failures == 0 ? 0 : 1;
}

int export_kb(const fs::path& dir, bool kif) {
  Journal journal(journal_path(dir));
  KnowledgeBase kb = replay(journal.entries());
  if (!kif) {
    std::cout << snapshot(kb);
    return 0;
  }
  for (const auto& [id, s] : kb.statements) {
    try {
      std::string kif_text = render_kif(s);
      std::cout << "; " << id << "\n" << kif_text << "\n";
    } catch (const Error& e) {
      std::cout << "; " << id << " not expressible: " << e.what() << "\n";
    }
  }
  return 0;
}

int repl(Service& service, const std::string& agent) {
  std::string pending;
  std::string line;
  std::cout << agent << "> " << std::flush;
  while (std::getline(std::cin, line)) {
    pending += line + "\n";
    if (line.find(';') != std::string::npos) {
      std::vector<CommandSource> units;
      try {
        units = split_commands(pending);
      } catch (const Error&) {
        units = {CommandSource{pending, 1}};
      }
      for (const CommandSource& u : units) print_response(service.command(agent, u.text));
      pending.clear();
    }
    std::cout << agent << "> " << std::flush;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collaboratively built knowledge base tool"};
  app.require_subcommand(1);
  std::string kb_dir;
  if (const char* env = std::getenv("CBKB_DIR")) kb_dir = env;
  if (kb_dir.empty()) kb_dir = "kb";
  app.add_option("--kb", kb_dir, "knowledge base directory (default $CBKB_DIR or ./kb)");

  auto* init_cmd = app.add_subcommand("init", "create an empty knowledge base");

  std::string load_file;
  std::string load_as = "pm";
  auto* load_cmd = app.add_subcommand("load", "apply a command file");
  load_cmd->add_option("file", load_file)->required()->check(CLI::ExistingFile);
  load_cmd->add_option("--as", load_as, "acting user until the first `// as` line");

  std::string host = "127.0.0.1";
  int port = 8080;
  auto* serve_cmd = app.add_subcommand("serve", "serve the HTTP API");
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--port", port);

  std::string repl_as;
  auto* repl_cmd = app.add_subcommand("repl", "interactive commands on stdin");
  repl_cmd->add_option("--as", repl_as)->required();

  auto* check_cmd = app.add_subcommand("check", "replay the journal and check invariants");

  bool kif = false;
  bool snap = false;
  auto* export_cmd = app.add_subcommand("export", "print the knowledge base");
  auto* kif_flag = export_cmd->add_flag("--kif", kif, "first-order statements in KIF");
  auto* snap_flag = export_cmd->add_flag("--snapshot", snap, "canonical snapshot");
  kif_flag->excludes(snap_flag);
  export_cmd->callback([&] {
    if (!kif && !snap) throw CLI::ValidationError("export", "one of --kif or --snapshot is required");
  });

  CLI11_PARSE(app, argc, argv);

  fs::path dir = kb_dir;
  try {
    if (*init_cmd) {
      fs::create_directories(dir);
      Journal journal(journal_path(dir));
      std::cout << "initialized " << dir.string() << " (" << journal.entries().size()
                << " entries)\n";
      return 0;
    }
    if (*check_cmd) return check(dir);
    if (*export_cmd) return export_kb(dir, kif);

    if (!fs::exists(dir)) {
      std::cerr << dir.string() << " does not exist; run `kbtool init` first\n";
      return 2;
    }
    Service service(Service::Options{journal_path(dir), {}});
    if (*load_cmd) {
      std::ifstream in(load_file);
      std::stringstream text;
      text << in.rdbuf();
      int rejected = 0;
      for (const ScriptResult& r : run_script(service, text.str(), load_as)) {
        std::cout << load_file << ":" << r.line << " [" << r.agent << "] ";
        print_response(r.response);
        if (r.response.status >= 400) ++rejected;
      }
      return rejected == 0 ? 0 : 1;
    }
    if (*serve_cmd) {
      std::cout << "listening on " << host << ":" << port << "\n" << std::flush;
      serve_http(service, host, port);
      return 0;
    }
    if (*repl_cmd) return repl(service, repl_as);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
