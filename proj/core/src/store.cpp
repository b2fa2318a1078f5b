#include "cbkb/store.hpp"

#include <algorithm>
#include <fcntl.h>
#include <openssl/evp.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cbkb/error.hpp"
#include "cbkb/notation.hpp"
#include "cbkb/protocol.hpp"

namespace cbkb {

namespace {

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '\\') {
      out += "\\\\";
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out += c;
    }
  }
  return out;
}

std::string unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      ++i;
      out += s[i] == 'n' ? '\n' : s[i];
    } else {
      out += s[i];
    }
  }
  return out;
}

[[noreturn]] void corrupt(std::uint64_t seq, const std::string& why) {
  throw Error(ErrorCode::corrupt_entry,
              "corrupt-entry at sequence " + std::to_string(seq) + ": " + why);
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string format_entry(const JournalEntry& e) {
  return "#" + std::to_string(e.sequence) + "|" + e.timestamp + "|" + e.agent + "|" + e.digest +
         "|" + escape(e.command);
}

JournalEntry parse_entry(std::string_view line) {
  if (line.empty() || line[0] != '#') corrupt(0, "missing header");
  std::vector<std::string_view> fields;
  std::size_t start = 1;
  for (int i = 0; i < 4; ++i) {
    std::size_t bar = line.find('|', start);
    if (bar == std::string_view::npos) corrupt(0, "missing field");
    fields.push_back(line.substr(start, bar - start));
    start = bar + 1;
  }
  JournalEntry e;
  try {
    std::size_t used = 0;
    e.sequence = std::stoull(std::string(fields[0]), &used);
    bool digits = !fields[0].empty() && std::all_of(fields[0].begin(), fields[0].end(),
                                                    [](char c) { return c >= '0' && c <= '9'; });
    if (!digits || used != fields[0].size()) throw std::invalid_argument("sequence");
  } catch (const std::exception&) {
    corrupt(0, "bad sequence number");
  }
  if (e.sequence == 0) corrupt(0, "sequence numbers start at 1");
  e.timestamp = fields[1];
  e.agent = fields[2];
  e.digest = fields[3];
  e.command = unescape(line.substr(start));
  if (e.agent.empty() || e.command.empty()) corrupt(e.sequence, "empty field");
  return e;
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string outcome_digest(const EditOutcome& outcome) {
  return sha256_hex(describe(outcome)).substr(0, 16);
}

std::vector<JournalEntry> parse_journal(std::string_view text) {
  std::vector<JournalEntry> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) break;
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    out.push_back(parse_entry(line));
  }
  return out;
}

Journal::Journal(std::filesystem::path path) : path_(std::move(path)) {
  std::string text;
  if (std::filesystem::exists(path_)) text = read_file(path_);
  std::size_t complete = text.rfind('\n');
  complete = complete == std::string::npos ? 0 : complete + 1;
  entries_ = parse_journal(std::string_view(text).substr(0, complete));
  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    throw Error(ErrorCode::write_failure, "write-failure: " + path_.string() + ": " +
                                              std::strerror(errno));
  }
  if (complete != text.size() && ::ftruncate(fd_, static_cast<off_t>(complete)) != 0) {
    throw Error(ErrorCode::write_failure, "write-failure: cannot drop torn entry");
  }
}

Journal::~Journal() {
  if (fd_ >= 0) ::close(fd_);
}

void Journal::append(const JournalEntry& e) {
  if (e.sequence != last_sequence() + 1) {
    throw Error(ErrorCode::gap_in_sequence,
                "gap-in-sequence: expected " + std::to_string(last_sequence() + 1) + ", got " +
                    std::to_string(e.sequence));
  }
  std::string line = format_entry(e) + "\n";
  std::size_t written = 0;
  while (written < line.size()) {
    ssize_t n = ::write(fd_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::write_failure, std::string("write-failure: ") + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) {
    throw Error(ErrorCode::write_failure, std::string("write-failure: ") + std::strerror(errno));
  }
  entries_.push_back(e);
}

KnowledgeBase replay(const std::vector<JournalEntry>& entries) {
  KnowledgeBase kb = KnowledgeBase::preloaded();
  std::uint64_t expected = 1;
  for (const JournalEntry& e : entries) {
    if (e.sequence != expected) corrupt(e.sequence, "expected sequence " + std::to_string(expected));
    ++expected;
    Command cmd;
    try {
      cmd = parse_command(e.command, ParseOptions{e.agent});
    } catch (const Error& err) {
      corrupt(e.sequence, err.what());
    }
    if (!is_mutating(cmd.kind)) corrupt(e.sequence, "query in journal");
    EditOutcome out = apply_command(kb, e.agent, cmd, EditContext{e.timestamp});
    if (!out.ok()) corrupt(e.sequence, "rejected on replay: " + describe(out));
    if (outcome_digest(out) != e.digest) corrupt(e.sequence, "outcome differs: " + describe(out));
  }
  return kb;
}

std::string canonical_statement(const Statement& s) {
  std::string out = s.id + "|" + s.creator + "|" + s.believer.value_or("") + "|" +
                    s.interpreted.value_or("") + "|" + to_string(s.kind) + "|" + s.date + "|";
  for (const Context& c : s.contexts) {
    out += std::string("[") + to_string(c.kind) + " " + c.value + " " + c.until + "]";
  }
  out += "|";
  if (const Graph* g = s.graph()) {
    for (const ConceptNode& n : g->nodes) {
      out += "(" + n.term + " " + to_string(n.quantifier.kind) + " " +
             std::to_string(n.quantifier.n) + " " + format_number(n.quantifier.percent) + " " +
             n.referent.value_or("-");
      if (n.measure) {
        const char* cmp[] = {">=", "<=", "="};
        out += " " + n.measure->relation + cmp[static_cast<int>(n.measure->comparator)] +
               format_number(n.measure->magnitude) + n.measure->unit;
      }
      out += ")";
    }
    for (const Edge& e : g->edges) {
      out += "{" + std::to_string(e.subject) + " " + e.relation + " " + std::to_string(e.object) +
             "}";
    }
  } else if (const MetaBody* m = s.meta()) {
    out += "meta " + m->subject.id + " " + m->relation + " " + m->object.id;
  } else {
    out += "text " + escape(s.text()->text);
  }
  return out;
}

std::string snapshot(const KnowledgeBase& kb) {
  std::ostringstream out;
  for (const auto& [id, s] : kb.sources) out << "source " << id << " " << to_string(s.kind) << "\n";
  for (const auto& [id, t] : kb.terms) {
    out << "term " << id << " creator=" << t.creator
        << (t.formality == Formality::formal ? " formal" : " informal") << " names=";
    for (const std::string& n : t.names) out << n << ",";
    out << " definitions=";
    for (const std::string& d : t.definitions) out << d << ",";
    out << " created=" << t.created << "\n";
  }
  for (const auto& [id, s] : kb.statements) out << "statement " << canonical_statement(s) << "\n";
  for (const HierarchyLink& l : kb.hierarchy.links()) {
    out << "link " << to_string(l.kind) << " " << l.from << " " << l.to << " " << l.creator << " "
        << l.relation << (l.system ? " system" : " user") << "\n";
  }
  for (const auto& [clone, origin] : kb.clone_of) out << "clone " << clone << " " << origin << "\n";
  for (const auto& [u, n] : kb.statement_counter) out << "counter statement " << u << " " << n << "\n";
  for (const auto& [u, n] : kb.rating_counter) out << "counter rating " << u << " " << n << "\n";
  for (const auto& [id, r] : kb.ratings) {
    out << "rating " << id << " " << r.rater << " " << r.object << " " << r.criterion << " "
        << format_number(r.value) << " " << r.date << "\n";
  }
  for (const auto& [name, e] : kb.measures) out << "measure " << name << " " << e << "\n";
  for (const auto& [name, f] : kb.filters) {
    out << "filter " << name << " " << f.action << " " << f.expression << "\n";
  }
  for (const std::string& id : kb.inherited) out << "inherited " << id << "\n";
  return out.str();
}

std::string snapshot_hash(const KnowledgeBase& kb) { return sha256_hex(snapshot(kb)); }

}  // namespace cbkb
