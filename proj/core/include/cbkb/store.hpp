#pragma once
// Append-only journal of accepted commands and canonical snapshots.
//
// Journal line:  #<seq>|<timestamp>|<agent>|<outcome digest>|<command>
// The command is the canonical rendering of the applied command; newlines and
// backslashes inside it are escaped. A final line without its newline is a
// write that was never acknowledged and is discarded on open.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cbkb/kb.hpp"

namespace cbkb {

struct JournalEntry {
  std::uint64_t sequence = 0;
  std::string timestamp;
  std::string agent;
  std::string digest;
  std::string command;
  bool operator==(const JournalEntry&) const = default;
};

std::string format_entry(const JournalEntry& e);
// Throws Error(corrupt_entry).
JournalEntry parse_entry(std::string_view line);

std::string sha256_hex(std::string_view data);
// Short digest of describe(outcome).
std::string outcome_digest(const EditOutcome& outcome);

// Complete entries of a journal text; a torn final line is ignored.
std::vector<JournalEntry> parse_journal(std::string_view text);

class Journal {
 public:
  // Opens or creates the file, dropping a torn final line.
  explicit Journal(std::filesystem::path path);
  ~Journal();
  Journal(const Journal&) = delete;
  Journal& operator=(const Journal&) = delete;

  const std::vector<JournalEntry>& entries() const { return entries_; }
  std::uint64_t last_sequence() const { return entries_.empty() ? 0 : entries_.back().sequence; }
  const std::filesystem::path& path() const { return path_; }

  // Durable (fsync) on return. Throws Error(gap_in_sequence | write_failure).
  void append(const JournalEntry& e);

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  std::vector<JournalEntry> entries_;
};

// Re-applies every entry to the preloaded knowledge base. Throws
// Error(corrupt_entry) naming the sequence number when an entry does not
// parse, is out of order, is rejected or yields a different outcome.
KnowledgeBase replay(const std::vector<JournalEntry>& entries);

// Canonical sorted rendering of the whole state.
std::string snapshot(const KnowledgeBase& kb);
std::string snapshot_hash(const KnowledgeBase& kb);

// Structural one-line rendering of a statement (every field).
std::string canonical_statement(const Statement& s);

}  // namespace cbkb
