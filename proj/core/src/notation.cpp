#include "cbkb/notation.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <sstream>

#include "cbkb/error.hpp"

namespace cbkb {

namespace {

constexpr std::string_view kClose = "\xC2\xB4";  // ´

enum class Tok { word, open, close, string, colon, semi, comma, lparen, rparen, percent, end };

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::word: return "word";
    case Tok::open: return "'`'";
    case Tok::close: return "closing quote";
    case Tok::string: return "quoted text";
    case Tok::colon: return "':'";
    case Tok::semi: return "';'";
    case Tok::comma: return "','";
    case Tok::lparen: return "'('";
    case Tok::rparen: return "')'";
    case Tok::percent: return "'%'";
    case Tok::end: return "end of input";
  }
  return "?";
}

struct Token {
  Tok kind = Tok::end;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
  std::size_t offset = 0;
  std::size_t end_offset = 0;
};

bool is_special(std::string_view s, std::size_t i) {
  char c = s[i];
  if (std::isspace(static_cast<unsigned char>(c))) return true;
  if (c == '`' || c == '"' || c == ':' || c == ';' || c == ',' || c == '(' ||
      c == ')' || c == '%') {
    return true;
  }
  return s.substr(i, kClose.size()) == kClose;
}

std::vector<Token> lex(std::string_view s, std::size_t first_line = 1) {
  std::vector<Token> out;
  std::size_t line = first_line, col = 1, i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) {
        ++col;
      }
    }
  };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
      while (i < s.size() && s[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    t.offset = i;
    if (c == '"') {
      advance(1);
      std::size_t start = i;
      while (i < s.size() && s[i] != '"') {
        if (s[i] == '\n') throw ParseError(line, col, "closing '\"'", "newline");
        advance(1);
      }
      if (i >= s.size()) throw ParseError(line, col, "closing '\"'", "end of input");
      t.kind = Tok::string;
      t.text = std::string(s.substr(start, i - start));
      advance(1);
    } else if (s.substr(i, kClose.size()) == kClose) {
      t.kind = Tok::close;
      t.text = std::string(kClose);
      advance(kClose.size());
    } else if (c == '`' || c == ':' || c == ';' || c == ',' || c == '(' || c == ')' ||
               c == '%') {
      t.kind = c == '`'   ? Tok::open
               : c == ':' ? Tok::colon
               : c == ';' ? Tok::semi
               : c == ',' ? Tok::comma
               : c == '(' ? Tok::lparen
               : c == ')' ? Tok::rparen
                          : Tok::percent;
      t.text = std::string(1, c);
      advance(1);
    } else {
      std::size_t start = i;
      while (i < s.size() && !is_special(s, i)) advance(1);
      t.kind = Tok::word;
      t.text = std::string(s.substr(start, i - start));
    }
    t.end_offset = i;
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Tok::end;
  end.line = line;
  end.column = col;
  end.offset = end.end_offset = s.size();
  out.push_back(end);
  return out;
}

bool is_attribution(const Token& t) {
  return t.kind == Tok::word && t.text.size() > 1 && t.text.back() == '#';
}

bool is_number(std::string_view w) {
  if (w.empty()) return false;
  bool dot = false;
  for (char c : w) {
    if (c == '.') {
      if (dot) return false;
      dot = true;
    } else if (!std::isdigit(static_cast<unsigned char>(c))) {
      return false;
    }
  }
  return w.front() != '.' && w.back() != '.';
}

bool is_integer(std::string_view w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](char c) {
    return std::isdigit(static_cast<unsigned char>(c));
  });
}

double to_double(std::string_view w) {
  double v = 0;
  std::from_chars(w.data(), w.data() + w.size(), v);
  return v;
}

class Parser {
 public:
  Parser(std::string_view text, const ParseOptions& opts, std::size_t first_line = 1)
      : text_(text), toks_(lex(text, first_line)), opts_(opts) {}

  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool at(Tok k) const { return peek().kind == k; }
  bool at_word(std::string_view w, std::size_t k = 0) const {
    return peek(k).kind == Tok::word && peek(k).text == w;
  }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  [[noreturn]] void fail(std::string expected) const {
    const Token& t = peek();
    throw ParseError(t.line, t.column, std::move(expected),
                     t.kind == Tok::end ? "end of input" : t.text);
  }
  const Token& expect(Tok k) {
    if (!at(k)) fail(tok_name(k));
    return next();
  }
  void expect_word(std::string_view w) {
    if (!at_word(w)) fail("'" + std::string(w) + "'");
    next();
  }
  std::string expect_any_word(const char* what) {
    if (!at(Tok::word)) fail(what);
    return next().text;
  }
  std::string expect_number(const char* what) {
    if (!at(Tok::word) || !is_number(peek().text)) fail(what);
    return next().text;
  }
  void finish() {
    if (at(Tok::semi)) next();
    if (!at(Tok::end)) fail("end of input");
  }
  std::size_t pos() const { return pos_; }
  std::string_view source_between(std::size_t from_tok, std::size_t to_tok) const {
    std::size_t a = toks_[from_tok].offset;
    std::size_t b = to_tok > from_tok ? toks_[to_tok - 1].end_offset : a;
    return text_.substr(a, b - a);
  }

  // Sentence := [USER '#'] [USER '#'] ( '`' Clause {Context} '´' | '"' TEXT '"' )
  Statement sentence(const std::string& default_creator) {
    std::vector<std::string> attribution;
    if (is_attribution(peek())) {
      std::string w = next().text;
      std::size_t start = 0;
      while (start < w.size()) {
        auto hash = w.find('#', start);
        std::string user = w.substr(start, hash - start);
        if (user.empty()) fail("source identifier");
        attribution.push_back(user);
        start = hash + 1;
      }
      if (attribution.size() > 2) fail("at most two attribution prefixes");
    }
    Statement st;
    st.creator = attribution.empty() ? default_creator : attribution[0];
    if (attribution.size() == 2) st.interpreted = attribution[1];
    if (at(Tok::string)) {
      st.kind = StatementKind::informal;
      st.body = TextBody{next().text};
      return st;
    }
    expect(Tok::open);
    clause(st);
    contexts(st);
    expect(Tok::close);
    std::sort(st.contexts.begin(), st.contexts.end());
    st.contexts.erase(std::unique(st.contexts.begin(), st.contexts.end()),
                      st.contexts.end());
    if (st.kind == StatementKind::belief) st.believer = st.creator;
    return st;
  }

  std::vector<FlTuple> fl() {
    std::vector<FlTuple> out;
    std::string subject = expect_any_word("term");
    while (true) {
      std::string rel = expect_any_word("relation name");
      expect(Tok::colon);
      bool any = false;
      while (at(Tok::word)) {
        FlTuple t;
        t.subject = subject;
        t.relation = rel;
        t.objects.push_back(next().text);
        if (at(Tok::lparen)) {
          next();
          t.source = expect_any_word("source");
          expect(Tok::rparen);
        } else if (!opts_.default_creator.empty()) {
          t.source = opts_.default_creator;
        }
        out.push_back(std::move(t));
        any = true;
      }
      if (!any) fail("term");
      if (at(Tok::comma)) {
        next();
        continue;
      }
      break;
    }
    if (!at(Tok::semi)) fail("';'");
    next();
    if (!at(Tok::end)) fail("end of input");
    return out;
  }

  std::string normalized_sexpr_until_semi() {
    std::string out;
    int depth = 0;
    bool need_space = false;
    while (!at(Tok::semi) && !at(Tok::end)) {
      const Token& t = next();
      if (t.kind == Tok::lparen) {
        if (need_space) out += ' ';
        out += '(';
        ++depth;
        need_space = false;
      } else if (t.kind == Tok::rparen) {
        if (--depth < 0) {
          throw ParseError(t.line, t.column, "balanced parentheses", ")");
        }
        out += ')';
        need_space = true;
      } else if (t.kind == Tok::word) {
        if (need_space) out += ' ';
        out += t.text;
        need_space = true;
      } else {
        throw ParseError(t.line, t.column, "expression", t.text);
      }
    }
    if (depth != 0) fail("')'");
    if (out.empty()) fail("expression");
    return out;
  }

 private:
  void clause(Statement& st) {
    bool meta = at(Tok::open) || at(Tok::string) ||
                (is_attribution(peek()) &&
                 (peek(1).kind == Tok::open || peek(1).kind == Tok::string)) ||
                (at(Tok::word) && peek().text.find('#') != std::string::npos &&
                 at_word("has", 1) && at_word("for", 2));
    if (meta) {
      MetaBody m;
      m.subject = ref(st.creator);
      expect_word("has");
      expect_word("for");
      m.relation = expect_any_word("relation name");
      m.object = ref(st.creator);
      st.kind = StatementKind::belief;
      st.body = std::move(m);
      return;
    }
    Graph g;
    bool definition = false;
    g.nodes.push_back(subject(definition));
    st.kind = definition ? StatementKind::definition : StatementKind::belief;
    copula(st);
    std::string rel = expect_any_word("relation name");
    expect_word("of");
    g.nodes.push_back(object());
    g.edges.push_back(Edge{0, rel, 1});
    st.body = std::move(g);
  }

  StatementRef ref(const std::string& creator) {
    StatementRef r;
    if (at(Tok::open) || at(Tok::string) || is_attribution(peek())) {
      r.embedded = std::make_shared<const Statement>(sentence(creator));
      return r;
    }
    if (!at(Tok::word) || peek().text.find('#') == std::string::npos) {
      fail("statement identifier or embedded statement");
    }
    r.id = next().text;
    return r;
  }

  static bool is_copula_start(const Parser& p) {
    return p.at_word("is") || p.at_word("are") || p.at_word("can");
  }

  std::string term_words(bool subject_position) {
    std::string term;
    while (at(Tok::word)) {
      if (subject_position && is_copula_start(*this)) break;
      if (!subject_position && (at_word("with") || at_word("in") || at_word("and"))) break;
      if (!term.empty()) term += ' ';
      term += next().text;
    }
    if (term.empty()) fail("term");
    return term;
  }

  // Returns true when a determiner was consumed.
  bool determiner(Quantifier& q, bool subject_position, bool& definition) {
    if (at_word("every")) {
      next();
      q = Quantifier::universal();
    } else if (at_word("any")) {
      if (!subject_position) fail("object determiner");
      next();
      q = Quantifier::universal();
      definition = true;
    } else if (at_word("no")) {
      if (!subject_position) fail("object determiner");
      next();
      q = Quantifier::no();
    } else if (at_word("most")) {
      next();
      q = Quantifier::most();
    } else if (at_word("a") || at_word("an") || (!subject_position && at_word("the"))) {
      next();
      q = Quantifier::at_least(1);
    } else if (at_word("at") && at_word("least", 1)) {
      next();
      next();
      if (!at(Tok::word) || !is_integer(peek().text)) fail("count");
      q = Quantifier::at_least(static_cast<unsigned>(std::stoul(next().text)));
      if (q.n == 0) fail("positive count");
    } else if (at(Tok::word) && is_number(peek().text) && peek(1).kind == Tok::percent) {
      double p = to_double(next().text);
      next();
      expect_word("of");
      q = Quantifier::percent_of(p);
    } else if (at(Tok::word) && is_integer(peek().text)) {
      q = Quantifier::exact(static_cast<unsigned>(std::stoul(next().text)));
    } else {
      return false;
    }
    return true;
  }

  ConceptNode subject(bool& definition) {
    ConceptNode n;
    if (!determiner(n.quantifier, true, definition)) {
      n.quantifier = Quantifier::individual();
      n.term = term_words(true);
      n.referent = n.term;
      return n;
    }
    n.term = term_words(true);
    return n;
  }

  ConceptNode object() {
    ConceptNode n;
    bool unused = false;
    if (!determiner(n.quantifier, false, unused)) {
      n.quantifier = Quantifier::individual();
      n.term = term_words(false);
      n.referent = n.term;
    } else {
      n.term = term_words(false);
    }
    if (at_word("with")) {
      next();
      Measure m;
      m.relation = expect_any_word("measure relation");
      if (at_word("at") && at_word("least", 1)) {
        next();
        next();
        m.comparator = Comparator::at_least;
      } else if (at_word("at") && at_word("most", 1)) {
        next();
        next();
        m.comparator = Comparator::at_most;
      }
      m.magnitude = to_double(expect_number("magnitude"));
      m.unit = expect_any_word("unit");
      n.measure = std::move(m);
    }
    return n;
  }

  void copula(Statement& st) {
    bool possible = false;
    if (at_word("can")) {
      next();
      expect_word("be");
      possible = true;
    } else if (at_word("is") || at_word("are")) {
      next();
      if (at_word("able")) {
        next();
        expect_word("to");
        expect_word("be");
        possible = true;
      }
    } else {
      fail("copula (is, are, can be)");
    }
    if (possible) st.contexts.push_back(Context{ContextKind::modality_possible, {}, {}});
  }

  void contexts(Statement& st) {
    while (true) {
      std::size_t k = at_word("and") ? 1 : 0;
      if (!at_word("in", k)) return;
      if (k) next();
      next();
      if (at_word("place")) {
        next();
        st.contexts.push_back(Context{ContextKind::place, expect_any_word("place"), {}});
      } else if (at_word("period")) {
        next();
        std::string from = expect_any_word("date");
        expect_word("to");
        std::string until = expect_any_word("date");
        st.contexts.push_back(Context{ContextKind::period, from, until});
      } else {
        fail("'place' or 'period'");
      }
    }
  }

  std::string_view text_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  ParseOptions opts_;
};

}  // namespace

std::string format_number(double value) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, p);
}

Statement parse_sentence(std::string_view text, const ParseOptions& opts) {
  Parser p(text, opts);
  Statement st = p.sentence(opts.default_creator);
  p.finish();
  if (st.creator.empty()) {
    throw ParseError(1, 1, "creator attribution", std::string(text.substr(0, 16)));
  }
  return st;
}

std::vector<FlTuple> parse_fl(std::string_view text, const ParseOptions& opts) {
  Parser p(text, opts);
  return p.fl();
}

Command parse_command(std::string_view text, const ParseOptions& opts) {
  Parser p(text, opts);
  Command cmd;
  auto end_of_command = [&] {
    if (!p.at(Tok::semi)) p.fail("';'");
    p.next();
    if (!p.at(Tok::end)) p.fail("end of input");
  };
  if (p.at_word("spec") && p.at_word("of", 1)) {
    p.next();
    p.next();
    cmd.kind = CommandKind::spec_of;
    cmd.target = p.expect_any_word("object identifier");
    if (p.at_word("depth")) {
      p.next();
      if (!p.at(Tok::word) || !is_integer(p.peek().text)) p.fail("depth");
      cmd.depth = static_cast<unsigned>(std::stoul(p.next().text));
    }
    end_of_command();
  } else if (p.at_word("remove") && p.peek(1).kind == Tok::word) {
    p.next();
    cmd.kind = CommandKind::remove;
    cmd.target = p.expect_any_word("statement identifier");
    end_of_command();
  } else if (p.at_word("rate") && p.peek(1).kind == Tok::word) {
    p.next();
    cmd.kind = CommandKind::rate;
    cmd.target = p.expect_any_word("object identifier");
    cmd.criterion = p.expect_any_word("criterion");
    cmd.value = to_double(p.expect_number("rating value"));
    end_of_command();
  } else if (p.at_word("register") && p.peek(1).kind == Tok::word) {
    p.next();
    cmd.kind = CommandKind::register_source;
    cmd.target = p.expect_any_word("source identifier");
    cmd.action = "user";
    if (p.at(Tok::word)) cmd.action = p.next().text;
    if (cmd.action != "user" && cmd.action != "file" && cmd.action != "language" &&
        cmd.action != "external-vocabulary") {
      p.fail("source kind");
    }
    end_of_command();
  } else if (p.at_word("measure") && p.peek(1).kind == Tok::word) {
    p.next();
    cmd.kind = CommandKind::def_measure;
    cmd.target = p.expect_any_word("measure name");
    cmd.expression = p.normalized_sexpr_until_semi();
    end_of_command();
  } else if (p.at_word("filter") && p.peek(1).kind == Tok::word) {
    p.next();
    cmd.kind = CommandKind::set_filter;
    cmd.target = p.expect_any_word("filter name");
    cmd.action = p.expect_any_word("display action");
    if (cmd.action != "hide" && cmd.action != "small-font") p.fail("hide or small-font");
    cmd.expression = p.normalized_sexpr_until_semi();
    end_of_command();
  } else if (p.at_word("query") &&
             (p.peek(1).kind == Tok::open || is_attribution(p.peek(1)))) {
    p.next();
    cmd.kind = CommandKind::query_graph;
    cmd.statement = p.sentence(opts.default_creator.empty() ? "query"
                                                            : opts.default_creator);
    p.finish();
  } else if (p.at(Tok::word) && !is_attribution(p.peek()) &&
             p.peek(1).kind == Tok::word && p.peek(2).kind == Tok::colon) {
    cmd.kind = CommandKind::assert_fl;
    cmd.fl = p.fl();
  } else {
    cmd.kind = CommandKind::assert_statement;
    cmd.statement = p.sentence(opts.default_creator);
    p.finish();
    if (cmd.statement->creator.empty()) p.fail("creator attribution");
  }
  return cmd;
}

std::vector<CommandSource> split_commands(std::string_view s) {
  std::vector<CommandSource> out;
  std::size_t i = 0, line = 1;
  int nesting = 0;
  bool in_string = false;
  std::string cur;
  std::size_t cur_line = 0;
  while (i < s.size()) {
    char c = s[i];
    if (!in_string && c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
      while (i < s.size() && s[i] != '\n') ++i;
      continue;
    }
    if (c == '\n') ++line;
    if (!cur_line && !std::isspace(static_cast<unsigned char>(c))) cur_line = line;
    if (c == '"') {
      in_string = !in_string;
    } else if (!in_string && c == '`') {
      ++nesting;
    } else if (!in_string && s.substr(i, kClose.size()) == kClose) {
      --nesting;
      cur += kClose;
      i += kClose.size();
      continue;
    }
    cur += c;
    ++i;
    if (c == ';' && !in_string && nesting <= 0) {
      cur.erase(0, cur.find_first_not_of(" \t\r\n"));
      out.push_back(CommandSource{cur, cur_line ? cur_line : line});
      cur.clear();
      cur_line = 0;
      nesting = 0;
    }
  }
  bool blank = std::all_of(cur.begin(), cur.end(),
                           [](char ch) { return std::isspace(static_cast<unsigned char>(ch)); });
  if (!blank) throw ParseError(line, 1, "';'", "end of input");
  return out;
}

// ---------------------------------------------------------------- rendering

namespace {

std::string render_quantified(const ConceptNode& n, bool subject, bool definition) {
  const Quantifier& q = n.quantifier;
  switch (q.kind) {
    case QuantKind::individual: return n.term;
    case QuantKind::universal:
      return (subject && definition ? "any " : "every ") + n.term;
    case QuantKind::none: return "no " + n.term;
    case QuantKind::most: return "most " + n.term;
    case QuantKind::at_least_percent: return format_number(q.percent) + "% of " + n.term;
    case QuantKind::at_least:
      return q.n == 1 ? "a " + n.term : "at least " + std::to_string(q.n) + " " + n.term;
    case QuantKind::exact: return std::to_string(q.n) + " " + n.term;
  }
  return n.term;
}

std::string attribution(const Statement& st) {
  std::string out = st.creator + "#";
  if (st.interpreted) out += *st.interpreted + "#";
  return out;
}

std::string render_ref(const StatementRef& r) {
  return r.is_embedded() ? render_fe(*r.embedded) : r.id;
}

}  // namespace

std::string render_fe(const Statement& st) {
  if (const TextBody* t = st.text()) return attribution(st) + "\"" + t->text + "\"";
  std::string out = attribution(st) + "`";
  if (const MetaBody* m = st.meta()) {
    out += render_ref(m->subject) + " has for " + m->relation + " " + render_ref(m->object);
  } else {
    const Graph& g = *st.graph();
    if (g.nodes.size() != 2 || g.edges.size() != 1 || g.edges[0].subject != 0 ||
        g.edges[0].object != 1 || g.nodes[0].measure) {
      throw Error(ErrorCode::unsupported,
                  "unsupported: only single-relation graphs have a sentence form");
    }
    const ConceptNode& obj = g.nodes[1];
    out += render_quantified(g.nodes[0], true, st.kind == StatementKind::definition);
    out += st.is_possible() ? " can be " : " is ";
    out += g.edges[0].relation + " of " + render_quantified(obj, false, false);
    if (obj.measure) {
      const Measure& m = *obj.measure;
      out += " with " + m.relation;
      if (m.comparator == Comparator::at_least) out += " at least";
      if (m.comparator == Comparator::at_most) out += " at most";
      out += " " + format_number(m.magnitude) + " " + m.unit;
    }
  }
  for (const Context& c : st.contexts) {
    if (c.kind == ContextKind::place) out += " in place " + c.value;
    if (c.kind == ContextKind::period) out += " in period " + c.value + " to " + c.until;
  }
  return out + std::string(kClose);
}

std::string render_fl(const std::vector<FlTuple>& tuples) {
  if (tuples.empty()) return {};
  std::string out = tuples.front().subject;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    out += i ? ", " : " ";
    out += tuples[i].relation + ":";
    for (const std::string& o : tuples[i].objects) out += " " + o;
    if (tuples[i].source) out += " (" + *tuples[i].source + ")";
  }
  return out + ";";
}

std::string render_command(const Command& c) {
  switch (c.kind) {
    case CommandKind::assert_statement: return render_fe(*c.statement) + ";";
    case CommandKind::assert_fl: return render_fl(c.fl);
    case CommandKind::remove: return "remove " + c.target + ";";
    case CommandKind::spec_of:
      return "spec of " + c.target +
             (c.depth ? " depth " + std::to_string(c.depth) : std::string()) + ";";
    case CommandKind::query_graph: return "query " + render_fe(*c.statement) + ";";
    case CommandKind::rate:
      return "rate " + c.target + " " + c.criterion + " " + format_number(c.value) + ";";
    case CommandKind::set_filter:
      return "filter " + c.target + " " + c.action + " " + c.expression + ";";
    case CommandKind::def_measure: return "measure " + c.target + " " + c.expression + ";";
    case CommandKind::register_source: return "register " + c.target + " " + c.action + ";";
  }
  return {};
}

// ---------------------------------------------------------------------- KIF

namespace {

class KifRenderer {
 public:
  std::string variable(const std::string& term) {
    std::string name = term.substr(term.find('#') == std::string::npos ? 0 : term.find('#') + 1);
    char letter = 'x';
    for (char c : name) {
      if (std::isalpha(static_cast<unsigned char>(c))) {
        letter = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        break;
      }
    }
    int& count = used_[letter];
    ++count;
    std::string v = "?" + std::string(1, letter);
    if (count > 1) v += std::to_string(count);
    return v;
  }

  static std::string quantified(const ConceptNode& n, const std::string& var,
                                const std::string& body) {
    std::string binding = "((" + var + " " + n.term + "))";
    switch (n.quantifier.kind) {
      case QuantKind::universal: return "(forall " + binding + " " + body + ")";
      case QuantKind::at_least:
        if (n.quantifier.n == 1) return "(exists " + binding + " " + body + ")";
        return "(atleast " + std::to_string(n.quantifier.n) + " " + binding + " " + body + ")";
      case QuantKind::exact:
        return "(exactly " + std::to_string(n.quantifier.n) + " " + binding + " " + body + ")";
      default: break;
    }
    throw Error(ErrorCode::unsupported,
                std::string("unsupported-quantifier: ") + to_string(n.quantifier.kind));
  }

 private:
  std::map<char, int> used_;
};

void check_kif_supported(const Statement& st) {
  const Graph* g = st.graph();
  if (!g) throw Error(ErrorCode::unsupported, "unsupported: KIF needs a graph body");
  for (const ConceptNode& n : g->nodes) {
    switch (n.quantifier.kind) {
      case QuantKind::universal:
      case QuantKind::individual:
      case QuantKind::exact:
      case QuantKind::at_least: break;
      default:
        throw Error(ErrorCode::unsupported,
                    std::string("unsupported-quantifier: ") + to_string(n.quantifier.kind));
    }
  }
  for (const Context& c : st.contexts) {
    if (c.kind != ContextKind::modality_possible) {
      throw Error(ErrorCode::unsupported,
                  std::string("unsupported-context: ") + to_string(c.kind));
    }
  }
}

}  // namespace

std::string render_kif(const Statement& st) {
  check_kif_supported(st);
  const Graph& g = *st.graph();
  KifRenderer kif;
  std::vector<std::string> term_of(g.nodes.size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const ConceptNode& n = g.nodes[i];
    term_of[i] = n.quantifier.kind == QuantKind::individual ? *n.referent : kif.variable(n.term);
  }
  std::vector<std::string> atoms;
  for (const Edge& e : g.edges) {
    atoms.push_back("(" + e.relation + " " + term_of[e.subject] + " " + term_of[e.object] + ")");
  }
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (const auto& m = g.nodes[i].measure) {
      const char* cmp = m->comparator == Comparator::at_least  ? ">="
                        : m->comparator == Comparator::at_most ? "=<"
                                                               : "=";
      atoms.push_back(std::string("(") + cmp + " (" + m->relation + " " + term_of[i] +
                      ") (* " + format_number(m->magnitude) + " " + m->unit + "))");
    }
  }
  std::string body;
  if (atoms.size() == 1) {
    body = atoms.front();
  } else {
    body = "(and";
    for (const std::string& a : atoms) body += " " + a;
    body += ")";
  }
  bool definition = st.kind == StatementKind::definition;
  // Quantifiers nest in node order, the first node outermost.
  for (std::size_t i = g.nodes.size(); i-- > 0;) {
    const ConceptNode& n = g.nodes[i];
    if (n.quantifier.kind == QuantKind::individual) continue;
    if (definition && i == 0) continue;
    body = KifRenderer::quantified(n, term_of[i], body);
  }
  if (definition) {
    body = "(defrelation " + g.nodes[0].term + " (" + term_of[0] + ") :=> " + body + ")";
  }
  if (st.is_possible()) body = "(modality possible '" + body + ")";
  std::string role = definition ? "creator" : "believer";
  std::string who = definition ? st.creator : st.believer.value_or(st.creator);
  return "(" + role + " " + who + " '" + body + ")";
}

// --------------------------------------------------------------------- tree

namespace {

void render_tree_into(const TreeNode& n, std::size_t depth, std::string& out) {
  out.append(depth * 2, ' ');
  if (!n.link.empty()) out += n.link + ": ";
  out += n.id;
  if (!n.creator.empty()) out += " (" + n.creator + ")";
  out += '\n';
  std::vector<const TreeNode*> kids;
  for (const TreeNode& c : n.children) kids.push_back(&c);
  std::sort(kids.begin(), kids.end(), [](const TreeNode* a, const TreeNode* b) {
    return std::tie(a->id, a->link, a->creator) < std::tie(b->id, b->link, b->creator);
  });
  for (const TreeNode* c : kids) render_tree_into(*c, depth + 1, out);
}

}  // namespace

std::string render_tree(const TreeNode& root) {
  std::string out;
  render_tree_into(root, 0, out);
  return out;
}

}  // namespace cbkb
