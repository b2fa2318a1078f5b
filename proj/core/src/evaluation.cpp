#include "cbkb/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>

#include "cbkb/error.hpp"
#include "cbkb/notation.hpp"

namespace cbkb {

namespace {

class SexprParser {
 public:
  explicit SexprParser(std::string_view text) : text_(text) {}

  Expr parse() {
    Expr e = expr();
    skip_space();
    if (pos_ < text_.size()) fail("end of expression");
    return e;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& expected) {
    std::string found = pos_ < text_.size() ? std::string(1, text_[pos_]) : "end of input";
    throw ParseError(1, pos_ + 1, expected, found);
  }

  Expr expr() {
    skip_space();
    if (pos_ >= text_.size()) fail("expression");
    if (text_[pos_] == ')') fail("expression");
    if (text_[pos_] == '(') {
      ++pos_;
      skip_space();
      Expr call;
      call.kind = Expr::Kind::call;
      call.symbol = atom();
      if (call.symbol.empty()) fail("operator");
      for (;;) {
        skip_space();
        if (pos_ >= text_.size()) fail("')'");
        if (text_[pos_] == ')') {
          ++pos_;
          return call;
        }
        call.args.push_back(expr());
      }
    }
    std::string a = atom();
    Expr e;
    double v = 0;
    auto [ptr, ec] = std::from_chars(a.data(), a.data() + a.size(), v);
    if (ec == std::errc() && ptr == a.data() + a.size()) {
      e.kind = Expr::Kind::number;
      e.number = v;
    } else {
      e.kind = Expr::Kind::symbol;
      e.symbol = a;
    }
    return e;
  }

  std::string atom() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

[[noreturn]] void ill_typed(const std::string& why) {
  throw Error(ErrorCode::ill_typed_expression, "ill-typed-expression: " + why);
}

bool is_arith(const std::string& op) {
  return op == "+" || op == "-" || op == "*" || op == "/" || op == "min" || op == "max";
}

bool is_comparison(const std::string& op) {
  return op == ">=" || op == "<=" || op == ">" || op == "<" || op == "=";
}

struct TypeScope {
  ExprContext ctx;
  const KnowledgeBase* kb;
  bool rater_bound;
};

ExprType check(const Expr& e, const TypeScope& s) {
  if (e.kind == Expr::Kind::number) return ExprType::number;
  if (e.kind == Expr::Kind::symbol) ill_typed("bare symbol " + e.symbol);
  const std::string& op = e.symbol;
  auto arity = [&](std::size_t lo, std::size_t hi) {
    if (e.args.size() < lo || e.args.size() > hi) {
      ill_typed(op + " takes " + std::to_string(lo) + ".." + std::to_string(hi) + " arguments");
    }
  };
  auto criterion = [&](const Expr& a) {
    if (a.kind != Expr::Kind::symbol) ill_typed(op + " expects a criterion name");
  };
  auto numbers = [&](const TypeScope& inner) {
    for (const Expr& a : e.args) {
      if (check(a, inner) != ExprType::number) ill_typed(op + " expects numbers");
    }
  };
  if (op == "mean" || op == "count") {
    arity(1, 1);
    criterion(e.args[0]);
    return ExprType::number;
  }
  if (op == "wmean") {
    arity(2, 2);
    criterion(e.args[0]);
    TypeScope inner = s;
    inner.rater_bound = true;
    if (check(e.args[1], inner) != ExprType::number) ill_typed("wmean weight must be a number");
    return ExprType::number;
  }
  if (op == "userscore") {
    arity(1, 1);
    const Expr& a = e.args[0];
    if (a.kind != Expr::Kind::symbol) ill_typed("userscore expects rater, creator or a user");
    if (a.symbol == "rater" && !s.rater_bound) ill_typed("rater is only bound inside wmean");
    return ExprType::number;
  }
  if (op == "unobjected-args") {
    arity(0, 0);
    return ExprType::number;
  }
  if (op == "score" || op == "creatorscore") {
    if (s.ctx != ExprContext::filter) ill_typed(op + " is only available in filters");
    arity(0, op == "score" ? 1 : 0);
    if (!e.args.empty()) {
      const Expr& a = e.args[0];
      if (a.kind != Expr::Kind::symbol) ill_typed("score expects a measure name");
      if (!s.kb || !s.kb->measures.contains(a.symbol)) ill_typed("unknown measure " + a.symbol);
    }
    return ExprType::number;
  }
  if (is_arith(op)) {
    if (op == "-") {
      arity(1, 2);
    } else if (op == "/") {
      arity(2, 2);
    } else {
      arity(1, SIZE_MAX);
    }
    numbers(s);
    return ExprType::number;
  }
  if (is_comparison(op)) {
    arity(2, 2);
    numbers(s);
    return ExprType::boolean;
  }
  if (op == "and" || op == "or" || op == "not") {
    op == "not" ? arity(1, 1) : arity(1, SIZE_MAX);
    for (const Expr& a : e.args) {
      if (check(a, s) != ExprType::boolean) ill_typed(op + " expects predicates");
    }
    return ExprType::boolean;
  }
  ill_typed("unknown operator " + op);
}

using RatingIndex = std::map<std::string, std::vector<const Rating*>>;

struct Scope {
  const KnowledgeBase& kb;
  const RatingIndex& ratings;
  const std::map<std::string, double>& users;
  const std::string& object;
  const std::string* rater;
  std::function<double(const std::string&, const std::string&)> score;  // (measure, object)
  std::function<double(const std::string&)> creator_score;              // object
};

std::string creator_of(const KnowledgeBase& kb, const std::string& object) {
  if (auto it = kb.statements.find(object); it != kb.statements.end()) return it->second.creator;
  if (auto it = kb.terms.find(object); it != kb.terms.end()) return it->second.creator;
  if (auto it = kb.ratings.find(object); it != kb.ratings.end()) return it->second.rater;
  return {};
}

double user_value(const std::map<std::string, double>& users, const std::string& u) {
  auto it = users.find(u);
  return it == users.end() ? kUnratedScore : it->second;
}

std::vector<const Rating*> ratings_for(const Scope& s, const std::string& criterion) {
  std::vector<const Rating*> out;
  auto it = s.ratings.find(s.object);
  if (it == s.ratings.end()) return out;
  for (const Rating* r : it->second) {
    if (r->criterion == criterion) out.push_back(r);
  }
  return out;
}

std::size_t unobjected_arguments(const KnowledgeBase& kb, const std::string& object) {
  std::size_t n = 0;
  for (const HierarchyLink& l : kb.hierarchy.links_to(object)) {
    if (l.kind != LinkKind::argumentation || l.relation != "argument") continue;
    bool objected = false;
    for (const HierarchyLink& o : kb.hierarchy.links_to(l.from)) {
      if (o.kind == LinkKind::argumentation && o.relation == "objection") objected = true;
    }
    if (!objected) ++n;
  }
  return n;
}

double eval(const Expr& e, const Scope& s) {
  if (e.kind == Expr::Kind::number) return e.number;
  const std::string& op = e.symbol;
  auto arg = [&](std::size_t i) { return eval(e.args[i], s); };
  if (op == "mean") {
    auto rs = ratings_for(s, e.args[0].symbol);
    if (rs.empty()) return kUnratedScore;
    double sum = 0;
    for (const Rating* r : rs) sum += r->value;
    return sum / static_cast<double>(rs.size());
  }
  if (op == "count") return static_cast<double>(ratings_for(s, e.args[0].symbol).size());
  if (op == "wmean") {
    double num = 0, den = 0;
    for (const Rating* r : ratings_for(s, e.args[0].symbol)) {
      Scope inner{s.kb, s.ratings, s.users, s.object, &r->rater, s.score, s.creator_score};
      double w = eval(e.args[1], inner);
      num += w * r->value;
      den += w;
    }
    return den > 0 ? num / den : kUnratedScore;
  }
  if (op == "userscore") {
    const std::string& who = e.args[0].symbol;
    if (who == "rater") return user_value(s.users, *s.rater);
    if (who == "creator") return user_value(s.users, creator_of(s.kb, s.object));
    return user_value(s.users, who);
  }
  if (op == "unobjected-args") return static_cast<double>(unobjected_arguments(s.kb, s.object));
  if (op == "score") return s.score(e.args.empty() ? std::string() : e.args[0].symbol, s.object);
  if (op == "creatorscore") return s.creator_score(s.object);
  if (op == "+" || op == "*" || op == "min" || op == "max") {
    double acc = arg(0);
    for (std::size_t i = 1; i < e.args.size(); ++i) {
      double v = arg(i);
      if (op == "+") acc += v;
      if (op == "*") acc *= v;
      if (op == "min") acc = std::min(acc, v);
      if (op == "max") acc = std::max(acc, v);
    }
    return acc;
  }
  if (op == "-") return e.args.size() == 1 ? -arg(0) : arg(0) - arg(1);
  if (op == "/") {
    double d = arg(1);
    return d == 0 ? 0.0 : arg(0) / d;
  }
  if (op == ">=") return arg(0) >= arg(1);
  if (op == "<=") return arg(0) <= arg(1);
  if (op == ">") return arg(0) > arg(1);
  if (op == "<") return arg(0) < arg(1);
  if (op == "=") return arg(0) == arg(1);
  if (op == "and") {
    for (std::size_t i = 0; i < e.args.size(); ++i) {
      if (arg(i) == 0) return 0;
    }
    return 1;
  }
  if (op == "or") {
    for (std::size_t i = 0; i < e.args.size(); ++i) {
      if (arg(i) != 0) return 1;
    }
    return 0;
  }
  if (op == "not") return arg(0) == 0;
  ill_typed("unknown operator " + op);
}

bool uses_users(const Expr& e) {
  if (e.kind == Expr::Kind::call && (e.symbol == "userscore" || e.symbol == "creatorscore")) {
    return true;
  }
  return std::any_of(e.args.begin(), e.args.end(), uses_users);
}

}  // namespace

Expr parse_expression(std::string_view text) { return SexprParser(text).parse(); }

std::string render_expression(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::number: return format_number(e.number);
    case Expr::Kind::symbol: return e.symbol;
    case Expr::Kind::call: {
      std::string out = "(" + e.symbol;
      for (const Expr& a : e.args) out += " " + render_expression(a);
      return out + ")";
    }
  }
  return {};
}

ExprType type_check(const Expr& e, ExprContext ctx, const KnowledgeBase* kb) {
  return check(e, TypeScope{ctx, kb, false});
}

EditOutcome submit_rating(KnowledgeBase& kb, const std::string& rater, const std::string& object,
                          const std::string& criterion, double value, const std::string& date) {
  if (!kb.exists(object)) return EditOutcome::reject(RejectReason::unknown_object, object);
  if (!(value >= 0.0 && value <= 1.0)) {
    return EditOutcome::reject(RejectReason::out_of_range, format_number(value));
  }
  if (criterion.empty() || !std::all_of(criterion.begin(), criterion.end(), is_token_char)) {
    return EditOutcome::reject(RejectReason::ill_formed, "malformed-name " + criterion);
  }
  EditOutcome out;
  auto key = std::make_tuple(rater, object, criterion);
  std::string id;
  if (auto it = kb.rating_index.find(key); it != kb.rating_index.end()) {
    id = it->second;
  } else {
    unsigned& n = kb.rating_counter[rater];
    do {
      id = rater + "#r" + std::to_string(++n);
    } while (kb.exists(id));
    kb.rating_index[key] = id;
    out.created.push_back(id);
  }
  kb.ratings[id] = Rating{id, rater, object, criterion, value, date};
  return out;
}

EditOutcome define_measure(KnowledgeBase& kb, const std::string& name,
                           const std::string& expression) {
  try {
    Expr e = parse_expression(expression);
    if (type_check(e, ExprContext::measure, &kb) != ExprType::number) {
      ill_typed("a measure must be numeric");
    }
    kb.measures[name] = render_expression(e);
  } catch (const Error& e) {
    return EditOutcome::reject(RejectReason::ill_typed_expression, e.what());
  }
  return {};
}

EditOutcome define_filter(KnowledgeBase& kb, const std::string& name, const std::string& action,
                          const std::string& expression) {
  if (action != "hide" && action != "small-font") {
    return EditOutcome::reject(RejectReason::ill_formed, "unknown-display-action " + action);
  }
  try {
    Expr e = parse_expression(expression);
    if (type_check(e, ExprContext::filter, &kb) != ExprType::boolean) {
      ill_typed("a filter must be a predicate");
    }
    kb.filters[name] = FilterDef{action, render_expression(e)};
  } catch (const Error& e) {
    return EditOutcome::reject(RejectReason::ill_typed_expression, e.what());
  }
  return {};
}

Evaluator::Evaluator(const KnowledgeBase& kb, std::string_view measure)
    : kb_(kb), measure_(parse_expression(measure)) {
  if (type_check(measure_, ExprContext::measure, &kb) != ExprType::number) {
    ill_typed("a measure must be numeric");
  }
  for (const auto& [id, r] : kb.ratings) by_object_[r.object].push_back(&r);
  if (!uses_users(measure_)) return;

  std::map<std::string, std::vector<std::string>> created;
  for (const auto& [id, s] : kb.statements) created[s.creator].push_back(id);
  for (const auto& [id, src] : kb.sources) users_[id] = kUnratedScore;
  for (const auto& [u, ids] : created) users_[u] = kUnratedScore;

  for (std::size_t it = 0; it < kFixpointMaxIterations; ++it) {
    std::map<std::string, double> next;
    double residual = 0;
    for (const auto& [u, current] : users_) {
      double value = kUnratedScore;
      if (auto c = created.find(u); c != created.end()) {
        double sum = 0;
        for (const std::string& sid : c->second) sum += score(sid);
        value = (1 - kUserDamping) * kUnratedScore +
                kUserDamping * sum / static_cast<double>(c->second.size());
      }
      next[u] = value;
      residual = std::max(residual, std::abs(value - current));
    }
    users_ = std::move(next);
    residuals_.push_back(residual);
    if (residual < kFixpointTolerance) break;
  }
}

double Evaluator::score(const std::string& object) const {
  Scope s{kb_, by_object_, users_, object, nullptr,
          [](const std::string&, const std::string&) { return kUnratedScore; },
          [](const std::string&) { return kUnratedScore; }};
  return eval(measure_, s);
}

double Evaluator::user_score(const std::string& user) const { return user_value(users_, user); }

double eval_object(const KnowledgeBase& kb, std::string_view measure, const std::string& object) {
  return Evaluator(kb, measure).score(object);
}

const char* to_string(DisplayAction a) {
  switch (a) {
    case DisplayAction::show: return "show";
    case DisplayAction::hide: return "hide";
    case DisplayAction::small_font: return "small-font";
  }
  return "?";
}

std::vector<std::pair<std::string, DisplayAction>> apply_filter(
    const KnowledgeBase& kb, const FilterDef& filter, const std::vector<std::string>& results) {
  Expr predicate = parse_expression(filter.expression);
  if (type_check(predicate, ExprContext::filter, &kb) != ExprType::boolean) {
    ill_typed("a filter must be a predicate");
  }
  std::map<std::string, std::unique_ptr<Evaluator>> evaluators;
  auto evaluator = [&](const std::string& name) -> const Evaluator& {
    auto& slot = evaluators[name];
    if (!slot) {
      slot = std::make_unique<Evaluator>(kb, name.empty() ? std::string(kDefaultMeasure)
                                                          : kb.measures.at(name));
    }
    return *slot;
  };
  RatingIndex index;
  for (const auto& [id, r] : kb.ratings) index[r.object].push_back(&r);
  DisplayAction failing =
      filter.action == "hide" ? DisplayAction::hide : DisplayAction::small_font;

  std::vector<std::pair<std::string, DisplayAction>> out;
  for (const std::string& object : results) {
    Scope s{kb, index, evaluator("").user_scores(), object, nullptr,
            [&](const std::string& m, const std::string& o) { return evaluator(m).score(o); },
            [&](const std::string& o) { return evaluator("").user_score(creator_of(kb, o)); }};
    bool pass = eval(predicate, s) != 0;
    out.emplace_back(object, pass ? DisplayAction::show : failing);
  }
  return out;
}

}  // namespace cbkb
