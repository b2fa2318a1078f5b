#pragma once
// Ratings, user-defined measures and display filters.
//
// Expressions use a prefix notation:
//   number                       literal
//   (mean C) (count C)           over the object's ratings for criterion C
//   (wmean C W)                  ratings weighted by W, evaluated per rater
//   (userscore rater|creator|U)  global score of a user
//   (unobjected-args)            arguments for the object that no objection targets
//   (score [M]) (creatorscore)   filters only: object / creator score
//   (+ ..) (- a b) (* ..) (/ a b) (min ..) (max ..)
//   (>= a b) (<= a b) (> a b) (< a b) (= a b) (and ..) (or ..) (not p)
// Unrated objects score 0.5. A user's score is 0.5 * 0.5 + 0.5 * the mean
// score of the statements they created, solved by fixpoint iteration.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cbkb/kb.hpp"

namespace cbkb {

inline constexpr const char* kDefaultMeasure = "(wmean acceptance (userscore rater))";
inline constexpr double kUnratedScore = 0.5;
inline constexpr double kUserDamping = 0.5;
inline constexpr double kFixpointTolerance = 1e-9;
inline constexpr std::size_t kFixpointMaxIterations = 100;

struct Expr {
  enum class Kind { number, symbol, call };
  Kind kind = Kind::number;
  double number = 0.0;
  std::string symbol;  // symbol name or operator of a call
  std::vector<Expr> args;
};

enum class ExprType { number, boolean };
enum class ExprContext { measure, filter };

// Throws ParseError on syntax errors.
Expr parse_expression(std::string_view text);
std::string render_expression(const Expr& e);

// Throws Error(ill_typed_expression). In filter context `score` may name a
// measure of `kb`.
ExprType type_check(const Expr& e, ExprContext ctx, const KnowledgeBase* kb = nullptr);

EditOutcome submit_rating(KnowledgeBase& kb, const std::string& rater, const std::string& object,
                          const std::string& criterion, double value, const std::string& date);
EditOutcome define_measure(KnowledgeBase& kb, const std::string& name,
                           const std::string& expression);
EditOutcome define_filter(KnowledgeBase& kb, const std::string& name, const std::string& action,
                          const std::string& expression);

// Scores of all objects under one measure, with user scores solved first
// when the measure depends on them.
class Evaluator {
 public:
  Evaluator(const KnowledgeBase& kb, std::string_view measure);

  double score(const std::string& object) const;
  double user_score(const std::string& user) const;
  const std::map<std::string, double>& user_scores() const { return users_; }
  std::size_t iterations() const { return residuals_.size(); }
  // Largest user-score change of each iteration.
  const std::vector<double>& residuals() const { return residuals_; }

 private:
  const KnowledgeBase& kb_;
  Expr measure_;
  std::map<std::string, std::vector<const Rating*>> by_object_;
  std::map<std::string, double> users_;
  std::vector<double> residuals_;
};

double eval_object(const KnowledgeBase& kb, std::string_view measure, const std::string& object);

enum class DisplayAction { show, hide, small_font };
const char* to_string(DisplayAction a);

// Objects failing the predicate get the filter's action; order is kept.
std::vector<std::pair<std::string, DisplayAction>> apply_filter(
    const KnowledgeBase& kb, const FilterDef& filter, const std::vector<std::string>& results);

}  // namespace cbkb
