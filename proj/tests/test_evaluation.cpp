#include <gtest/gtest.h>

#include <random>

#include "cbkb/evaluation.hpp"
#include "cbkb/notation.hpp"
#include "cbkb/protocol.hpp"
#include "oracles.hpp"
#include "support.hpp"
#include "worlds.hpp"

using namespace cbkb;
using test::kDate;
using test::random_world;
using test::run;
using test::visible;
using test::World;

TEST(Ratings, SingletonMeanIsTheRating) {
  std::mt19937 rng(1);
  World w = random_world(rng, 1, 1, 0.0);
  const std::string s = w.statements.at(0);
  ASSERT_TRUE(submit_rating(w.kb, "u1", s, "acceptance", 0.4, kDate).ok());
  EXPECT_EQ(eval_object(w.kb, "(mean acceptance)", s), 0.4);
  EXPECT_EQ(eval_object(w.kb, "(count acceptance)", s), 1.0);
}

TEST(Ratings, UnratedDefaultsToHalf) {
  std::mt19937 rng(2);
  World w = random_world(rng, 2, 1, 0.0);
  for (const std::string& s : w.statements) {
    EXPECT_EQ(eval_object(w.kb, "(mean acceptance)", s), 0.5);
    EXPECT_EQ(eval_object(w.kb, kDefaultMeasure, s), 0.5);
  }
}

TEST(Ratings, ValidationAndOverwrite) {
  std::mt19937 rng(3);
  World w = random_world(rng, 2, 1, 0.0);
  const std::string s = w.statements.at(0);

  EditOutcome first = submit_rating(w.kb, "u2", s, "acceptance", 0.3, kDate);
  ASSERT_TRUE(first.ok());
  ASSERT_EQ(first.created.size(), 1u);
  const std::string rid = first.created[0];
  EXPECT_TRUE(w.kb.exists(rid));

  EditOutcome again = submit_rating(w.kb, "u2", s, "acceptance", 0.8, kDate);
  EXPECT_TRUE(again.ok());
  EXPECT_TRUE(again.created.empty());
  EXPECT_EQ(w.kb.ratings.size(), 1u);
  EXPECT_EQ(w.kb.ratings.at(rid).value, 0.8);

  EXPECT_EQ(submit_rating(w.kb, "u2", s, "acceptance", 1.5, kDate).reason,
            RejectReason::out_of_range);
  EXPECT_EQ(submit_rating(w.kb, "u2", s, "acceptance", -0.1, kDate).reason,
            RejectReason::out_of_range);
  EXPECT_EQ(submit_rating(w.kb, "u2", "u9#s9", "acceptance", 0.5, kDate).reason,
            RejectReason::unknown_object);
  EXPECT_EQ(w.kb.ratings.at(rid).value, 0.8);

  // Free-form criteria are kept apart.
  ASSERT_TRUE(submit_rating(w.kb, "u2", s, "originality", 0.1, kDate).ok());
  EXPECT_EQ(eval_object(w.kb, "(mean acceptance)", s), 0.8);
  EXPECT_EQ(eval_object(w.kb, "(mean originality)", s), 0.1);
}

TEST(Ratings, RateCommandRoundTrip) {
  std::mt19937 rng(4);
  World w = random_world(rng, 2, 1, 0.0);
  const std::string s = w.statements.at(0);
  EXPECT_TRUE(run(w.kb, "u2", "rate " + s + " acceptance 0.3;").ok());
  EXPECT_EQ(eval_object(w.kb, "(mean acceptance)", s), 0.3);
  EXPECT_EQ(run(w.kb, "u2", "rate " + s + " acceptance 1.5;").reason, RejectReason::out_of_range);
}

TEST(Expressions, TypeChecking) {
  KnowledgeBase kb = KnowledgeBase::preloaded();
  EXPECT_EQ(type_check(parse_expression(kDefaultMeasure), ExprContext::measure), ExprType::number);
  EXPECT_EQ(type_check(parse_expression("(and (>= (score) 0.5) (< (creatorscore) 0.9))"),
                       ExprContext::filter),
            ExprType::boolean);
  auto ill = [&](const char* text, ExprContext ctx) {
    return test::error_code_of([&] { type_check(parse_expression(text), ctx, &kb); });
  };
  EXPECT_EQ(ill("(+ 1 (> 2 1))", ExprContext::measure), ErrorCode::ill_typed_expression);
  EXPECT_EQ(ill("(score)", ExprContext::measure), ErrorCode::ill_typed_expression);
  EXPECT_EQ(ill("(score nosuch)", ExprContext::filter), ErrorCode::ill_typed_expression);
  EXPECT_EQ(ill("(mean)", ExprContext::measure), ErrorCode::ill_typed_expression);
  EXPECT_EQ(ill("(frobnicate 1)", ExprContext::measure), ErrorCode::ill_typed_expression);
  EXPECT_EQ(test::error_code_of([&] { Evaluator(kb, "(> 1 0)"); }),
            ErrorCode::ill_typed_expression);
  EXPECT_EQ(test::error_code_of([&] { parse_expression("(+ 1 2"); }), ErrorCode::parse_error);
}

TEST(Expressions, RenderReparses) {
  for (const char* text : {kDefaultMeasure, "(and (>= (score m1) 0.25) (not (< 1 2)))",
                           "(/ (+ (mean a) 1) (max (count a) 1))"}) {
    Expr e = parse_expression(text);
    EXPECT_EQ(render_expression(parse_expression(render_expression(e))), render_expression(e));
  }
}

TEST(Measures, DefineAndFilter) {
  std::mt19937 rng(5);
  World w = random_world(rng, 2, 2, 1.0);
  EXPECT_TRUE(run(w.kb, "pm", "measure m1 (mean acceptance);").ok());
  EXPECT_EQ(run(w.kb, "pm", "measure m2 (> 1 0);").reason, RejectReason::ill_typed_expression);
  EXPECT_TRUE(run(w.kb, "pm", "filter f1 small-font (>= (score m1) 0.5);").ok());
  EXPECT_EQ(run(w.kb, "pm", "filter f2 hide (score);").reason, RejectReason::ill_typed_expression);

  auto tagged = apply_filter(w.kb, w.kb.filters.at("f1"), w.statements);
  ASSERT_EQ(tagged.size(), w.statements.size());
  for (std::size_t i = 0; i < tagged.size(); ++i) {
    EXPECT_EQ(tagged[i].first, w.statements[i]);
    double m = eval_object(w.kb, "(mean acceptance)", w.statements[i]);
    EXPECT_EQ(tagged[i].second, m >= 0.5 ? DisplayAction::show : DisplayAction::small_font);
  }
}

TEST(Fixpoint, TwoUsersMatchIterationOracle) {
  World w;
  KnowledgeBase& kb = w.kb;
  ASSERT_TRUE(run(kb, "pm", "register pm;").ok());
  ASSERT_TRUE(run(kb, "pm", "register u1;").ok());
  ASSERT_TRUE(run(kb, "pm", "register u2;").ok());
  ASSERT_TRUE(run(kb, "pm", "thing subtype: t#a t#b t#c t#d t#e t#f (t);").ok());
  ASSERT_TRUE(run(kb, "u1", "t#a part: t#b;").ok());
  ASSERT_TRUE(run(kb, "u1", "t#c part: t#d;").ok());
  ASSERT_TRUE(run(kb, "u2", "t#e part: t#f;").ok());
  ASSERT_TRUE(kb.statements.contains("u1#s1") && kb.statements.contains("u1#s2") &&
              kb.statements.contains("u2#s1"));

  oracle::RatingWorld o;
  o.users = {"pm", "t", "u1", "u2"};
  o.creator = {{"u1#s1", "u1"}, {"u1#s2", "u1"}, {"u2#s1", "u2"}};
  auto rate = [&](const std::string& rater, const std::string& s, double v) {
    ASSERT_TRUE(submit_rating(kb, rater, s, "acceptance", v, kDate).ok());
    o.ratings[s].emplace_back(rater, v);
  };
  rate("u1", "u2#s1", 0.9);
  rate("u2", "u1#s1", 0.2);
  rate("u2", "u1#s2", 0.7);
  rate("u1", "u1#s2", 0.4);

  Evaluator ev(kb, kDefaultMeasure);
  std::map<std::string, double> expected = oracle::fixpoint_oracle(o, 100);
  for (const std::string& u : {"u1", "u2"}) {
    EXPECT_NEAR(ev.user_score(u), expected.at(u), 1e-9) << u;
  }
  EXPECT_LT(ev.iterations(), kFixpointMaxIterations);
  // Damping keeps every user score inside (0.25, 0.75).
  EXPECT_GT(ev.user_score("u1"), 0.25);
  EXPECT_LT(ev.user_score("u1"), 0.75);
}

TEST(Fixpoint, RandomWorldsMatchOracleAndContract) {
  std::mt19937 rng(6);
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t users = 2 + trial % 4;
    World w = random_world(rng, users, 1 + trial % 3, 0.6);
    Evaluator ev(w.kb, kDefaultMeasure);
    std::map<std::string, double> expected = oracle::fixpoint_oracle(w.oracle, 100);
    for (const std::string& u : w.oracle.users) {
      EXPECT_NEAR(ev.user_score(u), expected.at(u), 1e-9) << "trial " << trial << " " << u;
    }
    const auto& r = ev.residuals();
    ASSERT_FALSE(r.empty());
    EXPECT_LT(r.back(), kFixpointTolerance) << "trial " << trial;
    for (std::size_t k = 3; k + 1 < r.size(); ++k) {
      EXPECT_LE(r[k + 1], r[k]) << "trial " << trial << " step " << k;
    }
    // Same ratings, same expression, same numbers.
    Evaluator again(w.kb, kDefaultMeasure);
    EXPECT_EQ(again.user_scores(), ev.user_scores());
  }
}

TEST(Filters, ThresholdExtremes) {
  std::mt19937 rng(7);
  World w = random_world(rng, 3, 2, 0.7);
  for (const std::string& s : w.statements) {
    ASSERT_LT(eval_object(w.kb, kDefaultMeasure, s), 1.0);
  }
  EXPECT_EQ(visible(w.kb, 0.0, w.statements).size(), w.statements.size());
  EXPECT_TRUE(visible(w.kb, 1.0, w.statements).empty());
}

TEST(Filters, MonotoneOnRandomLadders) {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int ladder = 0; ladder < 100; ++ladder) {
    World w = random_world(rng, 2 + ladder % 3, 2, 0.8);
    std::vector<double> thresholds(6);
    for (double& t : thresholds) t = unit(rng);
    std::sort(thresholds.begin(), thresholds.end());
    std::set<std::string> previous = visible(w.kb, 0.0, w.statements);
    for (double t : thresholds) {
      std::set<std::string> now = visible(w.kb, t, w.statements);
      EXPECT_TRUE(std::includes(previous.begin(), previous.end(), now.begin(), now.end()))
          << "ladder " << ladder << " threshold " << t;
      previous = std::move(now);
    }
  }
}
