#include <gtest/gtest.h>

#include <deque>
#include <random>

#include "cbkb/hierarchy.hpp"
#include "cbkb/kb.hpp"
#include "cbkb/matcher.hpp"
#include "cbkb/notation.hpp"
#include "support.hpp"

using namespace cbkb;
using cbkb::test::error_code_of;

namespace {

HierarchyLink link(LinkKind k, std::string from, std::string to, bool system = false) {
  return HierarchyLink{k, std::move(from), std::move(to), "pm", "", system};
}

Term term(std::string id) { return Term{id, "pm", Formality::formal, {}, {}, ""}; }

std::string node(std::size_t i) { return "t#n" + std::to_string(i); }

}  // namespace

TEST(AddTerm, SubtypeAnchor) {
  Hierarchy h;
  h.add_term(term("wn#bird"), {link(LinkKind::subtype, "wn#bird", "thing")});
  h.add_term(term("u1#bird"), {link(LinkKind::subtype, "u1#bird", "wn#bird")});
  EXPECT_TRUE(h.reaches("u1#bird", "wn#bird"));
  EXPECT_TRUE(term_subsumes("wn#bird", "u1#bird", h));
  EXPECT_FALSE(term_subsumes("u1#bird", "wn#bird", h));
  EXPECT_TRUE(term_subsumes("u1#bird", "u1#bird", h));
}

TEST(AddTerm, NoAnchorRejected) {
  Hierarchy h;
  EXPECT_EQ(error_code_of([&] { h.add_term(term("u1#orphan"), {}); }), ErrorCode::no_anchor);
  EXPECT_FALSE(h.contains("u1#orphan"));
}

TEST(AddTerm, UnknownAnchorTarget) {
  Hierarchy h;
  EXPECT_EQ(error_code_of([&] {
              h.add_term(term("u1#a"), {link(LinkKind::subtype, "u1#a", "u1#missing")});
            }),
            ErrorCode::unknown_object);
  EXPECT_FALSE(h.contains("u1#a"));
}

TEST(AddLink, CycleRejectedAndStateKept) {
  Hierarchy h;
  h.add_term(term("t#a"), {link(LinkKind::subtype, "t#a", "thing")});
  h.add_term(term("t#b"), {link(LinkKind::subtype, "t#b", "t#a")});
  auto before = h.links();
  EXPECT_EQ(error_code_of([&] { h.add_link(link(LinkKind::subtype, "t#a", "t#b")); }),
            ErrorCode::cycle_introduced);
  EXPECT_EQ(h.links(), before);
  EXPECT_TRUE(h.is_acyclic());
}

TEST(AddLink, EquivalenceDoesNotCountAsCycle) {
  Hierarchy h;
  h.add_term(term("t#a"), {link(LinkKind::subtype, "t#a", "thing")});
  h.add_term(term("t#b"), {link(LinkKind::equivalence, "t#b", "t#a")});
  EXPECT_NO_THROW(h.add_link(link(LinkKind::equivalence, "t#a", "t#b")));
  EXPECT_TRUE(h.reaches("t#a", "t#b"));
  EXPECT_TRUE(h.reaches("t#b", "t#a"));
}

// Reachability over random DAGs against a Floyd-Warshall closure.
TEST(Reaches, MatchesTransitiveClosureOracle) {
  std::mt19937 rng(7);
  for (int round = 0; round < 40; ++round) {
    const std::size_t n = 12;
    Hierarchy h;
    std::vector<std::vector<bool>> closure(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) {
      h.add_object(node(i), ObjectKind::term);
      closure[i][i] = true;
    }
    std::bernoulli_distribution coin(0.25);
    for (std::size_t i = 1; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (!coin(rng)) continue;
        h.add_link(link(coin(rng) ? LinkKind::instance : LinkKind::subtype, node(i), node(j)));
        closure[i][j] = true;
      }
    }
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (closure[i][k] && closure[k][j]) closure[i][j] = true;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        ASSERT_EQ(h.reaches(node(i), node(j)), closure[i][j]) << round << " " << i << "->" << j;
        ASSERT_EQ(term_subsumes(node(j), node(i), h), closure[i][j]);
      }
    }
  }
}

// Random link insertions: add_link rejects exactly the links whose target
// already reaches their source (depth-first oracle).
TEST(AddLink, CycleDetectionMatchesOracle) {
  std::mt19937 rng(11);
  for (int round = 0; round < 30; ++round) {
    const std::size_t n = 8;
    Hierarchy h;
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i) h.add_object(node(i), ObjectKind::term);
    auto path = [&](std::size_t from, std::size_t to) {
      std::vector<bool> seen(n, false);
      std::vector<std::size_t> stack{from};
      while (!stack.empty()) {
        std::size_t c = stack.back();
        stack.pop_back();
        if (c == to) return true;
        if (seen[c]) continue;
        seen[c] = true;
        for (std::size_t d : adj[c]) stack.push_back(d);
      }
      return false;
    };
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (int step = 0; step < 25; ++step) {
      std::size_t a = pick(rng), b = pick(rng);
      bool cycle = path(b, a);
      bool threw = false;
      try {
        h.add_link(link(LinkKind::subtype, node(a), node(b)));
      } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::cycle_introduced);
        threw = true;
      }
      ASSERT_EQ(threw, cycle) << node(a) << " -> " << node(b);
      if (!threw) adj[a].push_back(b);
      ASSERT_TRUE(h.is_acyclic());
    }
  }
}

// explicitly_related over random statement graphs against an undirected BFS
// restricted to statement-to-statement links.
TEST(ExplicitlyRelated, MatchesBfsOracle) {
  std::mt19937 rng(23);
  const LinkKind kinds[] = {LinkKind::logical_deduction_of, LinkKind::informal_generalization,
                            LinkKind::example,   LinkKind::equivalence,
                            LinkKind::corrective, LinkKind::argumentation};
  for (int round = 0; round < 40; ++round) {
    const std::size_t n = 10;
    Hierarchy h;
    for (std::size_t i = 0; i < n; ++i) h.add_object("u#s" + std::to_string(i), ObjectKind::statement);
    h.add_term(term("t#bridge"), {link(LinkKind::subtype, "t#bridge", "thing")});
    struct L {
      std::size_t a, b;
      bool system;
    };
    std::vector<L> ls;
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::uniform_int_distribution<std::size_t> kind(0, std::size(kinds) - 1);
    std::bernoulli_distribution coin(0.3);
    for (int k = 0; k < 9; ++k) {
      std::size_t a = pick(rng), b = pick(rng);
      if (a == b) continue;
      if (a < b) std::swap(a, b);
      bool system = coin(rng);
      h.add_link(link(kinds[kind(rng)], "u#s" + std::to_string(a), "u#s" + std::to_string(b), system));
      ls.push_back({a, b, system});
    }
    // A term between two statements never connects them.
    h.add_link(link(LinkKind::instance, "u#s0", "t#bridge"));
    h.add_link(link(LinkKind::instance, "u#s9", "t#bridge"));
    for (bool include_system : {true, false}) {
      for (std::size_t s = 0; s < n; ++s) {
        std::vector<bool> seen(n, false);
        std::deque<std::size_t> q{s};
        seen[s] = true;
        while (!q.empty()) {
          std::size_t c = q.front();
          q.pop_front();
          for (const L& l : ls) {
            if (l.system && !include_system) continue;
            std::size_t other = l.a == c ? l.b : l.b == c ? l.a : n;
            if (other < n && !seen[other]) {
              seen[other] = true;
              q.push_back(other);
            }
          }
        }
        for (std::size_t t = 0; t < n; ++t) {
          ASSERT_EQ(h.explicitly_related("u#s" + std::to_string(s), "u#s" + std::to_string(t),
                                         include_system),
                    seen[t]);
        }
      }
    }
  }
}

TEST(ExplicitlyRelated, UnknownObject) {
  Hierarchy h;
  h.add_object("u#s1", ObjectKind::statement);
  EXPECT_EQ(error_code_of([&] { (void)h.explicitly_related("u#s1", "u#s2"); }),
            ErrorCode::unknown_object);
}

TEST(SpecializationsOf, LeafIsSingleNode) {
  Hierarchy h;
  h.add_term(term("t#leaf"), {link(LinkKind::subtype, "t#leaf", "thing")});
  TreeNode t = h.specializations_of("t#leaf");
  EXPECT_EQ(t.id, "t#leaf");
  EXPECT_TRUE(t.children.empty());
  EXPECT_EQ(render_tree(t), "t#leaf\n");
}

TEST(SpecializationsOf, UnknownRoot) {
  Hierarchy h;
  EXPECT_EQ(error_code_of([&] { (void)h.specializations_of("t#nope"); }),
            ErrorCode::unknown_object);
}

TEST(SpecializationsOf, DiamondListsEachObjectOnce) {
  Hierarchy h;
  h.add_term(term("t#a"), {link(LinkKind::subtype, "t#a", "thing")});
  h.add_term(term("t#b"), {link(LinkKind::subtype, "t#b", "thing")});
  h.add_term(term("t#c"), {link(LinkKind::subtype, "t#c", "t#a"),
                           link(LinkKind::subtype, "t#c", "t#b")});
  std::string tree = render_tree(h.specializations_of("thing"));
  std::size_t count = 0;
  for (std::size_t p = tree.find("t#c"); p != std::string::npos; p = tree.find("t#c", p + 1)) ++count;
  EXPECT_EQ(count, 1u);
}

TEST(SpecializationsOf, DemoCorpusGolden) {
  Service s(test::fixed_clock());
  test::run_ok(s, test::read_data("wfm_demo.kb"));
  TreeNode t = s.state()->hierarchy.specializations_of("wfm#workflow_management");
  EXPECT_EQ(render_tree(t), test::read_data("wfm_spec_tree.golden"));
}

TEST(SpecializationsOf, DepthOneIsDirectSpecializations) {
  Service s(test::fixed_clock());
  test::run_ok(s, test::read_data("wfm_demo.kb"));
  const Hierarchy& h = s.state()->hierarchy;
  TreeNode t = h.specializations_of("wfm#workflow_execution", 1);
  std::vector<std::string> got;
  for (const TreeNode& c : t.children) {
    got.push_back(c.id);
    EXPECT_TRUE(c.children.empty());
  }
  std::vector<std::string> direct;
  for (const HierarchyLink& l : h.links_to("wfm#workflow_execution")) direct.push_back(l.from);
  std::sort(direct.begin(), direct.end());
  EXPECT_EQ(got, direct);
  EXPECT_EQ(got, (std::vector<std::string>{"wfm#distributed_execution", "wfm#task_assignment",
                                           "wfm#task_scheduling"}));
}

TEST(Preloaded, UpperOntology) {
  KnowledgeBase kb = KnowledgeBase::preloaded();
  for (const char* rel : {"subtype", "instance", "part", "agent", "duration",
                          "corrective_restriction", "corrective_generalization", "argument",
                          "objection", "equivalence", "example", "subprocess"}) {
    EXPECT_TRUE(kb.hierarchy.reaches(rel, "relation-type")) << rel;
  }
  EXPECT_TRUE(kb.hierarchy.reaches("process", "thing"));
  EXPECT_TRUE(kb.hierarchy.unanchored().empty());
}

TEST(SingleHierarchy, EveryObjectReachesRootAfterScenario) {
  Service s(test::fixed_clock());
  for (const ScriptResult& r : run_script(s, test::read_data("scenario_correction.kb"), "pm")) {
    (void)r;
  }
  auto kb = s.state();
  EXPECT_TRUE(kb->hierarchy.unanchored().empty());
  EXPECT_TRUE(kb->hierarchy.is_acyclic());
  for (const auto& [id, st] : kb->statements) {
    (void)st;
    EXPECT_TRUE(kb->hierarchy.contains(id));
  }
}
