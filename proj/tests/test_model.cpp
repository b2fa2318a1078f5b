#include <gtest/gtest.h>

#include "cbkb/error.hpp"
#include "cbkb/model.hpp"
#include "cbkb/notation.hpp"

using namespace cbkb;

TEST(MintIdentifier, FreeName) {
  EXPECT_EQ(mint_identifier("u1", "bird", {}).str(), "u1#bird");
}

TEST(MintIdentifier, CollisionGetsSuffixTwo) {
  EXPECT_EQ(mint_identifier("u2", "bird", {"u2#bird"}).str(), "u2#bird-2");
  EXPECT_EQ(mint_identifier("u2", "bird", {"u2#bird", "u2#bird-2"}).str(), "u2#bird-3");
}

TEST(MintIdentifier, EmptyNameIsMalformed) {
  try {
    mint_identifier("u2", "", {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::malformed_name);
  }
}

TEST(MintIdentifier, BadCharacterReportsPosition) {
  try {
    mint_identifier("u2", "bi rd", {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::malformed_name);
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
}

TEST(MintIdentifier, DeterministicAndInjective) {
  std::set<std::string> taken;
  std::set<std::string> minted;
  for (int i = 0; i < 20; ++i) {
    auto id = mint_identifier("u1", "t", taken).str();
    EXPECT_EQ(id, mint_identifier("u1", "t", taken).str());
    EXPECT_TRUE(minted.insert(id).second);
    taken.insert(id);
  }
}

TEST(Identifier, ParseSuffix) {
  auto id = Identifier::parse("u2#bird-2");
  EXPECT_EQ(id.creator, "u2");
  EXPECT_EQ(id.name, "bird");
  EXPECT_EQ(id.suffix, 2u);
  EXPECT_EQ(Identifier::parse("wfm#a-b").name, "a-b");
  EXPECT_EQ(Identifier::parse("thing").creator, "");
}

TEST(WellFormed, DefinitionWithBeliever) {
  Statement s = parse_sentence("u1#`any u1#bird is pm#agent of a pm#flight´");
  EXPECT_TRUE(check_well_formed(s).empty());
  s.believer = "u1";
  EXPECT_EQ(check_well_formed(s), std::vector<std::string>{"definition-has-believer"});
}

TEST(WellFormed, BeliefIsClean) {
  Statement s = parse_sentence("u1#`every u1#bird is agent of a flight´");
  EXPECT_TRUE(check_well_formed(s).empty());
}

TEST(WellFormed, InformalStatementWithTextBody) {
  Statement s = parse_sentence("u1#u2#\"birds fly\"");
  EXPECT_TRUE(check_well_formed(s).empty());
}

TEST(WellFormed, IndividualReferentMismatch) {
  Statement s = parse_sentence("u2#`Tweety can be agent of a flight´");
  Graph g = *s.graph();
  g.nodes[0].referent.reset();
  s.body = g;
  EXPECT_EQ(check_well_formed(s), std::vector<std::string>{"individual-referent-mismatch"});
}

TEST(Contextualization, UniversalBeliefWarns) {
  Statement s = parse_sentence("u1#`every bird can be agent of a flight´");
  EXPECT_EQ(contextualization_warnings(s).size(), 1u);
  Statement c = parse_sentence(
      "u1#`every bird can be agent of a flight in place europe in period 2000 to 2005´");
  EXPECT_TRUE(contextualization_warnings(c).empty());
}

TEST(Describe, Stable) {
  EditOutcome o = EditOutcome::reject(RejectReason::implicit_conflict, "",
                                      {Conflict{"u1#s1", ConflictKind::generalization}});
  EXPECT_EQ(describe(o), "rejected reason=implicit-conflict conflicts=u1#s1:generalization");
}
