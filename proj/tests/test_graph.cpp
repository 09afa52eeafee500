#include "support.hpp"

#include <gtest/gtest.h>

using namespace dialam;
using dialam::test::Builder;

namespace {

constexpr const char* kFixtureDoc = R"({
  "nodes": [
    {"nodeID": "L1", "text": "we should act", "type": "L", "timestamp": "2019-05-02 11:20:00"},
    {"nodeID": "I1", "text": "we should act", "type": "I"},
    {"nodeID": "YA1", "text": "Asserting", "type": "YA"}
  ],
  "edges": [
    {"edgeID": "E1", "fromID": "L1", "toID": "YA1"},
    {"edgeID": "E2", "fromID": "YA1", "toID": "I1"}
  ],
  "locutions": [{"personID": "7", "nodeID": "L1"}]
})";

Error parse_error(std::string_view doc)
{
    try {
        parse_nodeset(doc);
    } catch (const Error& e) {
        return e;
    }
    ADD_FAILURE() << "document parsed";
    return Error(ErrorCode::MalformedDocument, "", "");
}

} // namespace

TEST(ParseNodeset, EmptyDocument)
{
    auto ns = parse_nodeset(R"({"nodes": [], "edges": []})");
    EXPECT_TRUE(ns.nodes().empty());
    EXPECT_TRUE(ns.edges().empty());
    EXPECT_FALSE(ns.locutions());
}

TEST(ParseNodeset, FixtureFields)
{
    auto ns = parse_nodeset(kFixtureDoc, "nodeset1");
    ASSERT_EQ(ns.nodes().size(), 3u);
    ASSERT_EQ(ns.edges().size(), 2u);
    EXPECT_EQ(ns.at(0).id, "L1");
    EXPECT_EQ(ns.at(0).kind, NodeKind::L);
    EXPECT_EQ(ns.at(0).timestamp, "2019-05-02 11:20:00");
    EXPECT_EQ(ns.at(1).kind, NodeKind::I);
    EXPECT_EQ(ns.at(1).text, "we should act");
    EXPECT_EQ(ns.at(2).kind, NodeKind::YA);
    EXPECT_EQ(ns.at(2).text, "Asserting");
    EXPECT_EQ(ns.edges()[0].from, "L1");
    EXPECT_EQ(ns.edges()[1].to, "I1");
    ASSERT_TRUE(ns.locutions());
    EXPECT_EQ((*ns.locutions())[0]["personID"], "7");
}

TEST(ParseNodeset, Errors)
{
    EXPECT_EQ(parse_error("{\"nodes\": [").code(), ErrorCode::MalformedDocument);

    auto dangling = parse_error(R"({"nodes": [{"nodeID": "I1", "text": "p", "type": "I"}],
                                   "edges": [{"edgeID": "E1", "fromID": "I1", "toID": "X9"}]})");
    EXPECT_EQ(dangling.code(), ErrorCode::DanglingEdgeEndpoint);
    EXPECT_EQ(dangling.subject(), "X9");

    auto kind = parse_error(R"({"nodes": [{"nodeID": "P1", "text": "x", "type": "PA"}], "edges": []})");
    EXPECT_EQ(kind.code(), ErrorCode::UnknownNodeKind);
    EXPECT_EQ(kind.subject(), "P1");

    auto lower = parse_error(R"({"nodes": [{"nodeID": "I1", "text": "x", "type": "i"}], "edges": []})");
    EXPECT_EQ(lower.code(), ErrorCode::UnknownNodeKind);

    auto dup = parse_error(R"({"nodes": [{"nodeID": "I1", "text": "x", "type": "I"},
                                         {"nodeID": "I1", "text": "y", "type": "I"}], "edges": []})");
    EXPECT_EQ(dup.code(), ErrorCode::DuplicateNodeId);
    EXPECT_EQ(dup.subject(), "I1");

    auto loop = parse_error(R"({"nodes": [{"nodeID": "I1", "text": "x", "type": "I"}],
                               "edges": [{"edgeID": "E1", "fromID": "I1", "toID": "I1"}]})");
    EXPECT_EQ(loop.code(), ErrorCode::MalformedDocument);

    auto empty_text = parse_error(R"({"nodes": [{"nodeID": "L1", "text": "", "type": "L"}], "edges": []})");
    EXPECT_EQ(empty_text.subject(), "L1");
}

TEST(ParseNodeset, NumericIdsAccepted)
{
    auto ns = parse_nodeset(R"({"nodes": [{"nodeID": 5, "text": "x", "type": "I"},
                                          {"nodeID": 6, "text": "y", "type": "I"},
                                          {"nodeID": 7, "text": "Default Inference", "type": "RA"}],
                               "edges": [{"edgeID": 1, "fromID": 5, "toID": 7}, {"edgeID": 2, "fromID": 7, "toID": 6}]})");
    EXPECT_EQ(ns.at(0).id, "5");
    EXPECT_EQ(ns.edges()[1].to, "6");
}

TEST(SerializeNodeset, EmptyCanonical)
{
    EXPECT_EQ(serialize_nodeset(Nodeset()), "{\n  \"nodes\": [],\n  \"edges\": []\n}\n");
}

TEST(SerializeNodeset, RoundTripPreservesExtrasAndLocutions)
{
    auto ns = parse_nodeset(R"({"AIF": {"v": 1}, "nodes": [{"nodeID": "I1", "text": "é ok", "type": "I", "scheme": 3}],
                               "edges": [], "locutions": [{"personID": 1, "nodeID": "I1", "start": null}]})");
    const auto doc = serialize_nodeset(ns);
    const auto again = parse_nodeset(doc);
    EXPECT_EQ(again, ns);
    EXPECT_EQ(*again.locutions(), *ns.locutions());
    EXPECT_EQ(again.at(0).extra["scheme"], 3);
    EXPECT_EQ(again.extra()["AIF"]["v"], 1);
    EXPECT_EQ(serialize_nodeset(again), doc);
}

TEST(SerializeNodeset, CanonicalKeyOrder)
{
    const auto doc = serialize_nodeset(parse_nodeset(kFixtureDoc));
    EXPECT_LT(doc.find("\"nodes\""), doc.find("\"edges\""));
    EXPECT_LT(doc.find("\"edges\""), doc.find("\"locutions\""));
    EXPECT_LT(doc.find("\"nodeID\""), doc.find("\"text\""));
    EXPECT_LT(doc.find("\"text\""), doc.find("\"type\""));
    EXPECT_LT(doc.find("\"type\""), doc.find("\"timestamp\""));
}

TEST(SerializeNodeset, RoundTripProperty)
{
    std::mt19937_64 rng(11);
    for (int i = 0; i < 300; ++i) {
        const auto ns = test::random_valid_nodeset(rng);
        const auto doc = serialize_nodeset(ns);
        const auto back = parse_nodeset(doc);
        ASSERT_EQ(back, ns);
        ASSERT_EQ(serialize_nodeset(back), doc);
    }
}

TEST(Validate, FixtureIsValid)
{
    EXPECT_TRUE(validate(parse_nodeset(kFixtureDoc)).empty());
}

TEST(Validate, YaWithTwoOutgoingEdges)
{
    auto ns = Builder()
                  .node("L1", NodeKind::L, "a")
                  .node("I1", NodeKind::I, "p")
                  .node("I2", NodeKind::I, "q")
                  .node("YA1", NodeKind::YA, "Asserting")
                  .link("L1", "YA1", "I1")
                  .edge("YA1", "I2")
                  .build();
    const auto v = validate(ns);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].code, ViolationCode::YaArity);
    EXPECT_EQ(v[0].id, "YA1");
}

TEST(Validate, TaAnchoredAssertingOnRa)
{
    auto ns = Builder()
                  .node("L1", NodeKind::L, "why?")
                  .node("L2", NodeKind::L, "because X")
                  .node("TA1", NodeKind::TA, "Default Transition")
                  .node("I1", NodeKind::I, "p")
                  .node("I2", NodeKind::I, "q")
                  .node("RA1", NodeKind::RA, "Default Inference")
                  .node("YA1", NodeKind::YA, "Asserting")
                  .link("L1", "TA1", "L2")
                  .link("I1", "RA1", "I2")
                  .link("TA1", "YA1", "RA1")
                  .build();
    const auto v = validate(ns);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].code, ViolationCode::YaIllegalLabel);
    EXPECT_EQ(v[0].id, "YA1");
}

TEST(Validate, EachRule)
{
    auto ns = Builder()
                  .node("I1", NodeKind::I, "p")
                  .node("I2", NodeKind::I, "q")
                  .node("L1", NodeKind::L, "a")
                  .node("L2", NodeKind::L, "b")
                  .node("RA1", NodeKind::RA, "Default Inference") // no conclusion: V1
                  .node("TA1", NodeKind::TA, "Default Transition") // no outgoing L: V2
                  .node("YA1", NodeKind::YA, "Agreeing")           // L-anchored Agreeing: V4
                  .node("YA2", NodeKind::YA, "Asserting")          // targets a TA: V3
                  .edge("I1", "RA1")
                  .edge("L1", "TA1")
                  .link("L1", "YA1", "I1")
                  .link("L2", "YA2", "TA1")
                  .edge("I1", "I2") // V5
                  .edge("L1", "L2") // V5
                  .build();
    const auto v = validate(ns);
    std::vector<std::pair<ViolationCode, std::string>> got;
    for (const auto& x : v)
        got.emplace_back(x.code, x.id);
    const std::vector<std::pair<ViolationCode, std::string>> want = {
        {ViolationCode::SNodeUnanchored, "RA1"}, {ViolationCode::TaUnanchored, "TA1"},
        {ViolationCode::YaIllegalLabel, "YA1"},  {ViolationCode::YaArity, "YA2"},
        {ViolationCode::SameKindEdge, "e7"},     {ViolationCode::SameKindEdge, "e8"},
    };
    EXPECT_EQ(got, want);
    EXPECT_EQ(validate(ns), v);
}

TEST(Validate, LegalityTable)
{
    EXPECT_TRUE(is_legal_ya(YaLabel::Challenging, NodeKind::L, NodeKind::I));
    EXPECT_TRUE(is_legal_ya(YaLabel::Challenging, NodeKind::TA, NodeKind::I));
    EXPECT_FALSE(is_legal_ya(YaLabel::Challenging, NodeKind::TA, NodeKind::CA));
    EXPECT_TRUE(is_legal_ya(YaLabel::Disagreeing, NodeKind::TA, NodeKind::CA));
    EXPECT_TRUE(is_legal_ya(YaLabel::Disagreeing, NodeKind::TA, NodeKind::I));
    EXPECT_FALSE(is_legal_ya(YaLabel::Asserting, NodeKind::L, NodeKind::RA));
    EXPECT_FALSE(is_legal_ya(YaLabel::None, NodeKind::L, NodeKind::I));
    EXPECT_TRUE(legal_ya_labels(NodeKind::L, NodeKind::MA).empty());
}

TEST(Validate, RandomValidNodesetsPass)
{
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
        const auto ns = test::random_valid_nodeset(rng);
        ASSERT_TRUE(validate(ns).empty()) << serialize_nodeset(ns);
        // Queries never throw on valid input and count every node.
        ASSERT_EQ(ya_anchorings(ns).size(), ns.count(NodeKind::YA));
        ASSERT_EQ(s_node_structures(ns).size(),
                  ns.count(NodeKind::RA) + ns.count(NodeKind::CA) + ns.count(NodeKind::MA));
    }
}

TEST(SNodeStructures, SinglePremise)
{
    auto ns = Builder()
                  .node("I1", NodeKind::I, "p")
                  .node("I2", NodeKind::I, "q")
                  .node("RA1", NodeKind::RA, "Default Inference")
                  .link("I1", "RA1", "I2")
                  .build();
    const auto s = s_node_structures(ns);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0], (SNodeStructure{"RA1", SKind::RA, {"I1"}, {"I2"}}));
}

TEST(SNodeStructures, TwoPremises)
{
    auto ns = Builder()
                  .node("I1", NodeKind::I, "p")
                  .node("I2", NodeKind::I, "q")
                  .node("I3", NodeKind::I, "r")
                  .node("RA1", NodeKind::RA, "Default Inference")
                  .edge("I1", "RA1")
                  .edge("I2", "RA1")
                  .edge("RA1", "I3")
                  .build();
    EXPECT_EQ(s_node_structures(ns), (std::vector<SNodeStructure>{{"RA1", SKind::RA, {"I1", "I2"}, {"I3"}}}));
}

TEST(SNodeStructures, NoneAndInvalid)
{
    EXPECT_TRUE(s_node_structures(test::asserting_fixture()).empty());
    auto bad = Builder().node("I1", NodeKind::I, "p").node("CA1", NodeKind::CA, "x").edge("I1", "CA1").build();
    try {
        s_node_structures(bad);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidStructure);
        EXPECT_EQ(e.subject(), "CA1");
    }
}

TEST(YaAnchorings, Fixture)
{
    EXPECT_EQ(ya_anchorings(test::asserting_fixture()),
              (std::vector<YaAnchoring>{{"YA1", "Asserting", "L1", NodeKind::L, "I1", NodeKind::I}}));
}

TEST(YaAnchorings, TransitionToRelation)
{
    auto ns = Builder()
                  .node("L1", NodeKind::L, "a")
                  .node("L2", NodeKind::L, "b")
                  .node("TA1", NodeKind::TA, "Default Transition")
                  .node("I1", NodeKind::I, "p")
                  .node("I2", NodeKind::I, "q")
                  .node("RA1", NodeKind::RA, "Default Inference")
                  .node("YA2", NodeKind::YA, "Arguing")
                  .link("L1", "TA1", "L2")
                  .link("I1", "RA1", "I2")
                  .link("TA1", "YA2", "RA1")
                  .build();
    EXPECT_EQ(ya_anchorings(ns),
              (std::vector<YaAnchoring>{{"YA2", "Arguing", "TA1", NodeKind::TA, "RA1", NodeKind::RA}}));
}

TEST(YaAnchorings, EmptyAndInvalid)
{
    auto none = Builder().node("I1", NodeKind::I, "p").build();
    EXPECT_TRUE(ya_anchorings(none).empty());
    auto bad = Builder().node("I1", NodeKind::I, "p").node("YA1", NodeKind::YA, "Asserting").edge("YA1", "I1").build();
    EXPECT_THROW(ya_anchorings(bad), Error);
    EXPECT_TRUE(ya_anchorings_lenient(bad).empty());
}

TEST(TaContext, BeforeAndAfter)
{
    auto ns = Builder()
                  .node("L1", NodeKind::L, "why?")
                  .node("L2", NodeKind::L, "because X")
                  .node("TA1", NodeKind::TA, "Default Transition")
                  .link("L1", "TA1", "L2")
                  .build();
    EXPECT_EQ(ta_context(ns, "TA1"), (TaContext{"why?", "because X"}));
}

TEST(TaContext, MultipleIncomingJoined)
{
    auto ns = Builder()
                  .node("La", NodeKind::L, "a")
                  .node("Lb", NodeKind::L, "b")
                  .node("Lc", NodeKind::L, "c")
                  .node("TA1", NodeKind::TA, "Default Transition")
                  .edge("La", "TA1")
                  .edge("Lb", "TA1")
                  .edge("TA1", "Lc")
                  .build();
    EXPECT_EQ(ta_context(ns, "TA1").before, "a || b");
}

TEST(TaContext, Errors)
{
    auto ns = test::asserting_fixture();
    try {
        ta_context(ns, "I1");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotATaNode);
    }
    auto lonely = Builder().node("L1", NodeKind::L, "a").node("TA1", NodeKind::TA, "t").edge("L1", "TA1").build();
    try {
        ta_context(lonely, "TA1");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidStructure);
    }
}

TEST(SContext, PremisesThenConclusions)
{
    auto ns = Builder()
                  .node("I1", NodeKind::I, "p")
                  .node("I2", NodeKind::I, "q")
                  .node("I3", NodeKind::I, "r")
                  .node("RA1", NodeKind::RA, "Default Inference")
                  .node("MA1", NodeKind::MA, "Default Rephrase")
                  .edge("I1", "RA1")
                  .edge("I3", "RA1")
                  .edge("RA1", "I2")
                  .link("I1", "MA1", "I2")
                  .build();
    EXPECT_EQ(s_context(ns, "MA1"), (std::vector<std::string>{"p", "q"}));
    EXPECT_EQ(s_context(ns, "RA1"), (std::vector<std::string>{"p", "r", "q"}));
}

TEST(SContext, NotAnSNode)
{
    try {
        s_context(test::asserting_fixture(), "YA1");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotAnSNode);
    }
}
