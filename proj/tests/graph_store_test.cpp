// Parsing, vocabulary construction, splitting, and the true-triple index.

#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <random>
#include <set>
#include <sstream>

#include "kge/graph.hpp"
#include "kge/vocab.hpp"
#include "test_util.hpp"

using namespace kge;

namespace {

std::vector<RawTriple> parse_text(const std::string& text) {
    std::istringstream in(text);
    return parse_triples(in, "test.tsv");
}

}  // namespace

TEST(ParseTriples, SingleLine) {
    const auto out = parse_text(
        "Compound::DB00811\tGNBR::T::Compound:Disease\tDisease::MESH:D045169\n");
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].head, "Compound::DB00811");
    EXPECT_EQ(out[0].relation, "GNBR::T::Compound:Disease");
    EXPECT_EQ(out[0].tail, "Disease::MESH:D045169");
}

TEST(ParseTriples, EmptyFileGivesEmptyList) {
    EXPECT_TRUE(parse_text("").empty());
}

TEST(ParseTriples, TwoFieldsIsAnErrorAtLine1) {
    try {
        parse_text("a\tb\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 1u);
        EXPECT_NE(std::string(e.what()).find(":1:"), std::string::npos);
    }
}

TEST(ParseTriples, FourFieldsIsAnError) {
    EXPECT_THROW(parse_text("a\tb\tc\td\n"), ParseError);
}

TEST(ParseTriples, ErrorCarriesLaterLineNumber) {
    try {
        parse_text("a\tr\tb\na\tr\tb\nbroken line\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(ParseTriples, BlankLinesSkippedAndOrderKept) {
    const auto out = parse_text("a\tr\tb\n\n   \nc\tr\td\n");
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].head, "a");
    EXPECT_EQ(out[1].head, "c");
}

TEST(ParseTriples, CrLfAndTrailingWhitespaceAccepted) {
    const auto out = parse_text("a\tr\tb\r\nc \tr\t d \r\n");
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].tail, "b");
    EXPECT_EQ(out[1].head, "c");
    EXPECT_EQ(out[1].tail, " d");  // leading space survives, trailing stripped
}

TEST(ParseTriples, DuplicateLinesPreserved) {
    EXPECT_EQ(parse_text("a\tr\tb\na\tr\tb\n").size(), 2u);
}

TEST(ParseTriples, MissingTrailingNewlineOk) {
    EXPECT_EQ(parse_text("a\tr\tb").size(), 1u);
}

TEST(ParseTriples, EmptyFieldRejected) {
    EXPECT_THROW(parse_text("a\t\tb\n"), ParseError);
}

TEST(ParseTriples, InvalidUtf8Rejected) {
    std::string bad = "a\tr\tb";
    bad += static_cast<char>(0xFF);
    bad += "\n";
    EXPECT_THROW(parse_text(bad), ParseError);
}

TEST(ParseTriples, MultibyteUtf8Accepted) {
    const auto out = parse_text("caf\xC3\xA9\tr\tna\xC3\xAFve\n");
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].head, "caf\xC3\xA9");
}

// ---------------------------------------------------------------------------

TEST(BuildVocab, FirstSeenOrderScanningHeadThenTail) {
    const std::vector<RawTriple> raws{{"A", "r1", "B"}, {"B", "r1", "A"}};
    const auto vocab = build_vocab(raws);
    EXPECT_EQ(vocab.entity_id("A"), 0u);
    EXPECT_EQ(vocab.entity_id("B"), 1u);
    EXPECT_EQ(vocab.relation_id("r1"), 0u);
    EXPECT_EQ(vocab.n_entities(), 2u);
    EXPECT_EQ(vocab.n_relations(), 1u);
}

TEST(BuildVocab, TailSeenBeforeOtherHeads) {
    const std::vector<RawTriple> raws{{"A", "r", "Z"}, {"B", "r", "A"}};
    const auto vocab = build_vocab(raws);
    EXPECT_EQ(vocab.entity_id("A"), 0u);
    EXPECT_EQ(vocab.entity_id("Z"), 1u);
    EXPECT_EQ(vocab.entity_id("B"), 2u);
}

TEST(BuildVocab, EmptyCorpus) {
    const auto vocab = build_vocab(std::vector<RawTriple>{});
    EXPECT_EQ(vocab.n_entities(), 0u);
    EXPECT_EQ(vocab.n_relations(), 0u);
}

TEST(BuildVocab, SelfLoopSingleEntity) {
    const std::vector<RawTriple> raws{{"A", "r1", "A"}};
    const auto vocab = build_vocab(raws);
    EXPECT_EQ(vocab.n_entities(), 1u);
}

TEST(BuildVocab, RoundTripIdentity) {
    const std::vector<RawTriple> raws{{"A", "r", "B"}, {"C", "s", "A"}};
    const auto vocab = build_vocab(raws);
    for (std::uint32_t i = 0; i < vocab.n_entities(); ++i)
        EXPECT_EQ(vocab.entity_id(vocab.entity_name(i)), i);
    for (std::uint32_t i = 0; i < vocab.n_relations(); ++i)
        EXPECT_EQ(vocab.relation_id(vocab.relation_name(i)), i);
}

// ---------------------------------------------------------------------------

TEST(Encode, TranslatesToIds) {
    const std::vector<RawTriple> raws{{"A", "r1", "B"}};
    const auto vocab = build_vocab(raws);
    const auto out = encode(raws, vocab);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0], (Triple{0, 0, 1}));
}

TEST(Encode, UnknownNameErrorNamesTheString) {
    const std::vector<RawTriple> raws{{"A", "r1", "B"}};
    const auto vocab = build_vocab(raws);
    const std::vector<RawTriple> bad{{"Z", "r1", "B"}};
    try {
        encode(bad, vocab);
        FAIL() << "expected LookupError";
    } catch (const LookupError& e) {
        EXPECT_NE(std::string(e.what()).find("Z"), std::string::npos);
    }
}

TEST(Encode, EmptyList) {
    const auto vocab = build_vocab(std::vector<RawTriple>{});
    EXPECT_TRUE(encode(std::vector<RawTriple>{}, vocab).empty());
}

TEST(Encode, DecodeRoundTrip) {
    const std::vector<RawTriple> raws{{"A", "r", "B"}, {"B", "s", "C"}, {"C", "r", "A"}};
    const auto vocab = build_vocab(raws);
    const auto encoded = encode(raws, vocab);
    for (std::size_t i = 0; i < raws.size(); ++i)
        EXPECT_EQ(decode(encoded[i], vocab), raws[i]);
}

// ---------------------------------------------------------------------------

TEST(EntityType, PrefixBeforeDoubleColon) {
    EXPECT_EQ(entity_type("Compound::DB00811"), "Compound");
    EXPECT_EQ(entity_type("Disease::SARS-CoV2 E"), "Disease");
}

TEST(EntityType, NoSeparatorIsUnknown) {
    EXPECT_EQ(entity_type("plainname"), "Unknown");
}

TEST(EntityType, EmptyPrefix) {
    EXPECT_EQ(entity_type("::x"), "");
}

// ---------------------------------------------------------------------------

namespace {

std::vector<Triple> make_triples(std::size_t n) {
    std::vector<Triple> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back({static_cast<std::uint32_t>(i), 0, static_cast<std::uint32_t>(i + 1)});
    return out;
}

}  // namespace

TEST(SplitTriples, RoundedSizes) {
    const auto split = split_triples(make_triples(10), {0.8, 0.1, 0.1}, 7);
    EXPECT_EQ(split.train.size(), 8u);
    EXPECT_EQ(split.valid.size(), 1u);
    EXPECT_EQ(split.test.size(), 1u);
}

TEST(SplitTriples, Deterministic) {
    const auto triples = make_triples(50);
    const auto a = split_triples(triples, {0.9, 0.05, 0.05}, 123);
    const auto b = split_triples(triples, {0.9, 0.05, 0.05}, 123);
    EXPECT_EQ(a.train, b.train);
    EXPECT_EQ(a.valid, b.valid);
    EXPECT_EQ(a.test, b.test);
}

TEST(SplitTriples, DifferentSeedsDiffer) {
    const auto triples = make_triples(50);
    const auto a = split_triples(triples, {0.9, 0.05, 0.05}, 1);
    const auto b = split_triples(triples, {0.9, 0.05, 0.05}, 2);
    EXPECT_NE(a.train, b.train);
}

TEST(SplitTriples, DedupBeforePartition) {
    auto triples = make_triples(5);
    triples.push_back(triples[0]);
    triples.push_back(triples[1]);
    triples.push_back(triples[2]);  // 8 lines, 5 unique
    const auto split = split_triples(triples, {0.6, 0.2, 0.2}, 3);
    EXPECT_EQ(split.train.size() + split.valid.size() + split.test.size(), 5u);
}

TEST(SplitTriples, PartitionIsDisjointAndComplete) {
    const auto triples = make_triples(40);
    const auto split = split_triples(triples, {0.5, 0.25, 0.25}, 11);
    std::set<std::array<std::uint32_t, 3>> seen;
    for (const auto* part : {&split.train, &split.valid, &split.test})
        for (const auto& tr : *part)
            EXPECT_TRUE(seen.insert({tr.h, tr.r, tr.t}).second);
    EXPECT_EQ(seen.size(), triples.size());
}

TEST(SplitTriples, RatiosMustSumToOne) {
    EXPECT_THROW(split_triples(make_triples(10), {0.5, 0.2, 0.2}, 1), ConfigError);
}

TEST(SplitTriples, RatiosMustBePositive) {
    EXPECT_THROW(split_triples(make_triples(10), {1.0, 0.0, 0.0}, 1), ConfigError);
    EXPECT_THROW(split_triples(make_triples(10), {1.2, -0.1, -0.1}, 1), ConfigError);
}

TEST(SplitTriples, DegenerateEmptyPartWarnsButSucceeds) {
    std::string warning;
    const auto split = split_triples(make_triples(3), {0.9, 0.05, 0.05}, 5, &warning);
    EXPECT_EQ(split.train.size() + split.valid.size() + split.test.size(), 3u);
    EXPECT_FALSE(warning.empty());
}

// ---------------------------------------------------------------------------

TEST(FilterIndexTest, ContainsExactlyTheUnion) {
    Split split;
    split.train = {{0, 0, 1}};
    split.valid = {{1, 0, 2}};
    split.test = {{2, 1, 0}};
    const FilterIndex idx(split);
    EXPECT_TRUE(idx.contains({0, 0, 1}));
    EXPECT_TRUE(idx.contains({1, 0, 2}));
    EXPECT_TRUE(idx.contains({2, 1, 0}));
    EXPECT_FALSE(idx.contains({1, 0, 0}));
    EXPECT_EQ(idx.size(), 3u);
}

TEST(FilterIndexTest, EmptyContainsNothing) {
    const FilterIndex idx;
    EXPECT_FALSE(idx.contains({0, 0, 0}));
    EXPECT_EQ(idx.size(), 0u);
}

TEST(FilterIndexTest, MatchesNaiveSetOnRandomCorpora) {
    std::mt19937_64 rng(2024);
    for (int round = 0; round < 20; ++round) {
        Split split;
        std::set<std::array<std::uint32_t, 3>> naive;
        std::uniform_int_distribution<std::uint32_t> id(0, 9);
        for (int i = 0; i < 60; ++i) {
            const Triple tr{id(rng), id(rng) % 3, id(rng)};
            split.train.push_back(tr);
            naive.insert({tr.h, tr.r, tr.t});
        }
        const FilterIndex idx(split);
        for (std::uint32_t h = 0; h < 10; ++h)
            for (std::uint32_t r = 0; r < 3; ++r)
                for (std::uint32_t t = 0; t < 10; ++t)
                    EXPECT_EQ(idx.contains({h, r, t}), naive.count({h, r, t}) == 1);
    }
}

// ---------------------------------------------------------------------------

TEST(DictFiles, WriteReadRoundTrip) {
    testutil::TempDir dir;
    const std::vector<std::string> names{"Compound::A", "Gene::B", "plain"};
    write_dict(dir.sub("e.dict"), names);
    EXPECT_EQ(read_dict(dir.sub("e.dict")), names);
}

TEST(DictFiles, RejectsNonDenseIds) {
    testutil::TempDir dir;
    testutil::write_file(dir.sub("bad.dict"), "a\t0\nb\t2\n");
    EXPECT_THROW(read_dict(dir.sub("bad.dict")), ParseError);
}

TEST(DictFiles, NamesMayContainSpaces) {
    testutil::TempDir dir;
    const std::vector<std::string> names{"Disease::SARS-CoV2 E"};
    write_dict(dir.sub("e.dict"), names);
    EXPECT_EQ(read_dict(dir.sub("e.dict")), names);
}

TEST(TripleFiles, WriteReadRoundTrip) {
    testutil::TempDir dir;
    const std::vector<RawTriple> raws{{"A", "r", "B"}, {"B", "s", "C"}};
    const auto vocab = build_vocab(raws);
    const auto triples = encode(raws, vocab);
    write_triples(dir.sub("t.tsv"), triples, vocab);
    EXPECT_EQ(read_triples(dir.sub("t.tsv"), vocab), triples);
}

TEST(Fixtures, ToyKgParsesCleanly) {
    const auto raws = parse_triples_file(testutil::fixture("toy_kg.tsv"));
    EXPECT_EQ(raws.size(), 90u);
    const auto vocab = build_vocab(raws);
    EXPECT_EQ(vocab.n_entities(), 120u);
    EXPECT_EQ(vocab.n_relations(), 4u);
    EXPECT_EQ(entity_type(vocab.entity_name(0)),
              entity_type("Compound::X"));  // typed names present
}

TEST(Fixtures, TinyKgShape) {
    const auto raws = parse_triples_file(testutil::fixture("tiny_kg.tsv"));
    EXPECT_EQ(raws.size(), 16u);
    const auto vocab = build_vocab(raws);
    EXPECT_EQ(vocab.n_entities(), 8u);
    EXPECT_EQ(vocab.n_relations(), 2u);
}
