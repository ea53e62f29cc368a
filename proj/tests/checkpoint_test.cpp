// Binary checkpoint format: round-trip fidelity, byte-level idempotence, and
// the malformed-file error taxonomy.

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kge/checkpoint.hpp"
#include "test_util.hpp"

using namespace kge;

TEST(Checkpoint, RoundTripPreservesShapeAndKind) {
    testutil::TempDir dir;
    for (ModelKind kind : kAllModelKinds) {
        const auto p = testutil::random_params(kind, 6, 3, 5, 11);
        const std::string path = dir.sub(to_string(kind) + ".ckpt");
        save_checkpoint(p, path);
        const auto q = load_checkpoint(path);
        EXPECT_EQ(q.kind, p.kind);
        EXPECT_EQ(q.dim, p.dim);
        EXPECT_EQ(q.n_entities, p.n_entities);
        EXPECT_EQ(q.n_relations, p.n_relations);
        ASSERT_EQ(q.entity.size(), p.entity.size());
        ASSERT_EQ(q.relation.size(), p.relation.size());
    }
}

TEST(Checkpoint, RoundTripScoreDeviationSmall) {
    testutil::TempDir dir;
    std::mt19937_64 rng(17);
    for (ModelKind kind : kAllModelKinds) {
        const auto p = testutil::random_params(kind, 20, 4, 12, rng());
        const std::string path = dir.sub("m.ckpt");
        save_checkpoint(p, path);
        const auto q = load_checkpoint(path);
        for (int i = 0; i < 100; ++i) {
            const Triple tr = testutil::random_triple(20, 4, rng);
            const double before = score(p, tr);
            const double after = score(q, tr);
            EXPECT_LE(std::abs(after - before), 1e-3 * (1.0 + std::abs(before)))
                << to_string(kind);
        }
    }
}

TEST(Checkpoint, SaveLoadSaveIsByteIdentical) {
    testutil::TempDir dir;
    for (ModelKind kind : {ModelKind::TransE_L1, ModelKind::RESCAL, ModelKind::ComplEx}) {
        const auto p = testutil::random_params(kind, 7, 2, 6, 23);
        const std::string first = dir.sub("first.ckpt");
        const std::string second = dir.sub("second.ckpt");
        save_checkpoint(p, first);
        save_checkpoint(load_checkpoint(first), second);
        EXPECT_EQ(testutil::read_file(first), testutil::read_file(second)) << to_string(kind);
    }
}

TEST(Checkpoint, HeaderLayoutIsStable) {
    testutil::TempDir dir;
    const auto p = testutil::random_params(ModelKind::DistMult, 3, 2, 4, 29);
    const std::string path = dir.sub("m.ckpt");
    save_checkpoint(p, path);
    const std::string bytes = testutil::read_file(path);
    ASSERT_GE(bytes.size(), kCheckpointHeaderBytes);
    EXPECT_EQ(bytes.substr(0, 4), "KGE1");
    EXPECT_EQ(static_cast<unsigned char>(bytes[4]), model_code(ModelKind::DistMult));
    EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 3);   // n_entities LSB
    EXPECT_EQ(static_cast<unsigned char>(bytes[16]), 2);  // n_relations LSB
    EXPECT_EQ(static_cast<unsigned char>(bytes[24]), 4);  // dim LSB
    EXPECT_EQ(bytes.size(), kCheckpointHeaderBytes + 4u * (3 * 4 + 2 * 4));
}

TEST(Checkpoint, MissingFileThrowsIoError) {
    EXPECT_THROW(load_checkpoint("/nonexistent/m.ckpt"), IoError);
}

TEST(Checkpoint, WrongMagicRejected) {
    testutil::TempDir dir;
    const auto p = testutil::random_params(ModelKind::DistMult, 3, 2, 4, 31);
    const std::string path = dir.sub("m.ckpt");
    save_checkpoint(p, path);
    std::string bytes = testutil::read_file(path);
    bytes[0] = 'X';
    testutil::write_file(path, bytes);
    EXPECT_THROW(load_checkpoint(path), BadMagicError);
}

TEST(Checkpoint, TinyFileRejectedAsBadMagic) {
    testutil::TempDir dir;
    const std::string path = dir.sub("m.ckpt");
    testutil::write_file(path, "KG");
    EXPECT_THROW(load_checkpoint(path), BadMagicError);
}

TEST(Checkpoint, HeaderOnlyPrefixIsTruncated) {
    testutil::TempDir dir;
    const std::string path = dir.sub("m.ckpt");
    testutil::write_file(path, std::string("KGE1") + std::string(10, '\0'));
    EXPECT_THROW(load_checkpoint(path), TruncatedError);
}

TEST(Checkpoint, OneByteShortPayloadIsTruncated) {
    testutil::TempDir dir;
    const auto p = testutil::random_params(ModelKind::ComplEx, 3, 2, 4, 37);
    const std::string path = dir.sub("m.ckpt");
    save_checkpoint(p, path);
    std::string bytes = testutil::read_file(path);
    bytes.pop_back();
    testutil::write_file(path, bytes);
    EXPECT_THROW(load_checkpoint(path), TruncatedError);
}

TEST(Checkpoint, RescalHeaderOverDistmultPayloadIsSizeMismatch) {
    // Rewriting the kind byte turns a DistMult file into one whose header
    // promises n_relations * dim^2 relation floats; the payload length no
    // longer matches (whole words, so this is a size error, not truncation).
    testutil::TempDir dir;
    const auto p = testutil::random_params(ModelKind::DistMult, 3, 2, 4, 41);
    const std::string path = dir.sub("m.ckpt");
    save_checkpoint(p, path);
    std::string bytes = testutil::read_file(path);
    bytes[4] = static_cast<char>(model_code(ModelKind::RESCAL));
    testutil::write_file(path, bytes);
    try {
        load_checkpoint(path);
        FAIL() << "expected SizeMismatchError";
    } catch (const SizeMismatchError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("floats"), std::string::npos);
    }
}

TEST(Checkpoint, EmptyModelHeaderRejected) {
    testutil::TempDir dir;
    const auto p = testutil::random_params(ModelKind::DistMult, 3, 2, 4, 43);
    const std::string path = dir.sub("m.ckpt");
    save_checkpoint(p, path);
    std::string bytes = testutil::read_file(path);
    bytes[24] = bytes[25] = bytes[26] = bytes[27] = '\0';  // dim = 0
    testutil::write_file(path, bytes);
    EXPECT_THROW(load_checkpoint(path), SizeMismatchError);
}

TEST(Checkpoint, QuantizationIsExactlyF32) {
    testutil::TempDir dir;
    auto p = testutil::random_params(ModelKind::TransE_L2, 4, 2, 3, 47);
    p.entity[0] = 0.1;  // not representable in f32
    const std::string path = dir.sub("m.ckpt");
    save_checkpoint(p, path);
    const auto q = load_checkpoint(path);
    EXPECT_EQ(q.entity[0], static_cast<double>(static_cast<float>(0.1)));
    EXPECT_NE(q.entity[0], 0.1);
}

TEST(MetaSidecar, RoundTrip) {
    testutil::TempDir dir;
    const std::map<std::string, std::string> kv{
        {"epoch", "42"}, {"loss", "0.125"}, {"model", "rescal"}};
    write_meta(dir.sub("m.ckpt.meta"), kv);
    EXPECT_EQ(read_meta(dir.sub("m.ckpt.meta")), kv);
}

TEST(MetaSidecar, IgnoresBlankAndMalformedLines) {
    testutil::TempDir dir;
    testutil::write_file(dir.sub("m.meta"), "a=1\n\nnot a pair\nb=x=y\n");
    const auto kv = read_meta(dir.sub("m.meta"));
    EXPECT_EQ(kv.size(), 2u);
    EXPECT_EQ(kv.at("a"), "1");
    EXPECT_EQ(kv.at("b"), "x=y");
}
