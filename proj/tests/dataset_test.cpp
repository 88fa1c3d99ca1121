#include <gtest/gtest.h>

#include "ronpaint/dataset.hpp"

using namespace ronpaint;

namespace {

PatternSet two_patterns() { return make_pattern_set({{"chain5", "C-C-C-C-C"}, {"ene", "C=C"}}); }

}  // namespace

TEST(Dataset, ThresholdIsInclusive) {
    EXPECT_EQ(classify_ron(94.4), RonClass::high);
    EXPECT_EQ(classify_ron(94.39999), RonClass::low);
    auto recs = parse_dataset_csv("name,smiles,ron,label\nboundary,CCCCC,94.4,\n");
    auto data = build_dataset(recs, two_patterns());
    EXPECT_EQ(data.row(0).label, RonClass::high);
    EXPECT_EQ(data.row(0).measured_ron, 94.4);
}

TEST(Dataset, ParsesQuotedNamesAndLabels) {
    auto recs = parse_dataset_csv(
        "name,smiles,ron,label\r\n\"2,2,4-trimethylpentane\",CC(C)CC(C)(C)C,100,high\npentene,C=CCCC,,low\n");
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_EQ(recs[0].name, "2,2,4-trimethylpentane");
    EXPECT_EQ(recs[1].label, RonClass::low);
    EXPECT_FALSE(recs[1].ron.has_value());
    auto data = build_dataset(recs, two_patterns());
    EXPECT_EQ(data.size(), 2u);
    EXPECT_EQ(data.n_features(), 2u);
    EXPECT_EQ(data.row(1).fingerprint.bits, (std::vector<std::uint8_t>{0, 1}));
    EXPECT_EQ(data.count(RonClass::high), 1u);
}

TEST(Dataset, RejectsBadRowsListingAllOfThem) {
    EXPECT_THROW(parse_dataset_csv("name,smiles\nx,C\n"), InputError);
    EXPECT_THROW(parse_dataset_csv(""), InputError);
    try {
        parse_dataset_csv("name,smiles,ron,label\na,C,,\nb,C,abc,\nc,C,90,high\nd,C,,medium\n");
        FAIL();
    } catch (const InputError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("line 2"), std::string::npos);
        EXPECT_NE(msg.find("line 3"), std::string::npos);
        EXPECT_NE(msg.find("line 4"), std::string::npos);
        EXPECT_NE(msg.find("line 5"), std::string::npos);
    }
    auto recs = parse_dataset_csv("name,smiles,ron,label\nok,CCO,,low\nstereo,C/C=C/C,,high\nbad,C1CC,,low\n");
    try {
        build_dataset(recs, two_patterns());
        FAIL();
    } catch (const InputError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("stereo"), std::string::npos);
        EXPECT_NE(msg.find("line 3"), std::string::npos);
        EXPECT_NE(msg.find("line 4"), std::string::npos);
        EXPECT_EQ(msg.find("line 2"), std::string::npos);
    }
}

TEST(Dataset, MixedPatternSetsRejected) {
    Dataset d;
    DatasetRow a;
    a.fingerprint = {{1, 0}, "set-a"};
    d.add(a);
    DatasetRow b;
    b.fingerprint = {{1, 0}, "set-b"};
    EXPECT_THROW(d.add(b), InputError);
    DatasetRow c;
    c.fingerprint = {{1, 0}, "set-a"};
    c.measured_ron = 99.0;
    c.label = RonClass::low;
    EXPECT_THROW(d.add(c), InputError);
}

TEST(Dataset, ShippedCorporaLoad) {
    auto patterns = load_pattern_set(std::string(RONPAINT_SOURCE_DIR) + "/data/patterns/default.tsv");
    for (auto file : {"/data/demo_train.csv", "/data/demo_validation.csv", "/data/benchmark_200.csv"}) {
        auto data = load_dataset(std::string(RONPAINT_SOURCE_DIR) + file, patterns);
        EXPECT_GT(data.count(RonClass::high), 0u) << file;
        EXPECT_GT(data.count(RonClass::low), 0u) << file;
    }
}
