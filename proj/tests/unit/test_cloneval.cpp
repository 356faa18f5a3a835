#include "codesum/cloneval.hpp"
#include "codesum/rng.hpp"

#include "support.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <sstream>

using namespace codesum;

namespace {

// Four fragments in 2-D: a=(1,0), b=(1,1), c=(0,1), d=(-1,0).
EmbeddingSet four() {
    return EmbeddingSet("test", {"a", "b", "c", "d"}, Matrix(4, 2, std::vector<double>{1, 0, 1, 1, 0, 1, -1, 0}));
}

PairDataset four_pairs() {
    PairDataset d;
    d.pairs = {{"a", "b", true}, {"a", "c", false}, {"b", "c", true}, {"a", "d", false}, {"b", "d", false}};
    return d;
}

}  // namespace

TEST_SUITE("cloneval") {

TEST_CASE("cosine similarity examples") {
    const std::vector<double> x{1, 0}, y{1, 1}, z{0, 3}, w{-2, 0};
    CHECK(std::abs(cosine_similarity(x, y) - 1.0 / std::sqrt(2.0)) < 1e-15);
    CHECK(cosine_similarity(x, z) == 0.0);
    CHECK(cosine_similarity(x, w) == -1.0);
    CHECK(cosine_similarity(y, y) == doctest::Approx(1.0));
    CHECK_THROWS_AS(cosine_similarity(x, std::vector<double>{0, 0}), CloneEvalError);
    CHECK_THROWS_AS(cosine_similarity(x, std::vector<double>{1, 0, 0}), CloneEvalError);
}

TEST_CASE("cosine is symmetric and bounded") {
    SplitMix64 rng(3);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> a(5), b(5);
        for (int k = 0; k < 5; ++k) {
            a[k] = rng.normal();
            b[k] = rng.normal();
        }
        const double s = cosine_similarity(a, b);
        CHECK(s == cosine_similarity(b, a));
        CHECK(s >= -1.0);
        CHECK(s <= 1.0);
    }
}

TEST_CASE("threshold grid validation") {
    CHECK(ThresholdConfig().grid() == std::vector<double>{0.50, 0.55, 0.60, 0.65, 0.70, 0.75});
    CHECK_THROWS_AS(ThresholdConfig(std::vector<double>{}), CloneEvalError);
    CHECK_THROWS_AS(ThresholdConfig({0.6, 0.5}), CloneEvalError);
    CHECK_THROWS_AS(ThresholdConfig({0.5, 0.5}), CloneEvalError);
    CHECK_THROWS_AS(ThresholdConfig({1.0}), CloneEvalError);
    CHECK_THROWS_AS(ThresholdConfig({0.0}), CloneEvalError);
}

TEST_CASE("four fragments, hand-checked similarities") {
    const auto sims = pair_similarities(four_pairs(), four());
    const double r = 1.0 / std::sqrt(2.0);
    const std::vector<double> expected{r, 0.0, r, -1.0, -r};
    REQUIRE(sims.size() == expected.size());
    for (std::size_t k = 0; k < sims.size(); ++k) {
        CHECK(std::abs(sims[k] - expected[k]) < 1e-15);
    }
    const auto preds = classify_pairs(four_pairs(), four(), 0.7);
    CHECK(preds[0].predicted);
    CHECK_FALSE(preds[1].predicted);
    CHECK(preds[2].predicted);
    CHECK(preds[0].threshold == 0.7);
}

TEST_CASE("threshold is inclusive") {
    const EmbeddingSet e("t", {"x", "y"}, Matrix(2, 2, std::vector<double>{1, 0, 0.6, 0.8}));
    PairDataset d;
    d.pairs = {{"x", "y", true}};
    const auto sims = pair_similarities(d, e);
    REQUIRE(sims[0] == 0.6);
    CHECK(classify_pairs(d, e, 0.6)[0].predicted);
    CHECK_FALSE(classify_pairs(d, e, std::nextafter(0.6, 1.0))[0].predicted);
}

TEST_CASE("pair order does not change similarity") {
    PairDataset swapped;
    for (const auto& p : four_pairs().pairs) {
        swapped.pairs.push_back({p.id_b, p.id_a, p.truth});
    }
    CHECK(pair_similarities(swapped, four()) == pair_similarities(four_pairs(), four()));
}

TEST_CASE("missing embedding is named") {
    PairDataset d;
    d.pairs = {{"a", "zz", true}};
    CHECK_THROWS_WITH_AS(pair_similarities(d, four()), "no embedding for fragment 'zz'", CloneEvalError);
}

TEST_CASE("sweep counts per threshold") {
    const auto rows = sweep_thresholds(four_pairs(), four(), ThresholdConfig({0.5, 0.75}));
    REQUIRE(rows.size() == 2);
    // At 0.5 both positives (0.707) are predicted and nothing else.
    CHECK(rows[0].binary.counts == ConfusionCounts{2, 3, 0, 0});
    CHECK(rows[0].weighted.f1 == 1.0);
    // At 0.75 nothing is predicted.
    CHECK(rows[1].binary.counts == ConfusionCounts{0, 3, 0, 2});
    CHECK(rows[1].binary.recall == 0.0);
    CHECK(rows[1].binary.precision_degenerate);
    CHECK(&rows[1].report(Averaging::binary) == &rows[1].binary);
}

TEST_CASE("sweep CSV format") {
    const auto rows = sweep_thresholds(four_pairs(), four(), ThresholdConfig({0.5, 0.75}));
    const auto csv = sweep_csv(rows, Averaging::binary);
    CHECK(csv ==
          "T,accuracy,precision,recall,f1\n"
          "0.50,1.000000,1.000000,1.000000,1.000000\n"
          "0.75,0.600000,0.000000,0.000000,0.000000\n");
    const auto odd = sweep_csv(sweep_thresholds(four_pairs(), four(), ThresholdConfig({0.123})), Averaging::binary);
    CHECK(odd.find("\n0.123,") != std::string::npos);
}

TEST_CASE("predictions file") {
    testing::TempDir dir;
    const auto preds = classify_pairs(four_pairs(), four(), 0.5);
    write_predictions_jsonl(preds, dir / "p.jsonl");
    std::istringstream in(testing::read_file(dir / "p.jsonl"));
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j["id1"] == preds[n].id_a);
        CHECK(j["id2"] == preds[n].id_b);
        CHECK(j["sim"].get<double>() == preds[n].similarity);
        CHECK(j["pred"] == preds[n].predicted);
        CHECK(j["T"] == 0.5);
        ++n;
    }
    CHECK(n == preds.size());
}

TEST_CASE("recall and predicted positives never increase along the grid") {
    SplitMix64 rng(77);
    const ThresholdConfig grid;
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 6 + rng.below(10);
        Matrix m(n, 3);
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < n; ++i) {
            ids.push_back(std::to_string(i));
            for (std::size_t k = 0; k < 3; ++k) {
                m(i, k) = rng.normal() + 2.0;
            }
        }
        const EmbeddingSet e("r", ids, m);
        PairDataset d;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                d.pairs.push_back({ids[i], ids[j], rng.below(2) == 1});
            }
        }
        const auto rows = sweep_thresholds(d, e, grid);
        for (std::size_t k = 1; k < rows.size(); ++k) {
            const auto& prev = rows[k - 1].binary.counts;
            const auto& cur = rows[k].binary.counts;
            CHECK(cur.tp + cur.fp <= prev.tp + prev.fp);
            CHECK(rows[k].binary.recall <= rows[k - 1].binary.recall);
        }
    }
}

}  // TEST_SUITE
