#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tabaug/oversample.hpp"

using namespace tabaug;

namespace {

double euclid(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j)
        sum += (a[j] - b[j]) * (a[j] - b[j]);
    return std::sqrt(sum);
}

bool onSegment(const std::vector<double>& s, const std::vector<double>& a,
               const std::vector<double>& b) {
    return std::abs(euclid(s, a) + euclid(s, b) - euclid(a, b)) <= 1e-9;
}

/// Solves per-feature for lambda in s = a + lambda*(b - a) and demands a
/// consistent value in [0,1] across features.
bool isConvexCombination(const std::vector<double>& s,
                         const std::vector<double>& a,
                         const std::vector<double>& b) {
    bool haveLambda = false;
    double lambda = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        const double span = b[j] - a[j];
        if (std::abs(span) <= 1e-12) {
            if (std::abs(s[j] - a[j]) > 1e-9) return false;
            continue;
        }
        const double lj = (s[j] - a[j]) / span;
        if (!haveLambda) {
            lambda = lj;
            haveLambda = true;
        } else if (std::abs(lj - lambda) > 1e-9) {
            return false;
        }
    }
    return !haveLambda || (lambda >= -1e-9 && lambda <= 1.0 + 1e-9);
}

bool combinesSomeMinorityPair(const std::vector<double>& s,
                              const TabularDataset& ds) {
    std::vector<std::size_t> minority;
    for (std::size_t i = 0; i < ds.labels.size(); ++i)
        if (ds.labels[i] == 1) minority.push_back(i);
    for (std::size_t i = 0; i < minority.size(); ++i)
        for (std::size_t j = 0; j < minority.size(); ++j)
            if (i != j &&
                isConvexCombination(s, ds.rows[minority[i]], ds.rows[minority[j]]))
                return true;
    return false;
}

TabularDataset handDataset(const std::vector<std::vector<double>>& majorityRows,
                           const std::vector<std::vector<double>>& minorityRows) {
    TabularDataset ds;
    for (std::size_t j = 0; j < majorityRows[0].size(); ++j)
        ds.featureNames.push_back("f" + std::to_string(j));
    for (const auto& row : majorityRows) {
        ds.rows.push_back(row);
        ds.labels.push_back(0);
    }
    for (const auto& row : minorityRows) {
        ds.rows.push_back(row);
        ds.labels.push_back(1);
    }
    return ds;
}

}  // namespace

TEST_CASE("smote with two minority points stays on their segment") {
    const std::vector<double> a = {0.0, 0.0};
    const std::vector<double> b = {2.0, 1.0};
    TabularDataset ds = handDataset(
        {{5, 5}, {5, 6}, {6, 5}, {6, 6}, {7, 5}, {7, 6}}, {a, b});
    OversampleConfig cfg;
    cfg.kNeighbors = 1;
    cfg.seed = 3;
    const OversampleResult result = smote(ds, cfg);
    REQUIRE(result.rows.size() == 4);  // 6 majority - 2 minority
    for (const auto& s : result.rows) CHECK(onSegment(s, a, b));

    appendRows(ds, result.rows, 1, true);
    CHECK(ds.classCount(0) == ds.classCount(1));
}

TEST_CASE("smote with identical minority points reproduces that point") {
    const std::vector<double> p = {1.5, -2.0, 0.25};
    TabularDataset ds =
        handDataset({{9, 9, 9}, {9, 8, 9}, {8, 9, 9}, {8, 8, 9}, {7, 9, 9}},
                    {p, p, p});
    OversampleConfig cfg;
    cfg.kNeighbors = 2;
    cfg.seed = 8;
    const OversampleResult result = smote(ds, cfg);
    REQUIRE(result.rows.size() == 2);
    for (const auto& s : result.rows)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(s[j] == doctest::Approx(p[j]).epsilon(1e-12));
}

TEST_CASE("smote with three minority points uses one of the three segments") {
    const std::vector<std::vector<double>> minority = {
        {0.0, 0.0}, {4.0, 0.0}, {0.0, 3.0}};
    TabularDataset ds = handDataset(
        {{10, 10}, {11, 10}, {10, 11}, {11, 11}, {12, 10}, {12, 11}, {13, 10}},
        minority);
    OversampleConfig cfg;
    cfg.kNeighbors = 2;
    cfg.seed = 21;
    const OversampleResult result = smote(ds, cfg);
    REQUIRE(result.rows.size() == 4);
    for (const auto& s : result.rows) {
        bool onAny = false;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = i + 1; j < 3; ++j)
                if (onSegment(s, minority[i], minority[j])) onAny = true;
        CHECK(onAny);
    }
}

TEST_CASE("smote rows are convex combinations of real minority rows") {
    const TabularDataset ds = synthImbalanced(20, 6, 3, 2.0, 17);
    OversampleConfig cfg;
    cfg.kNeighbors = 3;
    cfg.seed = 5;
    const OversampleResult result = smote(ds, cfg);
    REQUIRE(result.rows.size() == 14);
    for (const auto& s : result.rows) CHECK(combinesSomeMinorityPair(s, ds));
}

TEST_CASE("smote is seed-deterministic and validates its preconditions") {
    const TabularDataset ds = synthImbalanced(12, 6, 2, 2.0, 9);
    OversampleConfig cfg;
    cfg.kNeighbors = 3;
    cfg.seed = 101;
    const OversampleResult a = smote(ds, cfg);
    const OversampleResult b = smote(ds, cfg);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i)
        for (std::size_t j = 0; j < a.rows[i].size(); ++j)
            CHECK(a.rows[i][j] == b.rows[i][j]);

    cfg.seed = 102;
    const OversampleResult c = smote(ds, cfg);
    bool differs = false;
    for (std::size_t i = 0; i < a.rows.size(); ++i)
        if (a.rows[i] != c.rows[i]) differs = true;
    CHECK(differs);

    OversampleConfig bad = cfg;
    bad.kNeighbors = 0;
    CHECK_THROWS_AS(smote(ds, bad), std::invalid_argument);
    bad.kNeighbors = 6;  // not smaller than the minority count
    CHECK_THROWS_AS(smote(ds, bad), std::invalid_argument);
    bad.kNeighbors = 5;
    CHECK_NOTHROW(smote(ds, bad));
}

TEST_CASE("adasyn difficulty scores match hand-built neighborhoods") {
    // m0 sits between two majority points; m1 and m2 pair up with one
    // majority point each; two far majority points only widen the gap.
    TabularDataset ds = handDataset(
        {{0.1, 0.0}, {0.0, 0.1}, {10.1, 0.0}, {50, 50}, {60, 60}},
        {{0.0, 0.0}, {10.0, 0.0}, {10.2, 0.0}});
    const auto difficulty = adasynDifficulty(ds, 2);
    REQUIRE(difficulty.size() == 3);
    CHECK(difficulty[0] == 1.0);  // both neighbors majority
    CHECK(difficulty[1] == 0.5);  // one majority, one minority neighbor
    CHECK(difficulty[2] == 0.5);
}

TEST_CASE("adasyn allocation follows largest-remainder rounding") {
    // Hand computation: shares (0.5, 0.25, 0.25, 0) of 5 give ideals
    // (2.5, 1.25, 1.25, 0); floors assign 4 and the largest remainder (0.5)
    // takes the last unit.
    CHECK(adasynAllocation({1.0, 0.5, 0.5, 0.0}, 5) ==
          std::vector<std::size_t>({3, 1, 1, 0}));
    // Remainder tie: the lower index wins.
    CHECK(adasynAllocation({1.0, 1.0}, 3) == std::vector<std::size_t>({2, 1}));
    // All-zero scores allocate uniformly.
    CHECK(adasynAllocation({0.0, 0.0, 0.0, 0.0}, 2) ==
          std::vector<std::size_t>({1, 1, 0, 0}));
}

TEST_CASE("adasyn falls back to uniform allocation for an isolated cluster") {
    TabularDataset ds = handDataset(
        {{100, 100}, {101, 100}, {100, 101}, {101, 101}, {102, 100}, {102, 101}},
        {{0.0, 0.0}, {0.5, 0.0}, {0.0, 0.5}, {0.5, 0.5}});
    OversampleConfig cfg;
    cfg.kNeighbors = 2;
    cfg.seed = 4;
    const OversampleResult result = adasyn(ds, cfg);
    REQUIRE(result.rows.size() == 2);
    REQUIRE(result.warnings.size() == 1);
    CHECK(result.warnings[0].find("uniform") != std::string::npos);
    for (const auto& s : result.rows) {
        CHECK(s[0] >= 0.0);
        CHECK(s[0] <= 0.5);
        CHECK(s[1] >= 0.0);
        CHECK(s[1] <= 0.5);
    }
}

TEST_CASE("adasyn balances classes exactly and is seed-deterministic") {
    TabularDataset ds = synthImbalanced(30, 8, 4, 2.0, 23);
    OversampleConfig cfg;
    cfg.kNeighbors = 3;
    cfg.seed = 77;
    const OversampleResult a = adasyn(ds, cfg);
    const OversampleResult b = adasyn(ds, cfg);
    REQUIRE(a.rows.size() == 22);
    for (std::size_t i = 0; i < a.rows.size(); ++i)
        CHECK(a.rows[i] == b.rows[i]);
    for (const auto& s : a.rows) CHECK(combinesSomeMinorityPair(s, ds));

    appendRows(ds, a.rows, 1, true);
    CHECK(ds.classCount(0) == ds.classCount(1));
    CHECK(ds.classCount(0) == 30);
}
