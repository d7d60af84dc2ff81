#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tabaug/bayesnet.hpp"
#include "tabaug/rng.hpp"

using namespace tabaug;

namespace {

DiscreteData binaryData(const std::vector<std::vector<std::size_t>>& rows,
                        std::vector<std::string> names) {
    DiscreteData data;
    for (auto& name : names) {
        DiscreteColumn column;
        column.name = std::move(name);
        column.cardinality = 2;
        data.columns.push_back(column);
    }
    data.rows = rows;
    return data;
}

/// Flip-noise chain sampler: x0 ~ Bernoulli(1/2), each later column copies
/// its predecessor and flips with probability `flip`.
DiscreteData chainData(std::size_t n, std::size_t length, double flip,
                       std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::string> names;
    for (std::size_t j = 0; j < length; ++j) names.push_back("x" + std::to_string(j));
    DiscreteData data = binaryData({}, names);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> row(length);
        row[0] = rng.index(2);
        for (std::size_t j = 1; j < length; ++j)
            row[j] = rng.uniform() < flip ? 1 - row[j - 1] : row[j - 1];
        data.rows.push_back(row);
    }
    return data;
}

DiscreteData independentData(std::size_t n, std::size_t columns,
                             std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::string> names;
    for (std::size_t j = 0; j < columns; ++j)
        names.push_back("u" + std::to_string(j));
    DiscreteData data = binaryData({}, names);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> row(columns);
        for (auto& v : row) v = rng.index(2);
        data.rows.push_back(row);
    }
    return data;
}

/// All 25 labeled DAGs on 3 nodes: each unordered pair independently absent,
/// forward, or backward, minus the two 3-cycles.
std::vector<Dag> allThreeNodeDags(const std::vector<std::string>& names) {
    std::vector<Dag> dags;
    const std::size_t pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (int code = 0; code < 27; ++code) {
        Dag dag = emptyDag(names);
        int c = code;
        bool ok = true;
        for (const auto& pair : pairs) {
            const int state = c % 3;
            c /= 3;
            if (state == 1) dag.addEdge(pair[0], pair[1]);
            if (state == 2) dag.addEdge(pair[1], pair[0]);
        }
        ok = dag.isAcyclic();
        if (ok) dags.push_back(dag);
    }
    return dags;
}

double empiricalMi(const DiscreteData& data, std::size_t a, std::size_t b) {
    const double n = static_cast<double>(data.rowCount());
    double joint[2][2] = {{0, 0}, {0, 0}};
    double pa[2] = {0, 0}, pb[2] = {0, 0};
    for (const auto& row : data.rows) {
        joint[row[a]][row[b]] += 1.0;
        pa[row[a]] += 1.0;
        pb[row[b]] += 1.0;
    }
    double mi = 0.0;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            if (joint[x][y] > 0.0)
                mi += joint[x][y] / n *
                      std::log(joint[x][y] * n / (pa[x] * pb[y]));
    return mi;
}

}  // namespace

TEST_CASE("discretization bins by quantiles and passes integer columns through") {
    TabularDataset ds;
    ds.featureNames = {"spread", "flag", "constant", "skewed"};
    for (int i = 0; i < 9; ++i) {
        ds.rows.push_back({static_cast<double>(i + 1),
                           static_cast<double>(i % 2), 4.2,
                           i < 8 ? 0.5 : 9.3});
        ds.labels.push_back(i % 2);
    }
    const DiscreteData data = discretize(ds, 3);
    REQUIRE(data.columnCount() == 5);

    const DiscreteColumn& spread = data.columns[0];
    CHECK_FALSE(spread.passthrough);
    CHECK(spread.cardinality == 3);
    REQUIRE(spread.edges.size() == 2);
    CHECK(spread.edges[0] == 4.0);
    CHECK(spread.edges[1] == 7.0);
    for (int i = 0; i < 9; ++i) CHECK(data.rows[i][0] == static_cast<std::size_t>(i / 3));

    const DiscreteColumn& flag = data.columns[1];
    CHECK(flag.passthrough);
    CHECK(flag.cardinality == 2);
    for (int i = 0; i < 9; ++i) CHECK(data.rows[i][1] == static_cast<std::size_t>(i % 2));

    CHECK(data.columns[2].singleCategory);
    CHECK(data.columns[2].cardinality == 1);

    // Four fifths of the mass sits on one non-integer value, so every
    // quantile edge collapses onto the minimum and the column is flagged.
    CHECK(data.columns[3].singleCategory);

    const DiscreteColumn& label = data.columns[4];
    CHECK(label.name == "label");
    CHECK(label.cardinality == 2);
    for (int i = 0; i < 9; ++i)
        CHECK(data.rows[i][4] == static_cast<std::size_t>(ds.labels[i]));

    CHECK_THROWS_AS(discretize(ds, 1), std::invalid_argument);
    TabularDataset holey = ds;
    holey.missingMask.assign(ds.rowCount(), std::vector<char>(4, 0));
    holey.missingMask[0][0] = 1;
    CHECK_THROWS_AS(discretize(holey, 3), std::invalid_argument);
}

TEST_CASE("bic score matches the hand-computed binary fixture") {
    const DiscreteData data = binaryData({{0}, {0}, {1}, {1}}, {"x"});
    const Dag dag = emptyDag({"x"});
    // Log-likelihood 4*ln(1/2) = -2.77259, one free parameter, penalty
    // (1/2)*ln 4 = 0.69315.
    CHECK(bicScore(data, dag) == doctest::Approx(-3.4657359027997265).epsilon(1e-12));

    const DiscreteData forced = binaryData({{0}, {0}, {0}, {0}, {0}, {0}, {0}, {0}},
                                           {"x"});
    CHECK(bicScore(forced, dag) ==
          doctest::Approx(-0.5 * std::log(8.0)).epsilon(1e-12));
}

TEST_CASE("an independent parent strictly lowers the score at scale") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const DiscreteData data = independentData(2000, 2, seed);
        const Dag empty = emptyDag({"u0", "u1"});
        Dag withEdge = empty;
        withEdge.addEdge(0, 1);
        CHECK(bicScore(data, empty) > bicScore(data, withEdge));
    }
}

TEST_CASE("family scores decompose and move deltas match full rescoring") {
    Rng rng(303);
    DiscreteData data;
    for (const auto& [name, card] :
         {std::pair<const char*, std::size_t>{"a", 3}, {"b", 2}, {"c", 2}}) {
        DiscreteColumn column;
        column.name = name;
        column.cardinality = card;
        data.columns.push_back(column);
    }
    for (int i = 0; i < 200; ++i)
        data.rows.push_back({rng.index(3), rng.index(2), rng.index(2)});

    Dag dag = emptyDag({"a", "b", "c"});
    dag.addEdge(0, 1);
    dag.addEdge(0, 2);

    double familySum = 0.0;
    for (std::size_t v = 0; v < 3; ++v)
        familySum += familyBic(data, v, dag.parents[v]);
    CHECK(std::abs(bicScore(data, dag) - familySum) <= 1e-9);

    const double before = bicScore(data, dag);
    for (const Move& move : neighborMoves(dag)) {
        Dag changed = dag;
        if (move.kind == MoveKind::Add) changed.addEdge(move.from, move.to);
        if (move.kind == MoveKind::Remove) changed.removeEdge(move.from, move.to);
        if (move.kind == MoveKind::Reverse) {
            changed.removeEdge(move.from, move.to);
            changed.addEdge(move.to, move.from);
        }
        double delta = familyBic(data, move.to, changed.parents[move.to]) -
                       familyBic(data, move.to, dag.parents[move.to]);
        if (move.kind == MoveKind::Reverse)
            delta += familyBic(data, move.from, changed.parents[move.from]) -
                     familyBic(data, move.from, dag.parents[move.from]);
        CHECK(std::abs((bicScore(data, changed) - before) - delta) <= 1e-9);
    }
}

TEST_CASE("neighbor moves enumerate exactly the legal edits") {
    SUBCASE("empty two-node graph offers both additions") {
        const auto moves = neighborMoves(emptyDag({"a", "b"}));
        REQUIRE(moves.size() == 2);
        CHECK(moves[0] == Move{MoveKind::Add, 0, 1});
        CHECK(moves[1] == Move{MoveKind::Add, 1, 0});
    }

    SUBCASE("chain allows the shortcut but not the cycle") {
        Dag chain = emptyDag({"a", "b", "c"});
        chain.addEdge(0, 1);
        chain.addEdge(1, 2);
        const auto moves = neighborMoves(chain);
        const auto has = [&](Move m) {
            return std::find(moves.begin(), moves.end(), m) != moves.end();
        };
        CHECK(has({MoveKind::Add, 0, 2}));
        CHECK_FALSE(has({MoveKind::Add, 2, 0}));
        CHECK(has({MoveKind::Remove, 0, 1}));
        CHECK(has({MoveKind::Reverse, 0, 1}));
    }

    SUBCASE("complete three-node graph matches a brute-force legality scan") {
        Dag complete = emptyDag({"a", "b", "c"});
        complete.addEdge(0, 1);
        complete.addEdge(0, 2);
        complete.addEdge(1, 2);
        const auto moves = neighborMoves(complete);

        std::size_t additions = 0, removals = 0, reversals = 0;
        for (const Move& move : moves) {
            if (move.kind == MoveKind::Add) ++additions;
            if (move.kind == MoveKind::Remove) ++removals;
            if (move.kind == MoveKind::Reverse) ++reversals;
        }
        CHECK(additions == 0);
        CHECK(removals == 3);

        // Oracle: try every conceivable single-edge edit on a scratch copy.
        std::vector<Move> legal;
        for (std::size_t from = 0; from < 3; ++from)
            for (std::size_t to = 0; to < 3; ++to) {
                if (from == to) continue;
                if (complete.hasEdge(from, to)) {
                    legal.push_back({MoveKind::Remove, from, to});
                    Dag scratch = complete;
                    scratch.removeEdge(from, to);
                    scratch.addEdge(to, from);
                    if (scratch.isAcyclic())
                        legal.push_back({MoveKind::Reverse, from, to});
                } else if (!complete.hasEdge(to, from)) {
                    Dag scratch = complete;
                    scratch.addEdge(from, to);
                    if (scratch.isAcyclic())
                        legal.push_back({MoveKind::Add, from, to});
                }
            }
        REQUIRE(moves.size() == legal.size());
        for (const Move& move : legal)
            CHECK(std::find(moves.begin(), moves.end(), move) != moves.end());
        CHECK(reversals == legal.size() - 3);
    }
}

TEST_CASE("tabu search recovers a single dependent edge against the exhaustive oracle") {
    const DiscreteData data = chainData(2000, 2, 0.1, 11);

    double oracle = -1e300;
    std::size_t oracleEdges = 0;
    for (int state = 0; state < 3; ++state) {
        Dag dag = emptyDag({"x0", "x1"});
        if (state == 1) dag.addEdge(0, 1);
        if (state == 2) dag.addEdge(1, 0);
        const double score = bicScore(data, dag);
        if (score > oracle) {
            oracle = score;
            oracleEdges = state == 0 ? 0 : 1;
        }
    }
    CHECK(oracleEdges == 1);

    SearchConfig config;
    config.maxIterations = 30;
    config.tenure = 5;
    config.restarts = 2;
    config.seed = 7;
    const SearchResult result = tabuSearch(data, config);
    CHECK(result.score == doctest::Approx(oracle).epsilon(1e-12));
    std::size_t edges = 0;
    for (const auto& parents : result.dag.parents) edges += parents.size();
    CHECK(edges == 1);
}

TEST_CASE("tabu search leaves independent variables unconnected") {
    const DiscreteData data = independentData(2000, 3, 19);
    const auto dags = allThreeNodeDags({"u0", "u1", "u2"});
    REQUIRE(dags.size() == 25);
    double oracle = -1e300;
    for (const Dag& dag : dags) oracle = std::max(oracle, bicScore(data, dag));

    SearchConfig config;
    config.maxIterations = 40;
    config.tenure = 5;
    config.restarts = 2;
    config.seed = 3;
    const SearchResult result = tabuSearch(data, config);
    CHECK(result.score == doctest::Approx(oracle).epsilon(1e-12));
    for (const auto& parents : result.dag.parents) CHECK(parents.empty());
}

TEST_CASE("tabu search honors zero iterations and never drops below the empty score") {
    const DiscreteData data = chainData(400, 3, 0.2, 5);
    const double emptyScore = bicScore(data, emptyDag({"x0", "x1", "x2"}));

    SearchConfig frozen;
    frozen.maxIterations = 0;
    const SearchResult none = tabuSearch(data, frozen);
    CHECK(none.score == emptyScore);
    for (const auto& parents : none.dag.parents) CHECK(parents.empty());

    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        SearchConfig config;
        config.maxIterations = 25;
        config.tenure = 4;
        config.restarts = 2;
        config.seed = seed;
        CHECK(tabuSearch(data, config).score >= emptyScore);
    }
}

TEST_CASE("tabu search skips single-category columns") {
    DiscreteData data = chainData(500, 2, 0.05, 23);
    DiscreteColumn dead;
    dead.name = "dead";
    dead.cardinality = 1;
    dead.singleCategory = true;
    data.columns.push_back(dead);
    for (auto& row : data.rows) row.push_back(0);

    SearchConfig config;
    config.maxIterations = 20;
    config.tenure = 3;
    config.restarts = 2;
    const SearchResult result = tabuSearch(data, config);
    CHECK(result.dag.parents[2].empty());
    CHECK(result.dag.childrenOf(2).empty());
    std::size_t edges = 0;
    for (const auto& parents : result.dag.parents) edges += parents.size();
    CHECK(edges == 1);
}

TEST_CASE("chain structure is recovered up to equivalence") {
    Dag truth = emptyDag({"a", "b", "c"});
    truth.addEdge(0, 1);
    truth.addEdge(1, 2);
    Cpt cpt;
    cpt.tables = {
        {{0.5, 0.5}},
        {{0.9, 0.1}, {0.1, 0.9}},
        {{0.9, 0.1}, {0.1, 0.9}},
    };
    const DiscreteData data = sampleFromBn(truth, cpt, 2000, 31);

    SearchConfig config;
    config.maxIterations = 50;
    config.tenure = 5;
    config.restarts = 2;
    config.seed = 13;
    const SearchResult result = tabuSearch(data, config);
    CHECK(cpdagOf(result.dag) == cpdagOf(truth));
}

TEST_CASE("cpt fitting smooths unseen configurations") {
    SUBCASE("raw maximum likelihood on a binary node") {
        const DiscreteData data = binaryData({{0}, {0}, {0}, {1}}, {"x"});
        const Cpt cpt = fitCpts(data, emptyDag({"x"}), 0.0);
        CHECK(cpt.tables[0][0][0] == doctest::Approx(0.75));
        CHECK(cpt.tables[0][0][1] == doctest::Approx(0.25));
    }

    SUBCASE("unseen parent configuration becomes uniform") {
        const DiscreteData data = binaryData({{0, 0}, {0, 1}}, {"x", "y"});
        Dag dag = emptyDag({"x", "y"});
        dag.addEdge(0, 1);
        const Cpt cpt = fitCpts(data, dag, 1.0);
        REQUIRE(cpt.tables[1].size() == 2);
        CHECK(cpt.tables[1][1][0] == doctest::Approx(0.5));
        CHECK(cpt.tables[1][1][1] == doctest::Approx(0.5));
    }

    SUBCASE("hand-computed two-node table") {
        const DiscreteData data =
            binaryData({{0, 0}, {0, 1}, {0, 1}, {1, 1}, {1, 0}}, {"x", "y"});
        Dag dag = emptyDag({"x", "y"});
        dag.addEdge(0, 1);
        const Cpt cpt = fitCpts(data, dag, 0.0);
        CHECK(cpt.tables[1][0][1] == doctest::Approx(2.0 / 3.0));
        CHECK(cpt.tables[1][1][1] == doctest::Approx(0.5));
    }

    SUBCASE("every conditional distribution sums to one") {
        const DiscreteData data = chainData(100, 3, 0.3, 77);
        Dag dag = emptyDag({"x0", "x1", "x2"});
        dag.addEdge(0, 1);
        dag.addEdge(0, 2);
        dag.addEdge(1, 2);
        for (const double alpha : {0.0, 0.5, 1.0}) {
            const Cpt cpt = fitCpts(data, dag, alpha);
            for (const auto& table : cpt.tables)
                for (const auto& dist : table) {
                    double sum = 0.0;
                    for (const double p : dist) sum += p;
                    CHECK(std::abs(sum - 1.0) <= 1e-9);
                }
        }
    }
}

TEST_CASE("markov blanket follows the parents-children-coparents definition") {
    // a -> t <- b, t -> c, d -> c, plus an isolated node e.
    Dag dag = emptyDag({"a", "b", "t", "c", "d", "e"});
    dag.addEdge(0, 2);
    dag.addEdge(1, 2);
    dag.addEdge(2, 3);
    dag.addEdge(4, 3);
    CHECK(markovBlanket(dag, 2) == std::vector<std::size_t>{0, 1, 3, 4});
    CHECK(markovBlanket(dag, 5).empty());

    SUBCASE("membership is symmetric") {
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            Rng rng(seed);
            Dag random = emptyDag({"n0", "n1", "n2", "n3", "n4", "n5"});
            for (std::size_t from = 0; from < 6; ++from)
                for (std::size_t to = from + 1; to < 6; ++to)
                    if (rng.uniform() < 0.3) random.addEdge(from, to);
            for (std::size_t x = 0; x < 6; ++x) {
                const auto mbX = markovBlanket(random, x);
                for (std::size_t y = 0; y < 6; ++y) {
                    const bool xInY =
                        std::find(mbX.begin(), mbX.end(), y) != mbX.end();
                    const auto mbY = markovBlanket(random, y);
                    const bool yInX =
                        std::find(mbY.begin(), mbY.end(), x) != mbY.end();
                    CHECK(xInY == yInX);
                }
            }
        }
    }
}

TEST_CASE("blanket reports render the before and after diagrams") {
    Dag before = emptyDag({"risk", "target", "outcome"});
    before.addEdge(0, 1);
    before.addEdge(1, 2);
    CHECK(markovBlanket(before, 1).size() == 2);

    Dag after = before;
    after.nodes.push_back("exposure");
    after.parents.emplace_back();
    after.addEdge(3, 2);
    CHECK(markovBlanket(after, 1).size() == 3);

    const std::string beforeDot = blanketToDot(before, 1);
    CHECK(beforeDot.find("\"target\" [style=filled]") != std::string::npos);
    CHECK(beforeDot.find("\"risk\" -> \"target\"") != std::string::npos);
    CHECK(beforeDot.find("exposure") == std::string::npos);

    const std::string afterDot = blanketToDot(after, 1);
    CHECK(afterDot.find("\"exposure\" -> \"outcome\"") != std::string::npos);

    const std::string report = blanketReportText(after, 1);
    CHECK(report.find("3 nodes") != std::string::npos);
    CHECK(report.find("parents: risk") != std::string::npos);
    CHECK(report.find("children: outcome") != std::string::npos);
    CHECK(report.find("co-parents: exposure") != std::string::npos);
}

TEST_CASE("dag exports round-trip through json and render to dot") {
    Dag dag = emptyDag({"a", "b", "c"});
    dag.addEdge(0, 1);
    dag.addEdge(0, 2);
    dag.addEdge(1, 2);

    const Dag back = dagFromJson(dagToJson(dag));
    CHECK(back.nodes == dag.nodes);
    CHECK(back.parents == dag.parents);

    const std::string dot = dagToDot(dag);
    CHECK(dot.find("digraph") != std::string::npos);
    CHECK(dot.find("\"a\" -> \"b\"") != std::string::npos);
    CHECK(dot.find("\"b\" -> \"c\"") != std::string::npos);
    CHECK(dot.find("\"c\" ->") == std::string::npos);
}

TEST_CASE("bn sampling matches its distribution oracles") {
    SUBCASE("deterministic tables force one configuration") {
        Dag dag = emptyDag({"a", "b"});
        dag.addEdge(0, 1);
        Cpt cpt;
        cpt.tables = {{{1.0, 0.0}}, {{0.0, 1.0}, {1.0, 0.0}}};
        const DiscreteData data = sampleFromBn(dag, cpt, 50, 9);
        for (const auto& row : data.rows) {
            CHECK(row[0] == 0);
            CHECK(row[1] == 1);
        }
    }

    SUBCASE("fair coin frequency is close to one half") {
        Cpt cpt;
        cpt.tables = {{{0.5, 0.5}}};
        const DiscreteData data = sampleFromBn(emptyDag({"coin"}), cpt, 10000, 4);
        double ones = 0.0;
        for (const auto& row : data.rows) ones += static_cast<double>(row[0]);
        CHECK(std::abs(ones / 10000.0 - 0.5) < 0.02);
    }

    SUBCASE("adjacent chain variables share more information than the ends") {
        Dag chain = emptyDag({"a", "b", "c"});
        chain.addEdge(0, 1);
        chain.addEdge(1, 2);
        Cpt cpt;
        cpt.tables = {
            {{0.5, 0.5}},
            {{0.85, 0.15}, {0.15, 0.85}},
            {{0.85, 0.15}, {0.15, 0.85}},
        };
        const DiscreteData data = sampleFromBn(chain, cpt, 4000, 21);
        CHECK(empiricalMi(data, 0, 1) > empiricalMi(data, 0, 2));
        CHECK(empiricalMi(data, 1, 2) > empiricalMi(data, 0, 2));
    }

    SUBCASE("sampling is deterministic for a fixed seed") {
        Cpt cpt;
        cpt.tables = {{{0.3, 0.7}}};
        const Dag dag = emptyDag({"z"});
        const DiscreteData a = sampleFromBn(dag, cpt, 64, 8);
        const DiscreteData b = sampleFromBn(dag, cpt, 64, 8);
        CHECK(a.rows == b.rows);
    }
}
