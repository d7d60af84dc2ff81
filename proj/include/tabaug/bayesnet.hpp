#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tabaug/dataset.hpp"

namespace tabaug {

struct DiscreteColumn {
    std::string name;
    std::size_t cardinality = 0;
    /// Integer column with at most `bins` distinct values, used as-is.
    bool passthrough = false;
    /// Constant column (or one whose quantile edges collapsed); excluded from
    /// structure search.
    bool singleCategory = false;
    /// Interior cut points for binned columns; category = #edges <= value.
    std::vector<double> edges;
    /// Sorted distinct source values for passthrough columns.
    std::vector<double> levels;
};

struct DiscreteData {
    std::vector<std::vector<std::size_t>> rows;  // N x V category indices
    std::vector<DiscreteColumn> columns;

    std::size_t rowCount() const { return rows.size(); }
    std::size_t columnCount() const { return columns.size(); }
    std::size_t cardinality(std::size_t j) const { return columns[j].cardinality; }
    /// Throws unless rows are rectangular, every value is below its column's
    /// cardinality, and every unflagged column has cardinality >= 2.
    void validate() const;
};

/// Equal-frequency binning per feature (quantile edges, duplicates merged,
/// edges at or below the minimum dropped); integer columns with at most
/// `bins` distinct values pass through unchanged; the class label is appended
/// as the last node. Requires a complete dataset and bins >= 2.
DiscreteData discretize(const TabularDataset& ds, std::size_t bins);

/// Directed acyclic graph stored as sorted parent sets per node.
struct Dag {
    std::vector<std::string> nodes;
    std::vector<std::vector<std::size_t>> parents;

    std::size_t nodeCount() const { return nodes.size(); }
    bool hasEdge(std::size_t from, std::size_t to) const;
    void addEdge(std::size_t from, std::size_t to);
    void removeEdge(std::size_t from, std::size_t to);
    std::vector<std::size_t> childrenOf(std::size_t node) const;
    bool isAcyclic() const;
    /// Parents-before-children order; throws on a cycle.
    std::vector<std::size_t> topologicalOrder() const;
};

Dag emptyDag(std::vector<std::string> nodes);

std::size_t nodeIndex(const Dag& dag, const std::string& name);

/// BIC contribution of one family: maximum log-likelihood of `node` given
/// `parents` minus (card-1)*prod(parent cards)/2 * ln N, with 0*ln 0 := 0.
/// Higher is better.
double familyBic(const DiscreteData& data, std::size_t node,
                 const std::vector<std::size_t>& parents);

/// Sum of family scores; log-likelihood minus the dimension penalty, so the
/// search maximizes it. Throws if the dag's nodes do not match the columns.
double bicScore(const DiscreteData& data, const Dag& dag);

enum class MoveKind { Add, Remove, Reverse };

struct Move {
    MoveKind kind = MoveKind::Add;
    std::size_t from = 0;
    std::size_t to = 0;

    bool operator==(const Move&) const = default;
};

/// Every legal single-edge addition, deletion, and reversal that keeps the
/// graph acyclic, in a fixed (from, to) enumeration order.
std::vector<Move> neighborMoves(const Dag& dag);

struct SearchConfig {
    int maxIterations = 1000;
    /// Iterations an undone move stays forbidden.
    int tenure = 10;
    int restarts = 3;
    std::uint64_t seed = 0;
};

struct SearchResult {
    Dag dag;
    double score = 0.0;
    /// Best score reached in each restart.
    std::vector<double> restartScores;
};

/// Greedy hill climb with a tabu list over undone moves: starts from the
/// empty graph, applies the best non-tabu move each iteration (aspiration
/// lets a tabu move through when it beats the global best), and keeps the
/// best graph seen. Later restarts perturb the incumbent with random legal
/// moves. Columns flagged single-category never gain or lose edges.
SearchResult tabuSearch(const DiscreteData& data, const SearchConfig& config);

/// Per node: one distribution per parent configuration (mixed-radix index in
/// sorted-parent order, most significant first). Each row sums to 1 +- 1e-9.
struct Cpt {
    std::vector<std::vector<std::vector<double>>> tables;
    double alpha = 1.0;
};

/// MLE with additive smoothing; unseen parent configurations come out
/// uniform (also under alpha 0, where the estimate is undefined).
Cpt fitCpts(const DiscreteData& data, const Dag& dag, double alpha = 1.0);

/// Parents, children, and co-parents of the target's children, excluding the
/// target, sorted ascending.
std::vector<std::size_t> markovBlanket(const Dag& dag, std::size_t target);

/// Equivalence-class fingerprint: undirected skeleton plus v-structures
/// (a -> b <- c with a, c non-adjacent, a < c). Two DAGs are score-equivalent
/// iff these match.
struct Cpdag {
    std::vector<std::pair<std::size_t, std::size_t>> skeleton;
    std::vector<std::array<std::size_t, 3>> vStructures;

    bool operator==(const Cpdag&) const = default;
};

Cpdag cpdagOf(const Dag& dag);

/// Ancestral sampling in topological order; deterministic for a fixed seed.
DiscreteData sampleFromBn(const Dag& dag, const Cpt& cpt, std::size_t n,
                          std::uint64_t seed);

std::string dagToDot(const Dag& dag);
std::string dagToJson(const Dag& dag);
Dag dagFromJson(const std::string& text);

/// Text listing of the blanket partitioned into parents/children/co-parents.
std::string blanketReportText(const Dag& dag, std::size_t target);
/// DOT subgraph of the target, its blanket, and the edges among them.
std::string blanketToDot(const Dag& dag, std::size_t target);

}  // namespace tabaug
