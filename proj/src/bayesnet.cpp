#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "tabaug/bayesnet.hpp"
#include "tabaug/rng.hpp"

namespace tabaug {

// ---------------------------------------------------------------------------
// DiscreteData

void DiscreteData::validate() const {
    if (columns.empty()) throw std::invalid_argument("no columns");
    for (const auto& row : rows) {
        if (row.size() != columns.size())
            throw std::invalid_argument("discrete rows are not rectangular");
        for (std::size_t j = 0; j < row.size(); ++j)
            if (row[j] >= columns[j].cardinality)
                throw std::invalid_argument("category index out of range in '" +
                                            columns[j].name + "'");
    }
    for (const auto& column : columns) {
        if (column.cardinality < 2 && !column.singleCategory)
            throw std::invalid_argument("column '" + column.name +
                                        "' has cardinality < 2 but is not "
                                        "flagged single-category");
        if (column.cardinality < 1)
            throw std::invalid_argument("column '" + column.name +
                                        "' has no categories");
    }
}

namespace {

bool isIntegerColumn(const std::vector<double>& values) {
    for (const double v : values)
        if (v != std::floor(v)) return false;
    return true;
}

DiscreteColumn fitColumn(const std::string& name,
                         const std::vector<double>& values, std::size_t bins) {
    DiscreteColumn column;
    column.name = name;

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> distinct = sorted;
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());

    if (distinct.size() == 1) {
        column.passthrough = true;
        column.singleCategory = true;
        column.cardinality = 1;
        column.levels = distinct;
        return column;
    }
    if (distinct.size() <= bins && isIntegerColumn(distinct)) {
        column.passthrough = true;
        column.cardinality = distinct.size();
        column.levels = distinct;
        return column;
    }

    // Quantile cut points; duplicates merge and edges at or below the minimum
    // drop so every remaining category is populated.
    for (std::size_t k = 1; k < bins; ++k) {
        const std::size_t cut = sorted.size() * k / bins;
        column.edges.push_back(sorted[cut]);
    }
    column.edges.erase(std::unique(column.edges.begin(), column.edges.end()),
                       column.edges.end());
    while (!column.edges.empty() && column.edges.front() <= sorted.front())
        column.edges.erase(column.edges.begin());
    column.cardinality = column.edges.size() + 1;
    if (column.cardinality == 1) column.singleCategory = true;
    return column;
}

std::size_t categoryOf(const DiscreteColumn& column, double value) {
    if (column.passthrough) {
        const auto it =
            std::lower_bound(column.levels.begin(), column.levels.end(), value);
        if (it == column.levels.end() || *it != value)
            throw std::invalid_argument("value not in the fitted levels of '" +
                                        column.name + "'");
        return static_cast<std::size_t>(it - column.levels.begin());
    }
    std::size_t category = 0;
    for (const double edge : column.edges)
        category += static_cast<std::size_t>(value >= edge);
    return category;
}

}  // namespace

DiscreteData discretize(const TabularDataset& ds, std::size_t bins) {
    ds.validate();
    if (bins < 2) throw std::invalid_argument("bins must be >= 2");
    if (ds.hasMissing())
        throw std::invalid_argument(
            "discretization needs a complete dataset; drop missing rows first");

    DiscreteData data;
    std::vector<double> values(ds.rowCount());
    for (std::size_t j = 0; j < ds.featureCount(); ++j) {
        for (std::size_t i = 0; i < ds.rowCount(); ++i)
            values[i] = ds.rows[i][j];
        data.columns.push_back(fitColumn(ds.featureNames[j], values, bins));
    }

    std::string labelName = "label";
    while (std::find(ds.featureNames.begin(), ds.featureNames.end(),
                     labelName) != ds.featureNames.end())
        labelName += "_";
    DiscreteColumn labelColumn;
    labelColumn.name = labelName;
    labelColumn.passthrough = true;
    labelColumn.cardinality = 2;
    labelColumn.levels = {0.0, 1.0};
    data.columns.push_back(labelColumn);

    data.rows.reserve(ds.rowCount());
    for (std::size_t i = 0; i < ds.rowCount(); ++i) {
        std::vector<std::size_t> row(data.columns.size());
        for (std::size_t j = 0; j < ds.featureCount(); ++j)
            row[j] = categoryOf(data.columns[j], ds.rows[i][j]);
        row.back() = static_cast<std::size_t>(ds.labels[i]);
        data.rows.push_back(std::move(row));
    }
    data.validate();
    return data;
}

// ---------------------------------------------------------------------------
// Dag

bool Dag::hasEdge(std::size_t from, std::size_t to) const {
    const auto& set = parents[to];
    return std::binary_search(set.begin(), set.end(), from);
}

void Dag::addEdge(std::size_t from, std::size_t to) {
    if (from >= nodeCount() || to >= nodeCount() || from == to)
        throw std::invalid_argument("edge endpoints out of range");
    auto& set = parents[to];
    const auto it = std::lower_bound(set.begin(), set.end(), from);
    if (it != set.end() && *it == from)
        throw std::invalid_argument("edge already present");
    set.insert(it, from);
}

void Dag::removeEdge(std::size_t from, std::size_t to) {
    auto& set = parents[to];
    const auto it = std::lower_bound(set.begin(), set.end(), from);
    if (it == set.end() || *it != from)
        throw std::invalid_argument("edge not present");
    set.erase(it);
}

std::vector<std::size_t> Dag::childrenOf(std::size_t node) const {
    std::vector<std::size_t> children;
    for (std::size_t v = 0; v < nodeCount(); ++v)
        if (hasEdge(node, v)) children.push_back(v);
    return children;
}

std::vector<std::size_t> Dag::topologicalOrder() const {
    std::vector<std::size_t> remainingParents(nodeCount());
    for (std::size_t v = 0; v < nodeCount(); ++v)
        remainingParents[v] = parents[v].size();
    std::vector<std::size_t> ready, order;
    for (std::size_t v = 0; v < nodeCount(); ++v)
        if (remainingParents[v] == 0) ready.push_back(v);
    while (!ready.empty()) {
        const std::size_t v = ready.front();
        ready.erase(ready.begin());
        order.push_back(v);
        for (std::size_t child = 0; child < nodeCount(); ++child)
            if (hasEdge(v, child) && --remainingParents[child] == 0)
                ready.push_back(child);
    }
    if (order.size() != nodeCount())
        throw std::invalid_argument("graph contains a cycle");
    return order;
}

bool Dag::isAcyclic() const {
    try {
        topologicalOrder();
        return true;
    } catch (const std::invalid_argument&) {
        return false;
    }
}

Dag emptyDag(std::vector<std::string> nodes) {
    Dag dag;
    dag.parents.resize(nodes.size());
    dag.nodes = std::move(nodes);
    return dag;
}

std::size_t nodeIndex(const Dag& dag, const std::string& name) {
    const auto it = std::find(dag.nodes.begin(), dag.nodes.end(), name);
    if (it == dag.nodes.end())
        throw std::invalid_argument("unknown node: " + name);
    return static_cast<std::size_t>(it - dag.nodes.begin());
}

// ---------------------------------------------------------------------------
// Scoring

namespace {

std::size_t configCount(const DiscreteData& data,
                        const std::vector<std::size_t>& parents) {
    std::size_t count = 1;
    for (const std::size_t p : parents) count *= data.cardinality(p);
    return count;
}

std::size_t configIndex(const DiscreteData& data,
                        const std::vector<std::size_t>& row,
                        const std::vector<std::size_t>& parents) {
    std::size_t index = 0;
    for (const std::size_t p : parents)
        index = index * data.cardinality(p) + row[p];
    return index;
}

}  // namespace

double familyBic(const DiscreteData& data, std::size_t node,
                 const std::vector<std::size_t>& parents) {
    const std::size_t card = data.cardinality(node);
    const std::size_t configs = configCount(data, parents);
    std::vector<std::size_t> counts(configs * card, 0);
    std::vector<std::size_t> totals(configs, 0);
    for (const auto& row : data.rows) {
        const std::size_t c = configIndex(data, row, parents);
        ++counts[c * card + row[node]];
        ++totals[c];
    }
    double loglik = 0.0;
    for (std::size_t c = 0; c < configs; ++c)
        for (std::size_t v = 0; v < card; ++v) {
            const std::size_t n = counts[c * card + v];
            if (n > 0)
                loglik += static_cast<double>(n) *
                          std::log(static_cast<double>(n) /
                                   static_cast<double>(totals[c]));
        }
    const double dimension =
        static_cast<double>(card - 1) * static_cast<double>(configs);
    return loglik -
           0.5 * dimension * std::log(static_cast<double>(data.rowCount()));
}

double bicScore(const DiscreteData& data, const Dag& dag) {
    if (dag.nodeCount() != data.columnCount())
        throw std::invalid_argument("dag nodes do not match the data columns");
    for (std::size_t v = 0; v < dag.nodeCount(); ++v)
        if (dag.nodes[v] != data.columns[v].name)
            throw std::invalid_argument("dag node names do not match the data");
    double score = 0.0;
    for (std::size_t v = 0; v < dag.nodeCount(); ++v)
        score += familyBic(data, v, dag.parents[v]);
    return score;
}

// ---------------------------------------------------------------------------
// Neighborhood and search

std::vector<Move> neighborMoves(const Dag& dag) {
    std::vector<Move> moves;
    const std::size_t n = dag.nodeCount();
    for (std::size_t from = 0; from < n; ++from)
        for (std::size_t to = 0; to < n; ++to) {
            if (from == to) continue;
            if (dag.hasEdge(from, to)) {
                moves.push_back({MoveKind::Remove, from, to});
                Dag reversed = dag;
                reversed.removeEdge(from, to);
                reversed.addEdge(to, from);
                if (reversed.isAcyclic())
                    moves.push_back({MoveKind::Reverse, from, to});
            } else if (!dag.hasEdge(to, from)) {
                Dag extended = dag;
                extended.addEdge(from, to);
                if (extended.isAcyclic())
                    moves.push_back({MoveKind::Add, from, to});
            }
        }
    return moves;
}

namespace {

void applyMove(Dag& dag, const Move& move) {
    switch (move.kind) {
        case MoveKind::Add: dag.addEdge(move.from, move.to); break;
        case MoveKind::Remove: dag.removeEdge(move.from, move.to); break;
        case MoveKind::Reverse:
            dag.removeEdge(move.from, move.to);
            dag.addEdge(move.to, move.from);
            break;
    }
}

Move inverseOf(const Move& move) {
    switch (move.kind) {
        case MoveKind::Add: return {MoveKind::Remove, move.from, move.to};
        case MoveKind::Remove: return {MoveKind::Add, move.from, move.to};
        case MoveKind::Reverse: return {MoveKind::Reverse, move.to, move.from};
    }
    throw std::invalid_argument("unknown move kind");
}

std::size_t moveSlot(const Move& move, std::size_t n) {
    const auto kind = static_cast<std::size_t>(move.kind);
    return (kind * n + move.from) * n + move.to;
}

/// Memoized family scores keyed by (node, sorted parent set).
class FamilyCache {
public:
    explicit FamilyCache(const DiscreteData& data) : data_(data) {}

    double score(std::size_t node, const std::vector<std::size_t>& parents) {
        const auto key = std::make_pair(node, parents);
        const auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        const double value = familyBic(data_, node, parents);
        cache_.emplace(key, value);
        return value;
    }

private:
    const DiscreteData& data_;
    std::map<std::pair<std::size_t, std::vector<std::size_t>>, double> cache_;
};

struct TabuRun {
    Dag dag;
    double score = 0.0;
};

/// One tabu-search pass from `start`; returns the best graph visited.
TabuRun runTabu(const DiscreteData& data, const Dag& start,
                const SearchConfig& config, FamilyCache& cache,
                const std::vector<char>& excluded) {
    const std::size_t n = start.nodeCount();
    Dag current = start;
    std::vector<double> family(n);
    for (std::size_t v = 0; v < n; ++v)
        family[v] = cache.score(v, current.parents[v]);
    const auto totalOf = [&] {
        return std::accumulate(family.begin(), family.end(), 0.0);
    };

    TabuRun best{current, totalOf()};
    std::vector<int> tabuUntil(3 * n * n, -1);

    for (int iter = 0; iter < config.maxIterations; ++iter) {
        const double currentScore = totalOf();
        bool haveBest = false;
        Move bestMove;
        double bestDelta = 0.0;
        for (const Move& move : neighborMoves(current)) {
            if (excluded[move.from] || excluded[move.to]) continue;

            double delta = 0.0;
            if (move.kind == MoveKind::Reverse) {
                Dag changed = current;
                applyMove(changed, move);
                delta = cache.score(move.to, changed.parents[move.to]) +
                        cache.score(move.from, changed.parents[move.from]) -
                        family[move.to] - family[move.from];
            } else {
                Dag changed = current;
                applyMove(changed, move);
                delta = cache.score(move.to, changed.parents[move.to]) -
                        family[move.to];
            }

            const bool tabu = tabuUntil[moveSlot(move, n)] > iter;
            const bool aspires = currentScore + delta > best.score;
            if (tabu && !aspires) continue;
            if (!haveBest || delta > bestDelta) {
                haveBest = true;
                bestMove = move;
                bestDelta = delta;
            }
        }
        if (!haveBest) break;

        tabuUntil[moveSlot(inverseOf(bestMove), n)] = iter + config.tenure;
        applyMove(current, bestMove);
        family[bestMove.to] = cache.score(bestMove.to, current.parents[bestMove.to]);
        if (bestMove.kind == MoveKind::Reverse)
            family[bestMove.from] =
                cache.score(bestMove.from, current.parents[bestMove.from]);

        const double score = totalOf();
        if (score > best.score) best = {current, score};
    }
    return best;
}

}  // namespace

SearchResult tabuSearch(const DiscreteData& data, const SearchConfig& config) {
    data.validate();
    if (data.columnCount() < 2)
        throw std::invalid_argument("structure search needs at least 2 nodes");
    if (config.maxIterations < 0 || config.tenure < 0 || config.restarts < 1)
        throw std::invalid_argument(
            "search needs maxIterations >= 0, tenure >= 0, restarts >= 1");

    std::vector<std::string> names;
    std::vector<char> excluded;
    for (const auto& column : data.columns) {
        names.push_back(column.name);
        excluded.push_back(column.singleCategory ? 1 : 0);
    }
    const Dag empty = emptyDag(names);

    FamilyCache cache(data);
    SearchResult result;
    result.dag = empty;
    result.score = bicScore(data, empty);
    if (config.maxIterations == 0) {
        result.restartScores.assign(static_cast<std::size_t>(config.restarts),
                                    result.score);
        return result;
    }

    for (int restart = 0; restart < config.restarts; ++restart) {
        Dag start = restart == 0 ? empty : result.dag;
        if (restart > 0) {
            Rng rng(deriveSeed(config.seed, "restart/" + std::to_string(restart)));
            for (std::size_t step = 0; step < 2 * start.nodeCount(); ++step) {
                std::vector<Move> moves;
                for (const Move& move : neighborMoves(start))
                    if (!excluded[move.from] && !excluded[move.to])
                        moves.push_back(move);
                if (moves.empty()) break;
                applyMove(start, moves[rng.index(moves.size())]);
            }
        }
        const TabuRun run = runTabu(data, start, config, cache, excluded);
        result.restartScores.push_back(run.score);
        if (run.score > result.score) {
            result.score = run.score;
            result.dag = run.dag;
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// CPTs and sampling

Cpt fitCpts(const DiscreteData& data, const Dag& dag, double alpha) {
    if (dag.nodeCount() != data.columnCount())
        throw std::invalid_argument("dag nodes do not match the data columns");
    if (alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
    Cpt cpt;
    cpt.alpha = alpha;
    cpt.tables.resize(dag.nodeCount());
    for (std::size_t v = 0; v < dag.nodeCount(); ++v) {
        const std::size_t card = data.cardinality(v);
        const std::size_t configs = configCount(data, dag.parents[v]);
        std::vector<std::vector<double>> table(configs,
                                               std::vector<double>(card, 0.0));
        std::vector<double> totals(configs, 0.0);
        for (const auto& row : data.rows) {
            const std::size_t c = configIndex(data, row, dag.parents[v]);
            table[c][row[v]] += 1.0;
            totals[c] += 1.0;
        }
        for (std::size_t c = 0; c < configs; ++c) {
            const double denom =
                totals[c] + alpha * static_cast<double>(card);
            for (std::size_t k = 0; k < card; ++k)
                table[c][k] = denom > 0.0
                                  ? (table[c][k] + alpha) / denom
                                  : 1.0 / static_cast<double>(card);
        }
        cpt.tables[v] = std::move(table);
    }
    return cpt;
}

std::vector<std::size_t> markovBlanket(const Dag& dag, std::size_t target) {
    if (target >= dag.nodeCount())
        throw std::invalid_argument("target node out of range");
    std::vector<char> inBlanket(dag.nodeCount(), 0);
    for (const std::size_t p : dag.parents[target]) inBlanket[p] = 1;
    for (const std::size_t child : dag.childrenOf(target)) {
        inBlanket[child] = 1;
        for (const std::size_t coParent : dag.parents[child]) inBlanket[coParent] = 1;
    }
    inBlanket[target] = 0;
    std::vector<std::size_t> blanket;
    for (std::size_t v = 0; v < dag.nodeCount(); ++v)
        if (inBlanket[v]) blanket.push_back(v);
    return blanket;
}

Cpdag cpdagOf(const Dag& dag) {
    Cpdag cpdag;
    for (std::size_t to = 0; to < dag.nodeCount(); ++to)
        for (const std::size_t from : dag.parents[to])
            cpdag.skeleton.emplace_back(std::min(from, to), std::max(from, to));
    std::sort(cpdag.skeleton.begin(), cpdag.skeleton.end());

    const auto adjacent = [&](std::size_t a, std::size_t b) {
        return dag.hasEdge(a, b) || dag.hasEdge(b, a);
    };
    for (std::size_t b = 0; b < dag.nodeCount(); ++b) {
        const auto& parents = dag.parents[b];
        for (std::size_t i = 0; i < parents.size(); ++i)
            for (std::size_t j = i + 1; j < parents.size(); ++j)
                if (!adjacent(parents[i], parents[j]))
                    cpdag.vStructures.push_back({parents[i], b, parents[j]});
    }
    std::sort(cpdag.vStructures.begin(), cpdag.vStructures.end());
    return cpdag;
}

DiscreteData sampleFromBn(const Dag& dag, const Cpt& cpt, std::size_t n,
                          std::uint64_t seed) {
    if (cpt.tables.size() != dag.nodeCount())
        throw std::invalid_argument("cpt does not match the dag");
    DiscreteData data;
    for (std::size_t v = 0; v < dag.nodeCount(); ++v) {
        if (cpt.tables[v].empty() || cpt.tables[v][0].empty())
            throw std::invalid_argument("cpt has an empty table");
        DiscreteColumn column;
        column.name = dag.nodes[v];
        column.cardinality = cpt.tables[v][0].size();
        column.singleCategory = column.cardinality < 2;
        data.columns.push_back(column);
    }

    const std::vector<std::size_t> order = dag.topologicalOrder();
    Rng rng(deriveSeed(seed, "bn/sample"));
    data.rows.assign(n, std::vector<std::size_t>(dag.nodeCount(), 0));
    for (std::size_t i = 0; i < n; ++i) {
        auto& row = data.rows[i];
        for (const std::size_t v : order) {
            std::size_t config = 0;
            for (const std::size_t p : dag.parents[v])
                config = config * data.cardinality(p) + row[p];
            if (config >= cpt.tables[v].size())
                throw std::invalid_argument("cpt table too small for the dag");
            const auto& dist = cpt.tables[v][config];
            const double draw = rng.uniform();
            double cumulative = 0.0;
            std::size_t value = dist.size() - 1;
            for (std::size_t k = 0; k < dist.size(); ++k) {
                cumulative += dist[k];
                if (draw < cumulative) {
                    value = k;
                    break;
                }
            }
            row[v] = value;
        }
    }
    return data;
}

// ---------------------------------------------------------------------------
// Exports

namespace {

std::string quoted(const std::string& name) {
    std::string out = "\"";
    for (const char c : name) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

std::string dagToDot(const Dag& dag) {
    std::ostringstream out;
    out << "digraph bn {\n";
    for (const auto& name : dag.nodes)
        out << "  " << quoted(name) << ";\n";
    for (std::size_t to = 0; to < dag.nodeCount(); ++to)
        for (const std::size_t from : dag.parents[to])
            out << "  " << quoted(dag.nodes[from]) << " -> "
                << quoted(dag.nodes[to]) << ";\n";
    out << "}\n";
    return out.str();
}

std::string dagToJson(const Dag& dag) {
    nlohmann::json j;
    j["nodes"] = dag.nodes;
    auto adjacency = nlohmann::json::object();
    for (std::size_t to = 0; to < dag.nodeCount(); ++to) {
        auto list = nlohmann::json::array();
        for (const std::size_t from : dag.parents[to])
            list.push_back(dag.nodes[from]);
        adjacency[dag.nodes[to]] = list;
    }
    j["parents"] = adjacency;
    return j.dump(2);
}

Dag dagFromJson(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    Dag dag = emptyDag(j.at("nodes").get<std::vector<std::string>>());
    for (std::size_t to = 0; to < dag.nodeCount(); ++to)
        for (const auto& parent : j.at("parents").at(dag.nodes[to]))
            dag.addEdge(nodeIndex(dag, parent.get<std::string>()), to);
    if (!dag.isAcyclic())
        throw std::invalid_argument("adjacency list encodes a cycle");
    return dag;
}

std::string blanketReportText(const Dag& dag, std::size_t target) {
    const auto blanket = markovBlanket(dag, target);
    const auto children = dag.childrenOf(target);
    const auto isChild = [&](std::size_t v) {
        return std::find(children.begin(), children.end(), v) != children.end();
    };
    const auto isParent = [&](std::size_t v) {
        return dag.hasEdge(v, target);
    };
    std::ostringstream out;
    out << "Markov blanket of " << dag.nodes[target] << " (" << blanket.size()
        << " nodes)\n";
    for (const char* part : {"parents", "children", "co-parents"}) {
        out << "  " << part << ":";
        bool any = false;
        for (const std::size_t v : blanket) {
            const bool parent = isParent(v);
            const bool child = isChild(v);
            const bool coParent = !parent && !child;
            const std::string kind = part;
            if ((kind == "parents" && parent) || (kind == "children" && child) ||
                (kind == "co-parents" && coParent)) {
                out << ' ' << dag.nodes[v];
                any = true;
            }
        }
        if (!any) out << " (none)";
        out << '\n';
    }
    return out.str();
}

std::string blanketToDot(const Dag& dag, std::size_t target) {
    const auto blanket = markovBlanket(dag, target);
    std::vector<char> keep(dag.nodeCount(), 0);
    keep[target] = 1;
    for (const std::size_t v : blanket) keep[v] = 1;
    std::ostringstream out;
    out << "digraph blanket {\n";
    out << "  " << quoted(dag.nodes[target]) << " [style=filled];\n";
    for (const std::size_t v : blanket)
        out << "  " << quoted(dag.nodes[v]) << ";\n";
    for (std::size_t to = 0; to < dag.nodeCount(); ++to) {
        if (!keep[to]) continue;
        for (const std::size_t from : dag.parents[to])
            if (keep[from])
                out << "  " << quoted(dag.nodes[from]) << " -> "
                    << quoted(dag.nodes[to]) << ";\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace tabaug
