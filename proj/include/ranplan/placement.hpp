#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "ranplan/errors.hpp"
#include "ranplan/linkbudget.hpp"

namespace ranplan {

// A candidate RU subset (distinct grid indices, ascending).
struct Deployment {
    std::vector<int> ru_indices;

    void validate(int n_locations) const {
        if (ru_indices.empty()) throw ConfigError("deployment needs at least one RU");
        for (std::size_t k = 0; k < ru_indices.size(); ++k) {
            if (ru_indices[k] < 0 || ru_indices[k] >= n_locations)
                throw ConfigError("RU index out of grid bounds");
            if (k > 0 && ru_indices[k] <= ru_indices[k - 1])
                throw ConfigError("RU indices must be distinct and ascending");
        }
    }
};

struct AssociationResult {
    std::vector<int> serving_ru;       // per UE
    std::vector<double> best_sinr_db;  // per UE, max over deployed RUs
};

struct ScoreOptions {
    double floor_db = -30.0;  // stands in for -inf (fully blocked UE)
    bool linear_mean = false; // dB-domain mean by default
};

struct ScoreRow {
    Deployment deployment;
    double score_db = 0.0;
    double min_db = 0.0;
    double max_db = 0.0;
};

struct ScoreTable {
    double attenuation_db = 0.0;
    std::vector<ScoreRow> rows;

    const ScoreRow& best() const {
        if (rows.empty()) throw ConfigError("empty score table");
        std::size_t best_idx = 0;
        for (std::size_t k = 1; k < rows.size(); ++k)
            if (rows[k].score_db > rows[best_idx].score_db) best_idx = k;
        return rows[best_idx];
    }
};

// All unordered location pairs in lexicographic order: n*(n-1)/2 of them.
inline std::vector<Deployment> enumerate_pairs(int n_locations) {
    if (n_locations < 2) throw ConfigError("pair enumeration needs at least 2 locations");
    std::vector<Deployment> out;
    out.reserve(static_cast<std::size_t>(n_locations) * (n_locations - 1) / 2);
    for (int a = 0; a < n_locations; ++a)
        for (int b = a + 1; b < n_locations; ++b) out.push_back({{a, b}});
    return out;
}

// Assigns each UE to the deployed RU with the best SINR; ties break toward
// the lowest RU index.
inline AssociationResult associate(const Deployment& deployment, const RssiMatrix& rssi,
                                   const NoiseModel& noise, const UeConfig& ue) {
    deployment.validate(rssi.ru_count);
    AssociationResult result;
    result.serving_ru.resize(static_cast<std::size_t>(rssi.ue_count));
    result.best_sinr_db.resize(static_cast<std::size_t>(rssi.ue_count));
    for (int j = 0; j < rssi.ue_count; ++j) {
        int best_ru = deployment.ru_indices.front();
        double best = -std::numeric_limits<double>::infinity();
        for (int i : deployment.ru_indices) {
            const double g = sinr_db(j, i, deployment.ru_indices, rssi, noise, ue);
            if (g > best) {
                best = g;
                best_ru = i;
            }
        }
        result.serving_ru[static_cast<std::size_t>(j)] = best_ru;
        result.best_sinr_db[static_cast<std::size_t>(j)] = best;
    }
    return result;
}

namespace detail {

inline double floored(double sinr_db_value, const ScoreOptions& opts) {
    if (std::isinf(sinr_db_value) && sinr_db_value < 0.0) return opts.floor_db;
    return sinr_db_value;
}

}  // namespace detail

inline ScoreRow score_deployment(const Deployment& deployment, const RssiMatrix& rssi,
                                 const NoiseModel& noise, const UeConfig& ue,
                                 const ScoreOptions& opts = {}) {
    const AssociationResult assoc = associate(deployment, rssi, noise, ue);
    ScoreRow row;
    row.deployment = deployment;
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double g : assoc.best_sinr_db) {
        const double v = detail::floored(g, opts);
        sum += opts.linear_mean ? db_to_linear(v) : v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double n = static_cast<double>(assoc.best_sinr_db.size());
    row.score_db = opts.linear_mean ? linear_to_db(sum / n) : sum / n;
    row.min_db = lo;
    row.max_db = hi;
    return row;
}

inline ScoreTable score_all_pairs(const ChannelMatrix& channel, const RuConfig& ru_base,
                                  const UeConfig& ue, const NoiseModel& noise,
                                  double attenuation_db, const ScoreOptions& opts = {}) {
    RuConfig ru = ru_base;
    ru.tx_attenuation_db = attenuation_db;
    const std::vector<RuConfig> rus(static_cast<std::size_t>(channel.tx_count), ru);
    const RssiMatrix rssi = build_rssi_matrix(channel, rus, ue);

    ScoreTable table;
    table.attenuation_db = attenuation_db;
    for (const auto& dep : enumerate_pairs(channel.tx_count))
        table.rows.push_back(score_deployment(dep, rssi, noise, ue, opts));
    return table;
}

struct SweepResult {
    std::vector<ScoreTable> tables;  // one per attenuation value

    const ScoreRow& best_at(std::size_t k) const { return tables[k].best(); }
};

// Applies each attenuation value uniformly to all RUs and scores every pair.
inline SweepResult sweep_attenuation(const ChannelMatrix& channel, const RuConfig& ru_base,
                                     const UeConfig& ue, const NoiseModel& noise,
                                     const std::vector<double>& values_db,
                                     const ScoreOptions& opts = {}) {
    for (double a : values_db)
        if (a < 0.0 || a > 50.0) throw ConfigError("attenuation sweep values must be in [0, 50]");
    SweepResult result;
    for (double a : values_db)
        result.tables.push_back(score_all_pairs(channel, ru_base, ue, noise, a, opts));
    return result;
}

// Symmetric n x n score matrix; cells without a pair stay empty. Normalized
// mode linearly maps the table's scores to [0, 1].
inline void export_heatmap(const ScoreTable& table, int n_locations, bool normalize,
                           std::ostream& out) {
    std::vector<std::vector<double>> grid(
        static_cast<std::size_t>(n_locations),
        std::vector<double>(static_cast<std::size_t>(n_locations),
                            std::numeric_limits<double>::quiet_NaN()));
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& row : table.rows) {
        if (row.deployment.ru_indices.size() != 2)
            throw ConfigError("heatmap export requires pair deployments");
        lo = std::min(lo, row.score_db);
        hi = std::max(hi, row.score_db);
    }
    for (const auto& row : table.rows) {
        const int a = row.deployment.ru_indices[0];
        const int b = row.deployment.ru_indices[1];
        double v = row.score_db;
        if (normalize) v = hi > lo ? (v - lo) / (hi - lo) : 0.0;
        grid[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = v;
        grid[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = v;
    }
    char buf[64];
    for (int a = 0; a < n_locations; ++a) {
        for (int b = 0; b < n_locations; ++b) {
            if (b) out << ",";
            const double v = grid[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
            if (!std::isnan(v)) {
                std::snprintf(buf, sizeof(buf), "%.9g", v);
                out << buf;
            }
        }
        out << "\n";
    }
}

inline void export_score_table_csv(const ScoreTable& table, std::ostream& out,
                                   bool header = true) {
    if (header) out << "ru_a,ru_b,attenuation_db,score_db,min_db,max_db\n";
    char buf[256];
    for (const auto& row : table.rows) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%g,%.9g,%.9g,%.9g",
                      row.deployment.ru_indices[0], row.deployment.ru_indices[1],
                      table.attenuation_db, row.score_db, row.min_db, row.max_db);
        out << buf << "\n";
    }
}

enum class SearchStrategy { Exhaustive, Greedy };

struct SearchResult {
    Deployment best;
    ScoreRow best_row;
    std::vector<ScoreRow> evaluated;  // every scored deployment, in visit order
};

namespace detail {

inline double combination_count(int n, int m) {
    double c = 1.0;
    for (int k = 1; k <= m; ++k) c *= static_cast<double>(n - m + k) / k;
    return c;
}

inline void combinations_rec(int n, int m, int start, std::vector<int>& cur,
                             std::vector<Deployment>& out) {
    if (static_cast<int>(cur.size()) == m) {
        out.push_back({cur});
        return;
    }
    for (int v = start; v < n; ++v) {
        cur.push_back(v);
        combinations_rec(n, m, v + 1, cur, out);
        cur.pop_back();
    }
}

}  // namespace detail

// Exhaustive: global argmax over all C(n, M) subsets (limited to 1e6).
// Greedy: adds one RU at a time, each time the one maximizing the score.
inline SearchResult search(const RssiMatrix& rssi, const NoiseModel& noise, const UeConfig& ue,
                           int ru_count_to_deploy, SearchStrategy strategy,
                           const ScoreOptions& opts = {}) {
    const int n = rssi.ru_count;
    if (ru_count_to_deploy < 1 || ru_count_to_deploy > n)
        throw ConfigError("deployment size must be in [1, n_locations]");

    SearchResult result;
    if (strategy == SearchStrategy::Exhaustive) {
        if (detail::combination_count(n, ru_count_to_deploy) > 1e6)
            throw ConfigError("combinatorial limit exceeded; use the greedy strategy");
        std::vector<Deployment> all;
        std::vector<int> cur;
        detail::combinations_rec(n, ru_count_to_deploy, 0, cur, all);
        bool first = true;
        for (const auto& dep : all) {
            const ScoreRow row = score_deployment(dep, rssi, noise, ue, opts);
            result.evaluated.push_back(row);
            if (first || row.score_db > result.best_row.score_db) {
                result.best_row = row;
                first = false;
            }
        }
    } else {
        std::vector<int> chosen;
        for (int step = 0; step < ru_count_to_deploy; ++step) {
            bool first = true;
            ScoreRow best_row;
            for (int cand = 0; cand < n; ++cand) {
                if (std::find(chosen.begin(), chosen.end(), cand) != chosen.end()) continue;
                std::vector<int> trial = chosen;
                trial.push_back(cand);
                std::sort(trial.begin(), trial.end());
                const ScoreRow row = score_deployment({trial}, rssi, noise, ue, opts);
                if (first || row.score_db > best_row.score_db) {
                    best_row = row;
                    first = false;
                }
            }
            chosen = best_row.deployment.ru_indices;
            result.evaluated.push_back(best_row);
            result.best_row = best_row;
        }
    }
    result.best = result.best_row.deployment;
    return result;
}

}  // namespace ranplan
