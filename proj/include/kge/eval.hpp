#pragma once
// Link-prediction evaluation: corrupt one side of each test triple, rank the
// true entity among all candidates, aggregate MR / MRR / Hits@N. A deliberately
// naive brute-force ranker acts as the oracle for the batched path.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "kge/graph.hpp"
#include "kge/models.hpp"
#include "kge/types.hpp"

namespace kge {

enum class RankSetting { Raw, Filtered };
enum class RankSide { Head, Tail };
enum class SidePolicy { HeadOnly, TailOnly, BothAveraged };

inline std::string to_string(RankSetting s) {
    return s == RankSetting::Raw ? "raw" : "filtered";
}

inline RankSetting parse_rank_setting(const std::string& name) {
    if (name == "raw") return RankSetting::Raw;
    if (name == "filtered") return RankSetting::Filtered;
    throw ConfigError("unknown setting: \"" + name + "\"");
}

inline std::string to_string(SidePolicy p) {
    switch (p) {
        case SidePolicy::HeadOnly: return "head";
        case SidePolicy::TailOnly: return "tail";
        case SidePolicy::BothAveraged: return "both";
    }
    return "?";
}

inline SidePolicy parse_side_policy(const std::string& name) {
    if (name == "head") return SidePolicy::HeadOnly;
    if (name == "tail") return SidePolicy::TailOnly;
    if (name == "both") return SidePolicy::BothAveraged;
    throw ConfigError("unknown side policy: \"" + name + "\"");
}

struct RankQuery {
    Triple triple;
    RankSide side;  // Head = corrupt h and rank the true h; Tail symmetric
};

namespace detail {

inline Triple substitute(const RankQuery& q, std::uint32_t candidate) {
    Triple t = q.triple;
    (q.side == RankSide::Head ? t.h : t.t) = candidate;
    return t;
}

}  // namespace detail

// 1-based rank of the true entity. Ties contribute half their count:
// rank = 1 + |strictly greater| + floor(|equal, excluding truth| / 2), so a
// constant scorer lands mid-field instead of at rank 1. In filtered mode,
// candidates (other than the truth) whose substituted triple is a known true
// triple are excluded before counting.
inline int rank_one(const ModelParams& params, const RankQuery& q,
                    const FilterIndex* filter = nullptr) {
    const std::uint32_t truth = q.side == RankSide::Head ? q.triple.h : q.triple.t;
    const std::vector<double> scores = q.side == RankSide::Head
                                           ? score_all_heads(params, q.triple.r, q.triple.t)
                                           : score_all_tails(params, q.triple.h, q.triple.r);
    const double s_true = scores[truth];

    std::size_t greater = 0, equal = 0;
    for (std::uint32_t e = 0; e < scores.size(); ++e) {
        if (e == truth) continue;
        if (filter && filter->contains(detail::substitute(q, e))) continue;
        if (scores[e] > s_true)
            ++greater;
        else if (scores[e] == s_true)
            ++equal;
    }
    return static_cast<int>(1 + greater + equal / 2);
}

// Oracle: materialize every candidate triple, score each with the scalar
// scorer, sort, and read the rank off the sorted order. Must agree with
// rank_one on every input.
inline int brute_force_rank(const ModelParams& params, const RankQuery& q,
                            const FilterIndex* filter = nullptr) {
    const std::uint32_t truth = q.side == RankSide::Head ? q.triple.h : q.triple.t;

    std::vector<std::pair<double, std::uint32_t>> cand;
    cand.reserve(params.n_entities);
    for (std::uint32_t e = 0; e < params.n_entities; ++e) {
        const Triple sub = detail::substitute(q, e);
        if (filter && e != truth && filter->contains(sub)) continue;
        cand.emplace_back(score(params, sub), e);
    }
    std::stable_sort(cand.begin(), cand.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });

    const double s_true = score(params, q.triple);
    std::size_t first_equal = 0;
    while (first_equal < cand.size() && cand[first_equal].first > s_true) ++first_equal;
    std::size_t n_equal = 0;
    while (first_equal + n_equal < cand.size() &&
           cand[first_equal + n_equal].first == s_true)
        ++n_equal;
    return static_cast<int>(first_equal + 1 + (n_equal - 1) / 2);
}

struct RankReport {
    std::vector<int> ranks;
    double mr = 0.0;
    double mrr = 0.0;
    std::map<int, double> hits;  // keys 1, 3, 10
    RankSetting setting = RankSetting::Filtered;
    SidePolicy side_policy = SidePolicy::HeadOnly;
};

// Metric aggregation over an explicit rank list:
//   MR = (1/n) sum rank_i, MRR = (1/n) sum 1/rank_i, H@N = |{rank <= N}| / n.
inline RankReport report_from_ranks(std::vector<int> ranks, RankSetting setting,
                                    SidePolicy side_policy) {
    if (ranks.empty()) throw Error("cannot compute metrics over an empty rank list");
    RankReport rep;
    rep.setting = setting;
    rep.side_policy = side_policy;
    rep.ranks = std::move(ranks);

    const double n = static_cast<double>(rep.ranks.size());
    double mr = 0.0, mrr = 0.0;
    std::map<int, std::size_t> counts{{1, 0}, {3, 0}, {10, 0}};
    for (int r : rep.ranks) {
        mr += static_cast<double>(r);
        mrr += 1.0 / static_cast<double>(r);
        for (auto& [cutoff, c] : counts)
            if (r <= cutoff) ++c;
    }
    rep.mr = mr / n;
    rep.mrr = mrr / n;
    for (const auto& [cutoff, c] : counts) rep.hits[cutoff] = static_cast<double>(c) / n;
    return rep;
}

// Ranks every test triple on the side(s) the policy selects. BothAveraged
// contributes a head rank and a tail rank per triple (2n ranks, interleaved
// head-then-tail in triple order). With threads > 1, queries are sharded and
// results merged by index, so the report is identical for any worker count.
inline RankReport evaluate(const ModelParams& params, const std::vector<Triple>& triples,
                           RankSetting setting, SidePolicy side_policy,
                           const FilterIndex* filter = nullptr, int threads = 0) {
    if (triples.empty()) throw Error("cannot evaluate an empty triple list");
    if (setting == RankSetting::Filtered && !filter)
        throw ConfigError("filtered evaluation requires a filter index");
    const FilterIndex* f = setting == RankSetting::Filtered ? filter : nullptr;

    std::vector<RankQuery> queries;
    queries.reserve(triples.size() * (side_policy == SidePolicy::BothAveraged ? 2 : 1));
    for (const Triple& tr : triples) {
        if (side_policy != SidePolicy::TailOnly) queries.push_back({tr, RankSide::Head});
        if (side_policy != SidePolicy::HeadOnly) queries.push_back({tr, RankSide::Tail});
    }

    std::vector<int> ranks(queries.size());
    const int n_workers = threads > 1 ? threads : 0;
    if (n_workers == 0) {
        for (std::size_t i = 0; i < queries.size(); ++i)
            ranks[i] = rank_one(params, queries[i], f);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < queries.size(); i += n_workers)
                    ranks[i] = rank_one(params, queries[i], f);
            });
        }
        for (auto& th : pool) th.join();
    }
    return report_from_ranks(std::move(ranks), setting, side_policy);
}

// Flat key=value block, one metric per line.
inline std::string format_report(const RankReport& rep) {
    char buf[64];
    std::string out;
    out += "setting=" + to_string(rep.setting) + "\n";
    out += "side=" + to_string(rep.side_policy) + "\n";
    out += "n=" + std::to_string(rep.ranks.size()) + "\n";
    std::snprintf(buf, sizeof(buf), "MR=%.4f\n", rep.mr);
    out += buf;
    std::snprintf(buf, sizeof(buf), "MRR=%.4f\n", rep.mrr);
    out += buf;
    for (const auto& [cutoff, frac] : rep.hits) {
        std::snprintf(buf, sizeof(buf), "H@%d=%.4f\n", cutoff, frac);
        out += buf;
    }
    return out;
}

}  // namespace kge
