#pragma once
// Drug-repurposing pipeline: score (drug, treat-relation, target) triples
// with a trained model, keep each drug's best pairing, rank, intersect
// rankings across models, and count hits against a trial drug list.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kge/models.hpp"
#include "kge/types.hpp"
#include "kge/vocab.hpp"

namespace kge {

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' ||
                     s[e - 1] == '\n'))
        --e;
    return s.substr(b, e - b);
}

}  // namespace detail

// One trimmed name per line; blank lines skipped.
inline std::vector<std::string> read_name_list(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        std::string t = detail::trim(line);
        if (!t.empty()) names.push_back(std::move(t));
    }
    return names;
}

struct CandidateSet {
    std::vector<std::uint32_t> drug_ids;          // candidate heads
    std::vector<std::uint32_t> target_ids;        // tails
    std::vector<std::uint32_t> treat_relation_ids;
};

namespace detail {

template <typename Resolve>
std::vector<std::uint32_t> resolve_names(const std::vector<std::string>& names,
                                         Resolve try_resolve, bool lenient,
                                         const std::string& what,
                                         std::vector<std::string>* warnings) {
    std::vector<std::uint32_t> ids;
    std::unordered_set<std::uint32_t> seen;
    for (const auto& name : names) {
        auto id = try_resolve(name);
        if (!id) {
            if (!lenient) throw LookupError(name);
            if (warnings) warnings->push_back("skipping unknown " + what + ": \"" + name + "\"");
            continue;
        }
        if (seen.insert(*id).second) ids.push_back(*id);
    }
    return ids;
}

}  // namespace detail

// Resolves the three name lists against the vocabulary. Duplicates collapse
// to their first occurrence. Unknown names throw (strict) or are skipped with
// a warning (lenient). An empty resolved list is always an error.
inline CandidateSet load_candidates(const std::string& drug_file,
                                    const std::string& target_file,
                                    const std::string& relation_file, const Vocabulary& vocab,
                                    bool lenient = false,
                                    std::vector<std::string>* warnings = nullptr) {
    auto entity = [&vocab](const std::string& n) { return vocab.try_entity_id(n); };
    auto relation = [&vocab](const std::string& n) { return vocab.try_relation_id(n); };

    CandidateSet out;
    out.drug_ids = detail::resolve_names(read_name_list(drug_file), entity, lenient, "drug",
                                         warnings);
    out.target_ids = detail::resolve_names(read_name_list(target_file), entity, lenient,
                                           "target", warnings);
    out.treat_relation_ids = detail::resolve_names(read_name_list(relation_file), relation,
                                                   lenient, "relation", warnings);

    if (out.drug_ids.empty()) throw Error("no usable drug candidates in " + drug_file);
    if (out.target_ids.empty()) throw Error("no usable targets in " + target_file);
    if (out.treat_relation_ids.empty())
        throw Error("no usable treat relations in " + relation_file);
    return out;
}

struct ScoredCandidate {
    std::uint32_t drug_id = 0;
    double best_score = 0.0;
    std::uint32_t best_target_id = 0;
    std::uint32_t best_relation_id = 0;
};

enum class Reduction { Max, Mean };

inline Reduction parse_reduction(const std::string& name) {
    if (name == "max") return Reduction::Max;
    if (name == "mean") return Reduction::Mean;
    throw ConfigError("unknown reduction: \"" + name + "\"");
}

// Scores every (drug, relation, target) combination. Each drug keeps its
// best-scoring (relation, target) pair; under Mean reduction the reported
// score is the mean over all pairs instead (the argmax pair is still
// recorded). Output sorted by score descending, drug id ascending on ties.
inline std::vector<ScoredCandidate> score_candidates(const ModelParams& params,
                                                     const CandidateSet& cands,
                                                     Reduction reduction = Reduction::Max) {
    std::vector<ScoredCandidate> out;
    out.reserve(cands.drug_ids.size());
    const double n_pairs =
        static_cast<double>(cands.treat_relation_ids.size()) *
        static_cast<double>(cands.target_ids.size());

    for (std::uint32_t drug : cands.drug_ids) {
        ScoredCandidate sc;
        sc.drug_id = drug;
        double best = 0.0, sum = 0.0;
        bool first = true;
        for (std::uint32_t rel : cands.treat_relation_ids) {
            for (std::uint32_t target : cands.target_ids) {
                const double s = score(params, Triple{drug, rel, target});
                sum += s;
                if (first || s > best) {
                    best = s;
                    sc.best_target_id = target;
                    sc.best_relation_id = rel;
                    first = false;
                }
            }
        }
        best = first ? 0.0 : best;
        sc.best_score = reduction == Reduction::Max ? best : sum / n_pairs;
        out.push_back(sc);
    }

    std::sort(out.begin(), out.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
        if (a.best_score != b.best_score) return a.best_score > b.best_score;
        return a.drug_id < b.drug_id;
    });
    return out;
}

inline std::vector<ScoredCandidate> top_k(const std::vector<ScoredCandidate>& scored,
                                          std::size_t k) {
    if (k < 1) throw ConfigError("k must be >= 1");
    const std::size_t n = std::min(k, scored.size());
    return {scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n)};
}

// ---------------------------------------------------------------------------
// Cross-model consensus

struct ModelRanking {
    std::string model;
    std::vector<std::string> drugs;  // ranked, best first
};

struct ConsensusEntry {
    std::string drug;
    int model_count = 0;
    std::vector<std::string> models;  // which rankings contain the drug
    double mean_position = 0.0;       // 1-based, averaged over those rankings
};

struct ConsensusReport {
    std::vector<ConsensusEntry> entries;       // count desc, mean position asc
    std::vector<std::string> intersection;     // drugs present in every ranking
};

// Drugs ranked by how many models list them, then by mean list position.
inline ConsensusReport consensus(const std::vector<ModelRanking>& rankings) {
    if (rankings.size() < 2) throw Error("consensus requires at least 2 rankings");

    struct Acc {
        std::vector<std::string> models;
        double position_sum = 0.0;
        std::size_t first_seen = 0;
    };
    std::unordered_map<std::string, Acc> acc;
    std::vector<std::string> order;  // first-appearance order for stable output

    for (const auto& ranking : rankings) {
        std::unordered_set<std::string> seen_in_list;
        for (std::size_t pos = 0; pos < ranking.drugs.size(); ++pos) {
            const std::string& drug = ranking.drugs[pos];
            if (!seen_in_list.insert(drug).second) continue;  // ignore dup within a list
            auto it = acc.find(drug);
            if (it == acc.end()) {
                it = acc.emplace(drug, Acc{{}, 0.0, order.size()}).first;
                order.push_back(drug);
            }
            it->second.models.push_back(ranking.model);
            it->second.position_sum += static_cast<double>(pos + 1);
        }
    }

    ConsensusReport rep;
    for (const auto& drug : order) {
        const Acc& a = acc.at(drug);
        ConsensusEntry e;
        e.drug = drug;
        e.model_count = static_cast<int>(a.models.size());
        e.models = a.models;
        e.mean_position = a.position_sum / static_cast<double>(a.models.size());
        rep.entries.push_back(std::move(e));
    }
    std::sort(rep.entries.begin(), rep.entries.end(),
              [](const ConsensusEntry& a, const ConsensusEntry& b) {
                  if (a.model_count != b.model_count) return a.model_count > b.model_count;
                  if (a.mean_position != b.mean_position)
                      return a.mean_position < b.mean_position;
                  return a.drug < b.drug;
              });

    for (const auto& e : rep.entries)
        if (e.model_count == static_cast<int>(rankings.size()))
            rep.intersection.push_back(e.drug);
    return rep;
}

struct ValidationResult {
    int hits = 0;
    std::vector<std::string> hit_drugs;  // in prediction order
};

// Counts predictions that appear in the trial list (exact match after
// whitespace trim, applied on load).
inline ValidationResult validate_against(const std::vector<std::string>& predictions,
                                         const std::vector<std::string>& trial_drugs) {
    if (trial_drugs.empty()) throw Error("trial drug list is empty");
    std::unordered_set<std::string> trials(trial_drugs.begin(), trial_drugs.end());
    ValidationResult res;
    std::unordered_set<std::string> counted;
    for (const auto& p : predictions) {
        if (trials.count(p) && counted.insert(p).second) {
            ++res.hits;
            res.hit_drugs.push_back(p);
        }
    }
    return res;
}

}  // namespace kge
