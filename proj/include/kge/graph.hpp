#pragma once
// TSV triple parsing, id encoding, deterministic splits and the known-true
// triple index behind filtered ranking.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "kge/types.hpp"
#include "kge/vocab.hpp"

namespace kge {

namespace detail {

// Plain byte-level UTF-8 check, no normalization.
inline bool valid_utf8(std::string_view s) {
    std::size_t i = 0;
    const std::size_t n = s.size();
    while (i < n) {
        const auto b0 = static_cast<unsigned char>(s[i]);
        std::size_t len;
        std::uint32_t cp;
        if (b0 < 0x80) {
            ++i;
            continue;
        } else if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            cp = b0 & 0x07;
        } else {
            return false;
        }
        if (i + len > n) return false;
        for (std::size_t k = 1; k < len; ++k) {
            const auto b = static_cast<unsigned char>(s[i + k]);
            if ((b & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (b & 0x3F);
        }
        // overlong forms, surrogates, out of range
        if (len == 2 && cp < 0x80) return false;
        if (len == 3 && (cp < 0x800 || (cp >= 0xD800 && cp <= 0xDFFF))) return false;
        if (len == 4 && (cp < 0x10000 || cp > 0x10FFFF)) return false;
        i += len;
    }
    return true;
}

inline void rstrip(std::string& s) {
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.pop_back();
}

}  // namespace detail

// One triple per line, exactly three tab-separated fields, LF or CRLF line
// endings, trailing whitespace stripped per field. Blank lines are skipped;
// duplicate lines are preserved at this stage.
inline std::vector<RawTriple> parse_triples(std::istream& in, const std::string& source = "<input>") {
    std::vector<RawTriple> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!detail::valid_utf8(line))
            throw ParseError(source + ":" + std::to_string(lineno) + ": invalid UTF-8", lineno);
        {
            std::string probe = line;
            detail::rstrip(probe);
            if (probe.empty()) continue;
        }
        std::string fields[3];
        std::size_t n_fields = 0;
        std::size_t start = 0;
        while (true) {
            auto tab = line.find('\t', start);
            const std::string field =
                tab == std::string::npos ? line.substr(start) : line.substr(start, tab - start);
            if (n_fields < 3) fields[n_fields] = field;
            ++n_fields;
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (n_fields != 3)
            throw ParseError(source + ":" + std::to_string(lineno) + ": expected 3 tab-separated fields, got " +
                                 std::to_string(n_fields),
                             lineno);
        for (auto& f : fields) {
            detail::rstrip(f);
            if (f.empty())
                throw ParseError(source + ":" + std::to_string(lineno) + ": empty field", lineno);
        }
        out.push_back(RawTriple{fields[0], fields[1], fields[2]});
    }
    return out;
}

inline std::vector<RawTriple> parse_triples_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    return parse_triples(in, path);
}

// Order-preserving name -> id translation. Unknown names are a hard error so
// corrupt inputs fail loudly.
inline std::vector<Triple> encode(std::span<const RawTriple> triples, const Vocabulary& vocab) {
    std::vector<Triple> out;
    out.reserve(triples.size());
    for (const auto& tr : triples)
        out.push_back(Triple{vocab.entity_id(tr.head), vocab.relation_id(tr.relation),
                             vocab.entity_id(tr.tail)});
    return out;
}

inline RawTriple decode(const Triple& tr, const Vocabulary& vocab) {
    return RawTriple{vocab.entity_name(tr.h), vocab.relation_name(tr.r), vocab.entity_name(tr.t)};
}

// First-occurrence dedup; keeps input order of survivors.
inline std::vector<Triple> dedup_triples(std::span<const Triple> triples) {
    std::vector<Triple> out;
    out.reserve(triples.size());
    std::unordered_set<Triple, TripleHash> seen;
    for (const auto& tr : triples)
        if (seen.insert(tr).second) out.push_back(tr);
    return out;
}

struct SplitRatios {
    double train = 0.9;
    double valid = 0.05;
    double test = 0.05;
};

struct Split {
    std::vector<Triple> train;
    std::vector<Triple> valid;
    std::vector<Triple> test;
};

// Dedup, shuffle deterministically by seed, then partition contiguously:
// |train| = round(f_train*N), |valid| = round(f_valid*N), remainder to test.
// A part that ends up empty while its ratio is positive is a warning, not
// an error.
inline Split split_triples(std::span<const Triple> triples, const SplitRatios& ratios,
                           std::uint64_t seed, std::string* warning = nullptr) {
    if (ratios.train <= 0 || ratios.valid <= 0 || ratios.test <= 0)
        throw ConfigError("split ratios must be positive");
    if (std::abs(ratios.train + ratios.valid + ratios.test - 1.0) > 1e-9)
        throw ConfigError("split ratios must sum to 1");

    std::vector<Triple> pool = dedup_triples(triples);
    std::mt19937_64 rng(seed);
    std::shuffle(pool.begin(), pool.end(), rng);

    const auto n = pool.size();
    auto n_train = static_cast<std::size_t>(std::llround(ratios.train * static_cast<double>(n)));
    auto n_valid = static_cast<std::size_t>(std::llround(ratios.valid * static_cast<double>(n)));
    n_train = std::min(n_train, n);
    n_valid = std::min(n_valid, n - n_train);

    Split split;
    split.train.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.valid.assign(pool.begin() + static_cast<std::ptrdiff_t>(n_train),
                       pool.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid));
    split.test.assign(pool.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid), pool.end());

    if (warning && n > 0) {
        std::ostringstream w;
        if (split.train.empty()) w << "train split is empty; ";
        if (split.valid.empty()) w << "valid split is empty; ";
        if (split.test.empty()) w << "test split is empty; ";
        *warning = w.str();
    }
    return split;
}

// Membership over all known-true triples (train + valid + test). Used by the
// filtered ranking protocol and, optionally, by negative sampling.
class FilterIndex {
public:
    FilterIndex() = default;

    explicit FilterIndex(const Split& split) {
        insert_all(split.train);
        insert_all(split.valid);
        insert_all(split.test);
    }

    void insert(const Triple& tr) { set_.insert(tr); }
    void insert_all(std::span<const Triple> triples) {
        for (const auto& tr : triples) set_.insert(tr);
    }

    bool contains(const Triple& tr) const { return set_.count(tr) != 0; }
    std::size_t size() const { return set_.size(); }

private:
    std::unordered_set<Triple, TripleHash> set_;
};

// Triple file writer; the inverse of parse_triples + encode.
inline void write_triples(const std::string& path, std::span<const Triple> triples,
                          const Vocabulary& vocab) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    for (const auto& tr : triples) {
        out << vocab.entity_name(tr.h) << '\t' << vocab.relation_name(tr.r) << '\t'
            << vocab.entity_name(tr.t) << '\n';
    }
    if (!out) throw IoError("short write: " + path);
}

// Parse + encode a split file that was written against a known vocabulary.
inline std::vector<Triple> read_triples(const std::string& path, const Vocabulary& vocab) {
    const auto raw = parse_triples_file(path);
    return encode(raw, vocab);
}

}  // namespace kge
