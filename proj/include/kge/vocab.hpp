#pragma once
// Bidirectional name <-> dense-id dictionaries for entities and relations,
// plus the "Type::name" prefix convention used to tag entity categories.

#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kge/types.hpp"

namespace kge {

// Ids are dense, assigned in first-seen order, and stable for the lifetime
// of the vocabulary. Immutable after construction; safe for concurrent reads.
class Vocabulary {
public:
    std::uint32_t add_entity(const std::string& name) {
        auto it = entity_index_.find(name);
        if (it != entity_index_.end()) return it->second;
        auto id = static_cast<std::uint32_t>(entity_names_.size());
        entity_names_.push_back(name);
        entity_index_.emplace(name, id);
        return id;
    }

    std::uint32_t add_relation(const std::string& name) {
        auto it = relation_index_.find(name);
        if (it != relation_index_.end()) return it->second;
        auto id = static_cast<std::uint32_t>(relation_names_.size());
        relation_names_.push_back(name);
        relation_index_.emplace(name, id);
        return id;
    }

    std::optional<std::uint32_t> try_entity_id(const std::string& name) const {
        auto it = entity_index_.find(name);
        if (it == entity_index_.end()) return std::nullopt;
        return it->second;
    }

    std::optional<std::uint32_t> try_relation_id(const std::string& name) const {
        auto it = relation_index_.find(name);
        if (it == relation_index_.end()) return std::nullopt;
        return it->second;
    }

    std::uint32_t entity_id(const std::string& name) const {
        auto id = try_entity_id(name);
        if (!id) throw LookupError(name);
        return *id;
    }

    std::uint32_t relation_id(const std::string& name) const {
        auto id = try_relation_id(name);
        if (!id) throw LookupError(name);
        return *id;
    }

    const std::string& entity_name(std::uint32_t id) const { return entity_names_.at(id); }
    const std::string& relation_name(std::uint32_t id) const { return relation_names_.at(id); }

    const std::vector<std::string>& entity_names() const { return entity_names_; }
    const std::vector<std::string>& relation_names() const { return relation_names_; }

    std::size_t n_entities() const { return entity_names_.size(); }
    std::size_t n_relations() const { return relation_names_.size(); }

private:
    std::vector<std::string> entity_names_;
    std::vector<std::string> relation_names_;
    std::unordered_map<std::string, std::uint32_t> entity_index_;
    std::unordered_map<std::string, std::uint32_t> relation_index_;
};

// Entity ids in first-appearance order scanning (head, tail) per triple;
// relation ids in first-appearance order.
inline Vocabulary build_vocab(std::span<const RawTriple> triples) {
    Vocabulary vocab;
    for (const auto& tr : triples) {
        vocab.add_entity(tr.head);
        vocab.add_relation(tr.relation);
        vocab.add_entity(tr.tail);
    }
    return vocab;
}

// Category tag of an entity name: the substring before the first "::",
// "Unknown" when the separator is absent.
inline std::string entity_type(std::string_view name) {
    auto pos = name.find("::");
    if (pos == std::string_view::npos) return "Unknown";
    return std::string(name.substr(0, pos));
}

// Dictionary files: "name<TAB>id" per line, in id order.
inline void write_dict(const std::string& path, const std::vector<std::string>& names) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    for (std::size_t i = 0; i < names.size(); ++i)
        out << names[i] << '\t' << i << '\n';
    if (!out) throw IoError("short write: " + path);
}

inline std::vector<std::string> read_dict(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::vector<std::string> names;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto tab = line.rfind('\t');
        if (tab == std::string::npos)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected \"name<TAB>id\"", lineno);
        const std::string name = line.substr(0, tab);
        const std::string id_str = line.substr(tab + 1);
        std::size_t id = 0;
        try {
            id = std::stoull(id_str);
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": bad id \"" + id_str + "\"", lineno);
        }
        if (id != names.size())
            throw ParseError(path + ":" + std::to_string(lineno) + ": ids must be dense and in order", lineno);
        names.push_back(name);
    }
    return names;
}

// Rebuild a vocabulary from the two dictionary files written by ingest.
inline Vocabulary load_vocab(const std::string& entities_path, const std::string& relations_path) {
    Vocabulary vocab;
    for (const auto& name : read_dict(entities_path)) vocab.add_entity(name);
    for (const auto& name : read_dict(relations_path)) vocab.add_relation(name);
    return vocab;
}

}  // namespace kge
