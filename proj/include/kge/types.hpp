#pragma once
// Core domain types and the error hierarchy shared by every module.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace kge {

// One (head, relation, tail) statement with names resolved to dense ids.
struct Triple {
    std::uint32_t h = 0;
    std::uint32_t r = 0;
    std::uint32_t t = 0;

    friend bool operator==(const Triple&, const Triple&) = default;
};

struct TripleHash {
    std::size_t operator()(const Triple& x) const noexcept {
        // FNV-1a over the three ids
        std::uint64_t v = 1469598103934665603ull;
        for (std::uint32_t f : {x.h, x.r, x.t}) {
            v ^= f;
            v *= 1099511628211ull;
        }
        return static_cast<std::size_t>(v);
    }
};

// A triple as read from a TSV file, names not yet resolved.
struct RawTriple {
    std::string head;
    std::string relation;
    std::string tail;

    friend bool operator==(const RawTriple&, const RawTriple&) = default;
};

// ---------------------------------------------------------------------------
// Errors. All failures surface as exceptions rooted at Error; the CLI maps
// them to a nonzero exit with the message on stderr.

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input text (bad field count, bad encoding). Carries the 1-based
// line number so callers can report "file:line".
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line)
        : Error(msg), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// A name that should have been in a vocabulary or dictionary was not.
class LookupError : public Error {
public:
    explicit LookupError(const std::string& name)
        : Error("unknown name: \"" + name + "\""), name_(name) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

// Invalid configuration value or unknown configuration key.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Filesystem-level failure (missing file, short write, ...).
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace kge
