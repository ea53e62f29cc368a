#pragma once
// Flat "key = value" run configuration. '#' starts a comment, blank lines are
// skipped, keys are strict: anything unrecognized is an error naming the key.

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "kge/eval.hpp"
#include "kge/train.hpp"
#include "kge/types.hpp"

namespace kge {

enum class EvalSetting { Raw, Filtered, Both };

inline std::string to_string(EvalSetting s) {
    switch (s) {
        case EvalSetting::Raw: return "raw";
        case EvalSetting::Filtered: return "filtered";
        case EvalSetting::Both: return "both";
    }
    return "?";
}

inline EvalSetting parse_eval_setting(const std::string& name) {
    if (name == "raw") return EvalSetting::Raw;
    if (name == "filtered") return EvalSetting::Filtered;
    if (name == "both") return EvalSetting::Both;
    throw ConfigError("unknown setting: \"" + name + "\"");
}

// Everything a full pipeline run needs: training hyperparameters plus file
// locations and evaluation/ranking options.
struct RunConfig {
    TrainConfig train;

    std::string triples;         // raw TSV for ingest
    std::string splits_dir;      // where train/valid/test.tsv + dicts live
    std::string checkpoint_dir;
    int checkpoint_every = 50;   // epochs between periodic checkpoints

    EvalSetting setting = EvalSetting::Filtered;
    SidePolicy side = SidePolicy::HeadOnly;
    int top_k = 100;

    std::string drugs;      // candidate list files for ranking
    std::string targets;
    std::string relations;
    std::string trials;

    void validate() const {
        train.validate();
        if (checkpoint_every < 1) throw ConfigError("checkpoint_every must be >= 1");
        if (top_k < 1) throw ConfigError("top_k must be >= 1");
    }
};

namespace detail {

inline long long config_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key \"" + key + "\": not an integer: \"" + value + "\"");
    }
}

inline double config_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key \"" + key + "\": not a number: \"" + value + "\"");
    }
}

inline bool config_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError("config key \"" + key + "\": not a boolean: \"" + value + "\"");
}

inline std::string config_trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

}  // namespace detail

inline void apply_config_entry(RunConfig& cfg, const std::string& key,
                               const std::string& value) {
    TrainConfig& t = cfg.train;
    if (key == "model")
        t.model = parse_model_kind(value);
    else if (key == "dim")
        t.dim = static_cast<int>(detail::config_int(key, value));
    else if (key == "epochs")
        t.epochs = static_cast<int>(detail::config_int(key, value));
    else if (key == "batch_size")
        t.batch_size = static_cast<int>(detail::config_int(key, value));
    else if (key == "negatives")
        t.negatives = static_cast<int>(detail::config_int(key, value));
    else if (key == "optimizer")
        t.optimizer = parse_optimizer(value);
    else if (key == "learning_rate")
        t.learning_rate = detail::config_double(key, value);
    else if (key == "adam_beta1")
        t.adam_beta1 = detail::config_double(key, value);
    else if (key == "adam_beta2")
        t.adam_beta2 = detail::config_double(key, value);
    else if (key == "adam_eps")
        t.adam_eps = detail::config_double(key, value);
    else if (key == "l2_mode")
        t.l2_mode = parse_l2_mode(value);
    else if (key == "l2_lambda")
        t.l2_lambda = detail::config_double(key, value);
    else if (key == "rescal_symmetric")
        t.rescal_symmetric = detail::config_bool(key, value);
    else if (key == "filter_false_negatives")
        t.filter_false_negatives = detail::config_bool(key, value);
    else if (key == "seed")
        t.seed = static_cast<std::uint64_t>(detail::config_int(key, value));
    else if (key == "threads")
        t.threads = static_cast<int>(detail::config_int(key, value));
    else if (key == "triples")
        cfg.triples = value;
    else if (key == "splits_dir")
        cfg.splits_dir = value;
    else if (key == "checkpoint_dir")
        cfg.checkpoint_dir = value;
    else if (key == "checkpoint_every")
        cfg.checkpoint_every = static_cast<int>(detail::config_int(key, value));
    else if (key == "setting")
        cfg.setting = parse_eval_setting(value);
    else if (key == "side")
        cfg.side = parse_side_policy(value);
    else if (key == "top_k")
        cfg.top_k = static_cast<int>(detail::config_int(key, value));
    else if (key == "drugs")
        cfg.drugs = value;
    else if (key == "targets")
        cfg.targets = value;
    else if (key == "relations")
        cfg.relations = value;
    else if (key == "trials")
        cfg.trials = value;
    else
        throw ConfigError("unknown config key: \"" + key + "\"");
}

inline RunConfig parse_run_config(std::istream& in, const std::string& source = "<config>") {
    RunConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = detail::config_trim(line);
        if (line.empty()) continue;

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(source + ": expected key = value", line_no);
        const std::string key = detail::config_trim(line.substr(0, eq));
        const std::string value = detail::config_trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError(source + ": empty config key", line_no);
        apply_config_entry(cfg, key, value);
    }
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return parse_run_config(in, path);
}

// Echo used by checkpoint .meta sidecars.
inline std::map<std::string, std::string> config_echo(const RunConfig& cfg) {
    const TrainConfig& t = cfg.train;
    std::map<std::string, std::string> kv;
    kv["model"] = to_string(t.model);
    kv["dim"] = std::to_string(t.dim);
    kv["epochs"] = std::to_string(t.epochs);
    kv["batch_size"] = std::to_string(t.batch_size);
    kv["negatives"] = std::to_string(t.negatives);
    kv["optimizer"] = to_string(t.optimizer);
    std::ostringstream lr;
    lr << t.learning_rate;
    kv["learning_rate"] = lr.str();
    kv["l2_mode"] = to_string(t.l2_mode);
    std::ostringstream lam;
    lam << t.l2_lambda;
    kv["l2_lambda"] = lam.str();
    kv["seed"] = std::to_string(t.seed);
    return kv;
}

}  // namespace kge
