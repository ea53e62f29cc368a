// kge: knowledge-graph embedding pipeline front door.
//
//   kge ingest <triples.tsv> --out DIR     parse, split, write dictionaries
//   kge train --config FILE                train a model, write checkpoints
//   kge eval --checkpoint F --splits DIR   ranking metrics on a triple file
//   kge rank --checkpoint F --splits DIR   score drug candidates, top-K list
//   kge consensus A.top B.top ...          intersect per-model rankings
//
// All diagnostics go to stderr; data goes to stdout or files. Exit code 0
// only when no error path was taken. KGE_THREADS caps worker counts (0 or
// unset = single-threaded deterministic mode).

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kge/checkpoint.hpp"
#include "kge/config.hpp"
#include "kge/eval.hpp"
#include "kge/graph.hpp"
#include "kge/models.hpp"
#include "kge/repurpose.hpp"
#include "kge/train.hpp"
#include "kge/types.hpp"
#include "kge/vocab.hpp"

namespace fs = std::filesystem;

namespace {

int thread_cap() {
    const char* env = std::getenv("KGE_THREADS");
    if (!env || !*env) return 0;
    const int v = std::atoi(env);
    return v > 0 ? v : 0;
}

int effective_threads(int requested) {
    const int cap = thread_cap();
    return std::min(requested, cap);
}

kge::Vocabulary load_split_vocab(const std::string& splits_dir) {
    return kge::load_vocab(splits_dir + "/entities.dict", splits_dir + "/relations.dict");
}

void check_vocab_match(const kge::ModelParams& params, const kge::Vocabulary& vocab,
                       const std::string& ckpt) {
    if (params.n_entities != vocab.n_entities() || params.n_relations != vocab.n_relations())
        throw kge::Error("checkpoint/vocabulary mismatch: " + ckpt + " holds " +
                         std::to_string(params.n_entities) + " entities / " +
                         std::to_string(params.n_relations) + " relations, dictionaries hold " +
                         std::to_string(vocab.n_entities()) + " / " +
                         std::to_string(vocab.n_relations()));
}

kge::SplitRatios parse_ratios(const std::string& text) {
    kge::SplitRatios r;
    if (std::sscanf(text.c_str(), "%lf,%lf,%lf", &r.train, &r.valid, &r.test) != 3)
        throw kge::ConfigError("ratios must be \"train,valid,test\", got \"" + text + "\"");
    return r;
}

// ---------------------------------------------------------------------------

int run_ingest(const std::string& triples_path, const std::string& out_dir,
               const std::string& ratios_text, std::uint64_t seed) {
    const auto raw = kge::parse_triples_file(triples_path);
    auto vocab = kge::build_vocab(raw);
    const auto encoded = kge::encode(raw, vocab);

    std::string warning;
    const auto split = kge::split_triples(encoded, parse_ratios(ratios_text), seed, &warning);
    if (!warning.empty()) std::cerr << "warning: " << warning << "\n";

    fs::create_directories(out_dir);
    kge::write_dict(out_dir + "/entities.dict", vocab.entity_names());
    kge::write_dict(out_dir + "/relations.dict", vocab.relation_names());
    kge::write_triples(out_dir + "/train.tsv", split.train, vocab);
    kge::write_triples(out_dir + "/valid.tsv", split.valid, vocab);
    kge::write_triples(out_dir + "/test.tsv", split.test, vocab);

    const std::size_t unique = split.train.size() + split.valid.size() + split.test.size();
    std::cout << "entities=" << vocab.n_entities() << "\n"
              << "relations=" << vocab.n_relations() << "\n"
              << "triples=" << raw.size() << "\n"
              << "unique=" << unique << "\n"
              << "train=" << split.train.size() << "\n"
              << "valid=" << split.valid.size() << "\n"
              << "test=" << split.test.size() << "\n";
    return 0;
}

int run_train(const std::string& config_path, std::optional<std::uint64_t> seed_override,
              const std::string& resume_path) {
    kge::RunConfig cfg = kge::load_run_config(config_path);
    if (seed_override) cfg.train.seed = *seed_override;
    if (cfg.splits_dir.empty()) throw kge::ConfigError("config is missing splits_dir");
    if (cfg.checkpoint_dir.empty()) throw kge::ConfigError("config is missing checkpoint_dir");
    cfg.train.threads = effective_threads(cfg.train.threads);
    cfg.validate();
    if (cfg.train.threads > 1)
        std::cerr << "warning: parallel training is nondeterministic (threads="
                  << cfg.train.threads << ")\n";

    const auto vocab = load_split_vocab(cfg.splits_dir);
    const auto train_triples = kge::read_triples(cfg.splits_dir + "/train.tsv", vocab);

    kge::FilterIndex filter;
    filter.insert_all(train_triples);
    for (const char* part : {"/valid.tsv", "/test.tsv"}) {
        const std::string path = cfg.splits_dir + part;
        if (fs::exists(path)) filter.insert_all(kge::read_triples(path, vocab));
    }

    kge::ModelParams params;
    int start_epoch = 0;
    if (!resume_path.empty()) {
        params = kge::load_checkpoint(resume_path);
        check_vocab_match(params, vocab, resume_path);
        if (params.kind != cfg.train.model || params.dim != cfg.train.dim)
            throw kge::Error("resume checkpoint disagrees with config: checkpoint is " +
                             kge::to_string(params.kind) + " dim " +
                             std::to_string(params.dim));
        const auto meta = kge::read_meta(resume_path + ".meta");
        const auto it = meta.find("epoch");
        if (it == meta.end())
            throw kge::Error("cannot resume: " + resume_path + ".meta has no epoch entry");
        start_epoch = std::atoi(it->second.c_str());
        std::cerr << "resuming from epoch " << start_epoch << "\n";
    } else {
        params = kge::init_params(cfg.train.model, vocab.n_entities(), vocab.n_relations(),
                                  cfg.train.dim, cfg.train.seed);
    }

    fs::create_directories(cfg.checkpoint_dir);
    const std::string ckpt = cfg.checkpoint_dir + "/" + kge::to_string(cfg.train.model) + ".ckpt";

    auto write_ckpt = [&](int epoch, double loss) {
        kge::save_checkpoint(params, ckpt);
        auto meta = kge::config_echo(cfg);
        meta["epoch"] = std::to_string(epoch + 1);  // epochs completed
        std::ostringstream ls;
        ls << loss;
        meta["loss"] = ls.str();
        kge::write_meta(ckpt + ".meta", meta);
    };

    const auto report = kge::train_inplace(
        params, train_triples, cfg.train, &filter,
        [&](int epoch, double loss) {
            if ((epoch + 1) % cfg.checkpoint_every == 0) write_ckpt(epoch, loss);
            if ((epoch + 1) % 10 == 0 || epoch == 0)
                std::cerr << "epoch " << epoch + 1 << " loss " << loss << "\n";
            return true;
        },
        start_epoch);

    if (report.diverged) {
        std::cerr << "error: training diverged at epoch " << report.diverged_epoch << ": "
                  << report.message << "\n";
        std::cerr << (fs::exists(ckpt) ? "last periodic checkpoint retained: " + ckpt
                                       : "no checkpoint was written")
                  << "\n";
        return 1;
    }

    const int final_epoch = cfg.train.epochs - 1;
    write_ckpt(final_epoch, report.epoch_loss.empty() ? 0.0 : report.epoch_loss.back());
    std::cout << "model=" << kge::to_string(cfg.train.model) << "\n"
              << "epochs=" << cfg.train.epochs << "\n"
              << "final_loss=" << (report.epoch_loss.empty() ? 0.0 : report.epoch_loss.back())
              << "\n"
              << "wall_seconds=" << report.wall_seconds << "\n"
              << "checksum=" << report.params_checksum << "\n"
              << "checkpoint=" << ckpt << "\n";
    return 0;
}

int run_eval(const std::string& ckpt, const std::string& splits_dir,
             const std::string& test_override, const std::string& setting_name,
             const std::string& side_name, const std::string& ranks_out,
             const std::string& report_out) {
    const auto params = kge::load_checkpoint(ckpt);
    const auto vocab = load_split_vocab(splits_dir);
    check_vocab_match(params, vocab, ckpt);

    const std::string test_path =
        test_override.empty() ? splits_dir + "/test.tsv" : test_override;
    const auto test_triples = kge::read_triples(test_path, vocab);
    if (test_triples.empty()) throw kge::Error("no triples to evaluate in " + test_path);

    kge::FilterIndex filter;
    for (const char* part : {"/train.tsv", "/valid.tsv", "/test.tsv"}) {
        const std::string path = splits_dir + part;
        if (fs::exists(path)) filter.insert_all(kge::read_triples(path, vocab));
    }
    filter.insert_all(test_triples);

    const kge::EvalSetting setting = kge::parse_eval_setting(setting_name);
    const kge::SidePolicy side = kge::parse_side_policy(side_name);
    const int threads = thread_cap();

    std::vector<kge::RankSetting> settings;
    if (setting != kge::EvalSetting::Filtered) settings.push_back(kge::RankSetting::Raw);
    if (setting != kge::EvalSetting::Raw) settings.push_back(kge::RankSetting::Filtered);

    std::string all_blocks;
    std::vector<int> last_ranks;
    for (const auto s : settings) {
        const auto report = kge::evaluate(params, test_triples, s, side, &filter, threads);
        const std::string block = kge::format_report(report);
        std::cout << block;
        if (settings.size() > 1 && s == settings.front()) std::cout << "\n";
        all_blocks += block;
        if (settings.size() > 1 && s == settings.front()) all_blocks += "\n";
        last_ranks = report.ranks;
    }

    if (!report_out.empty()) {
        std::ofstream out(report_out, std::ios::binary | std::ios::trunc);
        if (!out) throw kge::IoError("cannot open " + report_out + " for writing");
        out << all_blocks;
    }
    if (!ranks_out.empty()) {
        std::ofstream out(ranks_out, std::ios::binary | std::ios::trunc);
        if (!out) throw kge::IoError("cannot open " + ranks_out + " for writing");
        for (std::size_t i = 0; i < last_ranks.size(); ++i)
            out << i << '\t' << last_ranks[i] << '\n';
    }
    return 0;
}

int run_rank(const std::string& ckpt, const std::string& splits_dir, const std::string& drugs,
             const std::string& targets, const std::string& relations, int k, bool lenient,
             const std::string& reduction_name, const std::string& out_path) {
    const auto params = kge::load_checkpoint(ckpt);
    const auto vocab = load_split_vocab(splits_dir);
    check_vocab_match(params, vocab, ckpt);

    std::vector<std::string> warnings;
    const auto cands =
        kge::load_candidates(drugs, targets, relations, vocab, lenient, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

    const auto scored =
        kge::score_candidates(params, cands, kge::parse_reduction(reduction_name));
    const auto top = kge::top_k(scored, static_cast<std::size_t>(k));

    std::ostringstream lines;
    for (std::size_t i = 0; i < top.size(); ++i) {
        char score_buf[32];
        std::snprintf(score_buf, sizeof(score_buf), "%.6f", top[i].best_score);
        lines << i + 1 << '\t' << vocab.entity_name(top[i].drug_id) << '\t' << score_buf
              << '\t' << vocab.relation_name(top[i].best_relation_id) << '\t'
              << vocab.entity_name(top[i].best_target_id) << '\n';
    }

    if (out_path.empty()) {
        std::cout << lines.str();
    } else {
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        if (!out) throw kge::IoError("cannot open " + out_path + " for writing");
        out << lines.str();
    }
    return 0;
}

// Accepts either the 5-column files cmd_rank writes (drug name = column 2)
// or plain one-name-per-line lists.
std::vector<std::string> read_ranking_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw kge::IoError("cannot open " + path);
    std::vector<std::string> drugs;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t tab1 = line.find('\t');
        if (tab1 == std::string::npos) {
            drugs.push_back(line);
            continue;
        }
        const std::size_t tab2 = line.find('\t', tab1 + 1);
        drugs.push_back(line.substr(tab1 + 1, tab2 == std::string::npos ? std::string::npos
                                                                        : tab2 - tab1 - 1));
    }
    return drugs;
}

int run_consensus(const std::vector<std::string>& list_files, const std::string& trial_file,
                  const std::string& out_path) {
    if (list_files.size() < 2)
        throw kge::Error("consensus requires at least 2 ranking files");

    std::vector<kge::ModelRanking> rankings;
    for (const auto& path : list_files) {
        kge::ModelRanking r;
        r.model = fs::path(path).stem().string();
        r.drugs = read_ranking_file(path);
        rankings.push_back(std::move(r));
    }

    const auto report = kge::consensus(rankings);

    std::ostringstream lines;
    std::vector<std::string> emitted;
    for (const auto& e : report.entries) {
        if (e.model_count < 2) continue;  // consensus = agreement of >= 2 models
        lines << e.drug << '\t' << e.model_count << '\t';
        for (std::size_t i = 0; i < e.models.size(); ++i)
            lines << (i ? "," : "") << e.models[i];
        lines << '\n';
        emitted.push_back(e.drug);
    }

    if (!trial_file.empty()) {
        const auto trials = kge::read_name_list(trial_file);
        const auto result = kge::validate_against(emitted, trials);
        lines << "hits=" << result.hits << '\n';
    }

    if (out_path.empty()) {
        std::cout << lines.str();
    } else {
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        if (!out) throw kge::IoError("cannot open " + out_path + " for writing");
        out << lines.str();
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"knowledge-graph embedding pipeline"};
    app.require_subcommand(1);

    // ingest
    std::string in_triples, in_out, in_ratios = "0.9,0.05,0.05";
    std::uint64_t in_seed = 42;
    auto* ingest = app.add_subcommand("ingest", "parse a triples TSV, split, write dictionaries");
    ingest->add_option("triples", in_triples, "tab-separated (head, relation, tail) file")
        ->required();
    ingest->add_option("--out", in_out, "output directory")->required();
    ingest->add_option("--ratios", in_ratios, "train,valid,test fractions");
    ingest->add_option("--seed", in_seed, "shuffle seed");

    // train
    std::string tr_config, tr_resume;
    std::optional<std::uint64_t> tr_seed;
    auto* train = app.add_subcommand("train", "train a model per a config file");
    train->add_option("--config", tr_config, "key = value config file")->required();
    train->add_option("--seed", tr_seed, "override the config seed");
    train->add_option("--resume", tr_resume, "checkpoint to continue from");

    // eval
    std::string ev_ckpt, ev_splits, ev_test, ev_setting = "filtered", ev_side = "head";
    std::string ev_ranks_out, ev_report_out;
    auto* eval = app.add_subcommand("eval", "ranking metrics for a checkpoint");
    eval->add_option("--checkpoint", ev_ckpt, "checkpoint file")->required();
    eval->add_option("--splits", ev_splits, "directory written by ingest")->required();
    eval->add_option("--test", ev_test, "triple file to evaluate (default: splits/test.tsv)");
    eval->add_option("--setting", ev_setting, "raw, filtered, or both");
    eval->add_option("--side", ev_side, "head, tail, or both");
    eval->add_option("--ranks-out", ev_ranks_out, "write per-query ranks here");
    eval->add_option("--report-out", ev_report_out, "write the metric block here");

    // rank
    std::string rk_ckpt, rk_splits, rk_drugs, rk_targets, rk_relations, rk_out;
    std::string rk_reduction = "max";
    int rk_k = 100;
    bool rk_lenient = false;
    auto* rank = app.add_subcommand("rank", "score drug candidates against targets");
    rank->add_option("--checkpoint", rk_ckpt, "checkpoint file")->required();
    rank->add_option("--splits", rk_splits, "directory written by ingest")->required();
    rank->add_option("--drugs", rk_drugs, "candidate drug names, one per line")->required();
    rank->add_option("--targets", rk_targets, "target names, one per line")->required();
    rank->add_option("--relations", rk_relations, "treat relation names, one per line")
        ->required();
    rank->add_option("--k", rk_k, "how many drugs to keep");
    rank->add_flag("--lenient", rk_lenient, "skip unknown names instead of failing");
    rank->add_option("--reduction", rk_reduction, "max or mean over (relation, target)");
    rank->add_option("--out", rk_out, "output file (default: stdout)");

    // consensus
    std::vector<std::string> cs_lists;
    std::string cs_trials, cs_out;
    auto* cons = app.add_subcommand("consensus", "intersect per-model rankings");
    cons->add_option("lists", cs_lists, "two or more ranking files")->required();
    cons->add_option("--trials", cs_trials, "trial drug list to count hits against");
    cons->add_option("--out", cs_out, "output file (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) return run_ingest(in_triples, in_out, in_ratios, in_seed);
        if (*train) return run_train(tr_config, tr_seed, tr_resume);
        if (*eval)
            return run_eval(ev_ckpt, ev_splits, ev_test, ev_setting, ev_side, ev_ranks_out,
                            ev_report_out);
        if (*rank)
            return run_rank(rk_ckpt, rk_splits, rk_drugs, rk_targets, rk_relations, rk_k,
                            rk_lenient, rk_reduction, rk_out);
        if (*cons) return run_consensus(cs_lists, cs_trials, cs_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
