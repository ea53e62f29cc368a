#pragma once
// Mini-batch training: uniform negative corruption, logistic loss, sparse
// SGD/Adam updates, optional L2 regularization or entity projection.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "kge/graph.hpp"
#include "kge/models.hpp"
#include "kge/types.hpp"

namespace kge {

enum class Optimizer { SGD, Adam };

inline std::string to_string(Optimizer o) { return o == Optimizer::SGD ? "sgd" : "adam"; }

inline Optimizer parse_optimizer(const std::string& name) {
    if (name == "sgd") return Optimizer::SGD;
    if (name == "adam") return Optimizer::Adam;
    throw ConfigError("unknown optimizer: \"" + name + "\"");
}

// Auto picks projection for the translational models and a small L2 penalty
// for the rotational/bilinear/complex ones.
enum class L2Mode { Auto, None, Penalty, ProjectEntities };

inline std::string to_string(L2Mode m) {
    switch (m) {
        case L2Mode::Auto: return "auto";
        case L2Mode::None: return "none";
        case L2Mode::Penalty: return "penalty";
        case L2Mode::ProjectEntities: return "project_entities";
    }
    return "?";
}

inline L2Mode parse_l2_mode(const std::string& name) {
    for (L2Mode m : {L2Mode::Auto, L2Mode::None, L2Mode::Penalty, L2Mode::ProjectEntities})
        if (to_string(m) == name) return m;
    throw ConfigError("unknown l2_mode: \"" + name + "\"");
}

inline L2Mode resolve_l2_mode(L2Mode mode, ModelKind kind) {
    if (mode != L2Mode::Auto) return mode;
    switch (kind) {
        case ModelKind::TransE_L1:
        case ModelKind::TransE_L2: return L2Mode::ProjectEntities;
        default: return L2Mode::Penalty;
    }
}

struct TrainConfig {
    ModelKind model = ModelKind::TransE_L2;
    int dim = 400;
    int epochs = 100;
    int batch_size = 32;
    int negatives = 16;  // k corruptions per positive
    Optimizer optimizer = Optimizer::Adam;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    L2Mode l2_mode = L2Mode::Auto;
    double l2_lambda = 1e-5;
    bool rescal_symmetric = false;
    bool filter_false_negatives = false;
    std::uint64_t seed = 42;
    int threads = 0;  // 0 = single-threaded deterministic

    void validate() const {
        if (dim < 1) throw ConfigError("dim must be >= 1");
        if (epochs < 1) throw ConfigError("epochs must be >= 1");
        if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
        if (negatives < 1) throw ConfigError("negatives must be >= 1");
        if (!(learning_rate > 0)) throw ConfigError("learning_rate must be > 0");
        if (adam_beta1 < 0 || adam_beta1 >= 1 || adam_beta2 < 0 || adam_beta2 >= 1)
            throw ConfigError("adam betas must lie in [0, 1)");
        if (!(adam_eps > 0)) throw ConfigError("adam_eps must be > 0");
        if (l2_lambda < 0) throw ConfigError("l2_lambda must be >= 0");
        if (threads < 0) throw ConfigError("threads must be >= 0");
    }
};

struct LabeledTriple {
    Triple triple;
    int y;  // +1 = observed positive, -1 = corruption
};

// ---------------------------------------------------------------------------
// Negative sampling

struct NegativeSample {
    std::vector<LabeledTriple> negatives;
    bool degenerate = false;  // corruption impossible (single-entity KG)
};

// k corruptions of `triple`, each replacing exactly one of {head, tail}
// (side chosen with probability 1/2, replacement uniform over entities).
// A draw that reproduces the original triple — or, when `filter` is given, a
// known-true triple — is re-drawn up to 100 times, then kept.
inline NegativeSample sample_negatives(const Triple& triple, int k, std::size_t n_entities,
                                       std::mt19937_64& rng,
                                       const FilterIndex* filter = nullptr) {
    if (k < 1) throw ConfigError("negatives must be >= 1");
    NegativeSample out;
    out.negatives.reserve(k);

    if (n_entities <= 1) {
        out.degenerate = true;
        for (int i = 0; i < k; ++i) out.negatives.push_back({triple, -1});
        return out;
    }

    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_int_distribution<std::uint32_t> pick(
        0, static_cast<std::uint32_t>(n_entities - 1));

    for (int i = 0; i < k; ++i) {
        const bool corrupt_head = coin(rng) == 0;
        Triple cand = triple;
        for (int attempt = 0; attempt < 100; ++attempt) {
            if (corrupt_head)
                cand.h = pick(rng);
            else
                cand.t = pick(rng);
            if (cand == triple) continue;
            if (filter && filter->contains(cand)) continue;
            break;
        }
        out.negatives.push_back({cand, -1});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Loss

struct NumericError : Error {
    using Error::Error;
};

struct BatchResult {
    double mean_loss = 0.0;
    SparseGrad grad;
};

// Mean logistic loss over the batch plus, when l2_lambda > 0, a per-triple
// penalty lambda*(|h|^2 + |r|^2 + |t|^2); the gradient is likewise the mean.
// Throws NumericError if any per-triple loss is non-finite.
inline BatchResult batch_loss(const ModelParams& params, std::span<const LabeledTriple> batch,
                              double l2_lambda = 0.0) {
    BatchResult out;
    if (batch.empty()) return out;

    double sum = 0.0;
    for (const auto& lt : batch) {
        double loss = accumulate_grad(params, lt.triple, lt.y, out.grad);
        if (l2_lambda > 0.0) {
            const auto h = params.entity_row(lt.triple.h);
            const auto t = params.entity_row(lt.triple.t);
            const auto r = params.relation_row(lt.triple.r);
            double sq = 0.0;
            for (double v : h) sq += v * v;
            for (double v : r) sq += v * v;
            for (double v : t) sq += v * v;
            loss += l2_lambda * sq;

            auto gh = out.grad.row(RowKind::Entity, lt.triple.h, params.entity_width());
            for (std::size_t i = 0; i < h.size(); ++i) gh[i] += 2.0 * l2_lambda * h[i];
            auto gt = out.grad.row(RowKind::Entity, lt.triple.t, params.entity_width());
            for (std::size_t i = 0; i < t.size(); ++i) gt[i] += 2.0 * l2_lambda * t[i];
            auto gr = out.grad.row(RowKind::Relation, lt.triple.r, params.relation_width());
            for (std::size_t i = 0; i < r.size(); ++i) gr[i] += 2.0 * l2_lambda * r[i];
        }
        if (!std::isfinite(loss)) {
            std::ostringstream msg;
            msg << "non-finite loss: model=" << to_string(params.kind) << " triple=("
                << lt.triple.h << "," << lt.triple.r << "," << lt.triple.t
                << ") y=" << lt.y << " score=" << score(params, lt.triple);
            throw NumericError(msg.str());
        }
        sum += loss;
    }

    const double inv = 1.0 / static_cast<double>(batch.size());
    out.mean_loss = sum * inv;
    out.grad.scale(inv);
    return out;
}

// ---------------------------------------------------------------------------
// Optimizers

inline std::span<double> param_row(ModelParams& params, RowKind kind, std::uint32_t id) {
    return kind == RowKind::Entity ? params.entity_row(id) : params.relation_row(id);
}

inline void sgd_step(ModelParams& params, const SparseGrad& grad, double lr) {
    for (const auto& e : grad.entries()) {
        auto row = param_row(params, e.kind, e.id);
        for (std::size_t i = 0; i < row.size(); ++i) row[i] -= lr * e.g[i];
    }
}

// Sparse Adam: first/second moments exist only for rows that have been
// touched, and each row carries its own step count so bias correction sees
// the number of updates that row actually received.
class AdamState {
public:
    struct Row {
        std::vector<double> m;
        std::vector<double> v;
        std::uint64_t t = 0;
    };

    Row& row(RowKind kind, std::uint32_t id, std::size_t width) {
        auto [it, inserted] = rows_.try_emplace(make_key(kind, id));
        if (inserted) {
            it->second.m.assign(width, 0.0);
            it->second.v.assign(width, 0.0);
        }
        return it->second;
    }

    const Row* find(RowKind kind, std::uint32_t id) const {
        auto it = rows_.find(make_key(kind, id));
        return it == rows_.end() ? nullptr : &it->second;
    }

    // Allocate state for every row up front so concurrent workers never
    // mutate the map structure.
    void preallocate(const ModelParams& params) {
        for (std::uint32_t i = 0; i < params.n_entities; ++i)
            row(RowKind::Entity, i, params.entity_width());
        for (std::uint32_t j = 0; j < params.n_relations; ++j)
            row(RowKind::Relation, j, params.relation_width());
    }

private:
    static std::uint64_t make_key(RowKind kind, std::uint32_t id) {
        return (static_cast<std::uint64_t>(kind) << 32) | id;
    }

    std::unordered_map<std::uint64_t, Row> rows_;
};

inline void adam_step(ModelParams& params, const SparseGrad& grad, AdamState& state, double lr,
                      double beta1, double beta2, double eps) {
    for (const auto& e : grad.entries()) {
        auto row = param_row(params, e.kind, e.id);
        auto& st = state.row(e.kind, e.id, row.size());
        st.t += 1;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(st.t));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(st.t));
        for (std::size_t i = 0; i < row.size(); ++i) {
            const double g = e.g[i];
            st.m[i] = beta1 * st.m[i] + (1.0 - beta1) * g;
            st.v[i] = beta2 * st.v[i] + (1.0 - beta2) * g * g;
            const double mhat = st.m[i] / bc1;
            const double vhat = st.v[i] / bc2;
            row[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

inline void normalize_row(std::span<double> row) {
    double sq = 0.0;
    for (double v : row) sq += v * v;
    if (sq <= 0.0) return;
    const double inv = 1.0 / std::sqrt(sq);
    for (double& v : row) v *= inv;
}

inline void normalize_all_entities(ModelParams& params) {
    for (std::uint32_t i = 0; i < params.n_entities; ++i) normalize_row(params.entity_row(i));
}

// ---------------------------------------------------------------------------
// Training loop

struct TrainReport {
    std::vector<double> epoch_loss;  // mean loss per completed epoch
    double wall_seconds = 0.0;
    std::uint64_t params_checksum = 0;
    bool diverged = false;
    int diverged_epoch = -1;
    std::string message;
};

// FNV-1a over the raw bytes of both tensors; equal seeds/config/data give
// equal checksums in single-threaded mode.
inline std::uint64_t params_checksum(const ModelParams& params) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const std::vector<double>& v) {
        const auto* bytes = reinterpret_cast<const unsigned char*>(v.data());
        const std::size_t n = v.size() * sizeof(double);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ULL;
        }
    };
    mix(params.entity);
    mix(params.relation);
    return h;
}

// Called after each completed epoch; return false to stop early.
using EpochCallback = std::function<bool(int epoch, double mean_loss)>;

namespace detail {

inline std::uint64_t epoch_seed(std::uint64_t seed, int epoch, int shard = 0) {
    std::uint64_t x = seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(epoch + 1));
    x ^= 0xBF58476D1CE4E5B9ULL * static_cast<std::uint64_t>(shard + 1);
    x ^= x >> 30;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

// One optimizer step over one batch of positives: corrupt, grade, update.
// Returns (sum of per-example losses, example count).
template <typename Rng>
std::pair<double, std::size_t> train_batch(ModelParams& params,
                                           std::span<const Triple> positives,
                                           const TrainConfig& cfg, double l2_penalty,
                                           bool project, const FilterIndex* neg_filter,
                                           AdamState& adam, Rng& rng) {
    std::vector<LabeledTriple> batch;
    batch.reserve(positives.size() * (1 + cfg.negatives));
    for (const Triple& tr : positives) {
        batch.push_back({tr, +1});
        auto neg = sample_negatives(tr, cfg.negatives, params.n_entities, rng, neg_filter);
        for (auto& lt : neg.negatives) batch.push_back(lt);
    }

    BatchResult res = batch_loss(params, batch, l2_penalty);

    if (cfg.optimizer == Optimizer::SGD)
        sgd_step(params, res.grad, cfg.learning_rate);
    else
        adam_step(params, res.grad, adam, cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2,
                  cfg.adam_eps);

    if (project) {
        for (const auto& e : res.grad.entries())
            if (e.kind == RowKind::Entity) normalize_row(params.entity_row(e.id));
    }
    if (cfg.rescal_symmetric && params.kind == ModelKind::RESCAL) {
        const int d = params.dim;
        for (const auto& e : res.grad.entries()) {
            if (e.kind != RowKind::Relation) continue;
            auto m = params.relation_row(e.id);
            for (int i = 0; i < d; ++i)
                for (int j = i + 1; j < d; ++j) {
                    const double avg = 0.5 * (m[i * d + j] + m[j * d + i]);
                    m[i * d + j] = avg;
                    m[j * d + i] = avg;
                }
        }
    }
    return {res.mean_loss * static_cast<double>(batch.size()), batch.size()};
}

}  // namespace detail

// Runs cfg.epochs - start_epoch further epochs over `triples`, mutating
// `params` in place. Epoch RNG streams depend only on (seed, epoch), so a
// resumed run replays the same corruption schedule the uninterrupted run
// would have used. threads > 1 shards batches across lock-free workers and
// forfeits determinism.
inline TrainReport train_inplace(ModelParams& params, const std::vector<Triple>& triples,
                                 const TrainConfig& cfg, const FilterIndex* filter = nullptr,
                                 const EpochCallback& callback = nullptr, int start_epoch = 0) {
    cfg.validate();
    if (triples.empty()) throw ConfigError("training set is empty");

    const auto t0 = std::chrono::steady_clock::now();
    TrainReport report;

    const L2Mode mode = resolve_l2_mode(cfg.l2_mode, cfg.model);
    const double l2_penalty = mode == L2Mode::Penalty ? cfg.l2_lambda : 0.0;
    const bool project = mode == L2Mode::ProjectEntities;
    const FilterIndex* neg_filter = cfg.filter_false_negatives ? filter : nullptr;

    if (project && start_epoch == 0) normalize_all_entities(params);

    AdamState adam;
    const int n_workers = cfg.threads > 1 ? cfg.threads : 0;
    if (n_workers && cfg.optimizer == Optimizer::Adam) adam.preallocate(params);

    std::vector<std::uint32_t> order(triples.size());

    for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
        // each epoch's permutation is derived from the identity so that it is
        // a pure function of (seed, epoch) and resumed runs replay it exactly
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::uint32_t>(i);
        std::mt19937_64 shuffle_rng(detail::epoch_seed(cfg.seed, epoch));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        std::vector<Triple> shuffled(triples.size());
        for (std::size_t i = 0; i < order.size(); ++i) shuffled[i] = triples[order[i]];

        const std::size_t n_batches =
            (shuffled.size() + cfg.batch_size - 1) / static_cast<std::size_t>(cfg.batch_size);

        double loss_sum = 0.0;
        std::size_t example_count = 0;
        std::string failure;

        auto batch_span = [&](std::size_t b) {
            const std::size_t lo = b * static_cast<std::size_t>(cfg.batch_size);
            const std::size_t hi = std::min(shuffled.size(), lo + cfg.batch_size);
            return std::span<const Triple>(shuffled.data() + lo, hi - lo);
        };

        if (n_workers == 0) {
            std::mt19937_64 rng(detail::epoch_seed(cfg.seed, epoch, 1));
            try {
                for (std::size_t b = 0; b < n_batches; ++b) {
                    auto [sum, count] = detail::train_batch(params, batch_span(b), cfg,
                                                            l2_penalty, project, neg_filter,
                                                            adam, rng);
                    loss_sum += sum;
                    example_count += count;
                }
            } catch (const NumericError& err) {
                failure = err.what();
            }
        } else {
            std::vector<double> worker_sum(n_workers, 0.0);
            std::vector<std::size_t> worker_count(n_workers, 0);
            std::vector<std::string> worker_failure(n_workers);
            std::vector<std::thread> pool;
            for (int w = 0; w < n_workers; ++w) {
                pool.emplace_back([&, w] {
                    std::mt19937_64 rng(detail::epoch_seed(cfg.seed, epoch, w + 1));
                    try {
                        for (std::size_t b = w; b < n_batches; b += n_workers) {
                            auto [sum, count] =
                                detail::train_batch(params, batch_span(b), cfg, l2_penalty,
                                                    project, neg_filter, adam, rng);
                            worker_sum[w] += sum;
                            worker_count[w] += count;
                        }
                    } catch (const NumericError& err) {
                        worker_failure[w] = err.what();
                    }
                });
            }
            for (auto& th : pool) th.join();
            for (int w = 0; w < n_workers; ++w) {
                loss_sum += worker_sum[w];
                example_count += worker_count[w];
                if (failure.empty() && !worker_failure[w].empty()) failure = worker_failure[w];
            }
        }

        const double mean_loss =
            example_count ? loss_sum / static_cast<double>(example_count)
                          : std::numeric_limits<double>::quiet_NaN();

        if (!failure.empty() || !std::isfinite(mean_loss)) {
            report.diverged = true;
            report.diverged_epoch = epoch;
            report.message = failure.empty() ? "non-finite epoch mean loss" : failure;
            break;
        }

        report.epoch_loss.push_back(mean_loss);
        if (callback && !callback(epoch, mean_loss)) break;
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.params_checksum = params_checksum(params);
    return report;
}

struct TrainResult {
    ModelParams params;
    TrainReport report;
};

inline TrainResult train(const std::vector<Triple>& triples, std::size_t n_entities,
                         std::size_t n_relations, const TrainConfig& cfg,
                         const FilterIndex* filter = nullptr,
                         const EpochCallback& callback = nullptr) {
    cfg.validate();
    TrainResult out;
    out.params = init_params(cfg.model, n_entities, n_relations, cfg.dim, cfg.seed);
    out.report = train_inplace(out.params, triples, cfg, filter, callback);
    return out;
}

}  // namespace kge
