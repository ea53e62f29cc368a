#pragma once
// Scoring functions and analytic gradients for the six embedding models.
//
// All models share one convention: higher score = more plausible. Distance
// models (TransE, RotatE) are therefore negated norms.
//
// Per-row layouts (d = embedding dimension):
//   TransE_L1/L2  entity d        relation d
//   RotatE        entity 2d       relation d      (entity (re,im) pairs, relation phases)
//   RESCAL        entity d        relation d*d    (row-major matrix)
//   DistMult      entity d        relation d
//   ComplEx       entity 2d       relation 2d     (interleaved (re,im) pairs)
//
// Complex values are stored interleaved: row[2i] = Re, row[2i+1] = Im.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "kge/types.hpp"

namespace kge {

enum class ModelKind { TransE_L1, TransE_L2, RotatE, RESCAL, DistMult, ComplEx };

inline constexpr ModelKind kAllModelKinds[] = {
    ModelKind::TransE_L1, ModelKind::TransE_L2, ModelKind::RotatE,
    ModelKind::RESCAL,    ModelKind::DistMult,  ModelKind::ComplEx,
};

inline std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::TransE_L1: return "transe_l1";
        case ModelKind::TransE_L2: return "transe_l2";
        case ModelKind::RotatE: return "rotate";
        case ModelKind::RESCAL: return "rescal";
        case ModelKind::DistMult: return "distmult";
        case ModelKind::ComplEx: return "complex";
    }
    return "?";
}

inline ModelKind parse_model_kind(const std::string& name) {
    for (ModelKind kind : kAllModelKinds)
        if (to_string(kind) == name) return kind;
    throw ConfigError("unknown model kind: \"" + name + "\"");
}

// Stable code used in checkpoint headers.
inline std::uint32_t model_code(ModelKind kind) { return static_cast<std::uint32_t>(kind); }

inline ModelKind model_from_code(std::uint32_t code) {
    if (code > static_cast<std::uint32_t>(ModelKind::ComplEx))
        throw ConfigError("unknown model code: " + std::to_string(code));
    return static_cast<ModelKind>(code);
}

// Learnable tensors, 64-bit floats, flat row-major storage.
struct ModelParams {
    ModelKind kind = ModelKind::TransE_L2;
    int dim = 0;
    std::size_t n_entities = 0;
    std::size_t n_relations = 0;
    std::vector<double> entity;
    std::vector<double> relation;

    std::size_t entity_width() const {
        switch (kind) {
            case ModelKind::RotatE:
            case ModelKind::ComplEx: return 2 * static_cast<std::size_t>(dim);
            default: return static_cast<std::size_t>(dim);
        }
    }

    std::size_t relation_width() const {
        switch (kind) {
            case ModelKind::RESCAL:
                return static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim);
            case ModelKind::ComplEx: return 2 * static_cast<std::size_t>(dim);
            default: return static_cast<std::size_t>(dim);
        }
    }

    std::span<double> entity_row(std::size_t i) {
        return {entity.data() + i * entity_width(), entity_width()};
    }
    std::span<const double> entity_row(std::size_t i) const {
        return {entity.data() + i * entity_width(), entity_width()};
    }
    std::span<double> relation_row(std::size_t j) {
        return {relation.data() + j * relation_width(), relation_width()};
    }
    std::span<const double> relation_row(std::size_t j) const {
        return {relation.data() + j * relation_width(), relation_width()};
    }
};

// Entries uniform on [-6/sqrt(d), +6/sqrt(d)]; RotatE relation rows are
// phases, uniform on [0, 2*pi). Bit-identical for identical arguments.
inline ModelParams init_params(ModelKind kind, std::size_t n_entities, std::size_t n_relations,
                               int dim, std::uint64_t seed) {
    if (dim < 1) throw ConfigError("dim must be >= 1");
    if (n_entities < 1 || n_relations < 1)
        throw ConfigError("entity and relation counts must be >= 1");

    ModelParams p;
    p.kind = kind;
    p.dim = dim;
    p.n_entities = n_entities;
    p.n_relations = n_relations;
    p.entity.resize(n_entities * p.entity_width());
    p.relation.resize(n_relations * p.relation_width());

    std::mt19937_64 rng(seed);
    const double bound = 6.0 / std::sqrt(static_cast<double>(dim));
    std::uniform_real_distribution<double> uniform(-bound, bound);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

    for (auto& v : p.entity) v = uniform(rng);
    if (kind == ModelKind::RotatE) {
        for (auto& v : p.relation) v = phase(rng);
    } else {
        for (auto& v : p.relation) v = uniform(rng);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Scoring

namespace detail {

// Per-entry kernels shared by the scalar and batched paths so both compute
// bit-identical values wherever the batched path does not re-associate.

inline double transe_l1_score(std::span<const double> h, std::span<const double> r,
                              std::span<const double> t, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += std::abs(h[i] + r[i] - t[i]);
    return -s;
}

inline double transe_l2_score(std::span<const double> h, std::span<const double> r,
                              std::span<const double> t, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
        const double v = h[i] + r[i] - t[i];
        s += v * v;
    }
    return -std::sqrt(s);
}

// cs/sn are cos/sin of the relation phases.
inline double rotate_score(std::span<const double> h, std::span<const double> cs,
                           std::span<const double> sn, std::span<const double> t, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
        const double ur = h[2 * i] * cs[i] - h[2 * i + 1] * sn[i];
        const double ui = h[2 * i] * sn[i] + h[2 * i + 1] * cs[i];
        const double wr = ur - t[2 * i];
        const double wi = ui - t[2 * i + 1];
        s += wr * wr + wi * wi;
    }
    return -std::sqrt(s);
}

// mt[i] = sum_j M[i][j] * t[j]
inline void rescal_mt(std::span<const double> m, std::span<const double> t, int d,
                      std::span<double> mt) {
    for (int i = 0; i < d; ++i) {
        double acc = 0.0;
        const double* row = m.data() + static_cast<std::size_t>(i) * d;
        for (int j = 0; j < d; ++j) acc += row[j] * t[j];
        mt[i] = acc;
    }
}

inline double dot(std::span<const double> a, std::span<const double> b, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += a[i] * b[i];
    return s;
}

inline double distmult_score(std::span<const double> h, std::span<const double> r,
                             std::span<const double> t, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += (h[i] * t[i]) * r[i];
    return s;
}

// Re(sum_i h_i * r_i * conj(t_i))
inline double complex_score(std::span<const double> h, std::span<const double> r,
                            std::span<const double> t, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
        const double a = h[2 * i], b = h[2 * i + 1];
        const double c = r[2 * i], dd = r[2 * i + 1];
        const double e = t[2 * i], f = t[2 * i + 1];
        s += (a * c - b * dd) * e + (a * dd + b * c) * f;
    }
    return s;
}

}  // namespace detail

inline double score(const ModelParams& p, const Triple& tr) {
    const auto h = p.entity_row(tr.h);
    const auto t = p.entity_row(tr.t);
    const auto r = p.relation_row(tr.r);
    const int d = p.dim;

    switch (p.kind) {
        case ModelKind::TransE_L1: return detail::transe_l1_score(h, r, t, d);
        case ModelKind::TransE_L2: return detail::transe_l2_score(h, r, t, d);
        case ModelKind::RotatE: {
            std::vector<double> cs(d), sn(d);
            for (int i = 0; i < d; ++i) {
                cs[i] = std::cos(r[i]);
                sn[i] = std::sin(r[i]);
            }
            return detail::rotate_score(h, cs, sn, t, d);
        }
        case ModelKind::RESCAL: {
            std::vector<double> mt(d);
            detail::rescal_mt(r, t, d, mt);
            return detail::dot(h, mt, d);
        }
        case ModelKind::DistMult: return detail::distmult_score(h, r, t, d);
        case ModelKind::ComplEx: return detail::complex_score(h, r, t, d);
    }
    throw std::logic_error("unreachable");
}

// Score every candidate head for fixed (r, t). Entry i equals
// score(p, {i, r, t}); expensive per-relation work (trig, M*t) is hoisted out
// of the entity loop.
inline std::vector<double> score_all_heads(const ModelParams& p, std::uint32_t r_id,
                                           std::uint32_t t_id) {
    const int d = p.dim;
    const auto r = p.relation_row(r_id);
    const auto t = p.entity_row(t_id);
    std::vector<double> out(p.n_entities);

    switch (p.kind) {
        case ModelKind::TransE_L1:
            for (std::size_t e = 0; e < p.n_entities; ++e)
                out[e] = detail::transe_l1_score(p.entity_row(e), r, t, d);
            break;
        case ModelKind::TransE_L2:
            for (std::size_t e = 0; e < p.n_entities; ++e)
                out[e] = detail::transe_l2_score(p.entity_row(e), r, t, d);
            break;
        case ModelKind::RotatE: {
            std::vector<double> cs(d), sn(d);
            for (int i = 0; i < d; ++i) {
                cs[i] = std::cos(r[i]);
                sn[i] = std::sin(r[i]);
            }
            for (std::size_t e = 0; e < p.n_entities; ++e)
                out[e] = detail::rotate_score(p.entity_row(e), cs, sn, t, d);
            break;
        }
        case ModelKind::RESCAL: {
            std::vector<double> mt(d);
            detail::rescal_mt(r, t, d, mt);
            for (std::size_t e = 0; e < p.n_entities; ++e)
                out[e] = detail::dot(p.entity_row(e), mt, d);
            break;
        }
        case ModelKind::DistMult:
            for (std::size_t e = 0; e < p.n_entities; ++e)
                out[e] = detail::distmult_score(p.entity_row(e), r, t, d);
            break;
        case ModelKind::ComplEx:
            for (std::size_t e = 0; e < p.n_entities; ++e)
                out[e] = detail::complex_score(p.entity_row(e), r, t, d);
            break;
    }
    return out;
}

// Symmetric contract: entry i equals score(p, {h, r, i}).
inline std::vector<double> score_all_tails(const ModelParams& p, std::uint32_t h_id,
                                           std::uint32_t r_id) {
    const int d = p.dim;
    const auto h = p.entity_row(h_id);
    const auto r = p.relation_row(r_id);
    std::vector<double> out(p.n_entities);

    switch (p.kind) {
        case ModelKind::TransE_L1:
            for (std::size_t e = 0; e < p.n_entities; ++e)
                out[e] = detail::transe_l1_score(h, r, p.entity_row(e), d);
            break;
        case ModelKind::TransE_L2:
            for (std::size_t e = 0; e < p.n_entities; ++e)
                out[e] = detail::transe_l2_score(h, r, p.entity_row(e), d);
            break;
        case ModelKind::RotatE: {
            std::vector<double> cs(d), sn(d);
            for (int i = 0; i < d; ++i) {
                cs[i] = std::cos(r[i]);
                sn[i] = std::sin(r[i]);
            }
            for (std::size_t e = 0; e < p.n_entities; ++e)
                out[e] = detail::rotate_score(h, cs, sn, p.entity_row(e), d);
            break;
        }
        case ModelKind::RESCAL: {
            // hm[j] = sum_i h[i] * M[i][j]; re-associates relative to the
            // scalar path, stays within its 1e-12 relative contract.
            std::vector<double> hm(d, 0.0);
            for (int i = 0; i < d; ++i) {
                const double hi = h[i];
                const double* row = r.data() + static_cast<std::size_t>(i) * d;
                for (int j = 0; j < d; ++j) hm[j] += hi * row[j];
            }
            for (std::size_t e = 0; e < p.n_entities; ++e)
                out[e] = detail::dot(hm, p.entity_row(e), d);
            break;
        }
        case ModelKind::DistMult:
            for (std::size_t e = 0; e < p.n_entities; ++e)
                out[e] = detail::distmult_score(h, r, p.entity_row(e), d);
            break;
        case ModelKind::ComplEx:
            for (std::size_t e = 0; e < p.n_entities; ++e)
                out[e] = detail::complex_score(h, r, p.entity_row(e), d);
            break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Gradients

enum class RowKind { Entity, Relation };

// Sparse gradient: dense rows for only the parameter rows a batch touched.
// Rows are merged by (kind, id), so a self-loop triple (h == t) produces a
// single entity row holding the sum of both partials.
class SparseGrad {
public:
    struct Entry {
        RowKind kind;
        std::uint32_t id;
        std::vector<double> g;
    };

    std::span<double> row(RowKind kind, std::uint32_t id, std::size_t width) {
        const std::uint64_t key = make_key(kind, id);
        auto it = index_.find(key);
        if (it == index_.end()) {
            entries_.push_back(Entry{kind, id, std::vector<double>(width, 0.0)});
            it = index_.emplace(key, entries_.size() - 1).first;
        }
        return entries_[it->second].g;
    }

    const std::vector<Entry>& entries() const { return entries_; }
    std::vector<Entry>& entries() { return entries_; }
    bool empty() const { return entries_.empty(); }

    const Entry* find(RowKind kind, std::uint32_t id) const {
        auto it = index_.find(make_key(kind, id));
        return it == index_.end() ? nullptr : &entries_[it->second];
    }

    void scale(double factor) {
        for (auto& e : entries_)
            for (auto& v : e.g) v *= factor;
    }

private:
    static std::uint64_t make_key(RowKind kind, std::uint32_t id) {
        return (static_cast<std::uint64_t>(kind) << 32) | id;
    }

    std::vector<Entry> entries_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
};

namespace detail {

// log(1 + exp(z)) without overflow
inline double softplus(double z) {
    if (z > 0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

inline double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

inline double sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

}  // namespace detail

inline double logistic_loss(double score_value, int y) {
    return detail::softplus(-static_cast<double>(y) * score_value);
}

// Loss and sparse gradient of log(1 + exp(-y * f(h,r,t))) for one triple.
// Accumulates into `grad_out` (batch accumulation reuses one SparseGrad).
// Returns the loss.
inline double accumulate_grad(const ModelParams& p, const Triple& tr, int y,
                              SparseGrad& grad_out) {
    const int d = p.dim;
    const auto h = p.entity_row(tr.h);
    const auto t = p.entity_row(tr.t);
    const auto r = p.relation_row(tr.r);

    const double s = score(p, tr);
    const double loss = logistic_loss(s, y);
    // dl/ds
    const double g = -static_cast<double>(y) * detail::sigmoid(-static_cast<double>(y) * s);

    auto gh = grad_out.row(RowKind::Entity, tr.h, p.entity_width());
    auto gt = grad_out.row(RowKind::Entity, tr.t, p.entity_width());
    auto gr = grad_out.row(RowKind::Relation, tr.r, p.relation_width());

    switch (p.kind) {
        case ModelKind::TransE_L1: {
            // s = -sum |v_i|, v = h + r - t; subgradient sign(0) = 0
            for (int i = 0; i < d; ++i) {
                const double sg = detail::sign(h[i] + r[i] - t[i]);
                gh[i] += g * -sg;
                gr[i] += g * -sg;
                gt[i] += g * sg;
            }
            break;
        }
        case ModelKind::TransE_L2: {
            const double n = -s;
            if (n > 0) {
                for (int i = 0; i < d; ++i) {
                    const double v = (h[i] + r[i] - t[i]) / n;
                    gh[i] += g * -v;
                    gr[i] += g * -v;
                    gt[i] += g * v;
                }
            }
            break;
        }
        case ModelKind::RotatE: {
            // s = -||h*e^{i theta} - t||; with u = h*rot, w = u - t:
            //   ds/dh = -conj(rot)*w / ||w||   (as a complex pair)
            //   ds/dt = +w / ||w||
            //   ds/dtheta = -Im(conj(u)*w) / ||w||
            const double n = -s;
            if (n > 0) {
                for (int i = 0; i < d; ++i) {
                    const double cs = std::cos(r[i]);
                    const double sn = std::sin(r[i]);
                    const double ur = h[2 * i] * cs - h[2 * i + 1] * sn;
                    const double ui = h[2 * i] * sn + h[2 * i + 1] * cs;
                    const double wr = ur - t[2 * i];
                    const double wi = ui - t[2 * i + 1];
                    gh[2 * i] += g * -(cs * wr + sn * wi) / n;
                    gh[2 * i + 1] += g * -(cs * wi - sn * wr) / n;
                    gt[2 * i] += g * wr / n;
                    gt[2 * i + 1] += g * wi / n;
                    gr[i] += g * -(ur * wi - ui * wr) / n;
                }
            }
            break;
        }
        case ModelKind::RESCAL: {
            // ds/dh = M t, ds/dt = M^T h, ds/dM = h t^T
            for (int i = 0; i < d; ++i) {
                const double* mrow = r.data() + static_cast<std::size_t>(i) * d;
                double* grow = gr.data() + static_cast<std::size_t>(i) * d;
                double mt_i = 0.0;
                for (int j = 0; j < d; ++j) {
                    mt_i += mrow[j] * t[j];
                    gt[j] += g * h[i] * mrow[j];
                    grow[j] += g * h[i] * t[j];
                }
                gh[i] += g * mt_i;
            }
            break;
        }
        case ModelKind::DistMult: {
            for (int i = 0; i < d; ++i) {
                gh[i] += g * r[i] * t[i];
                gr[i] += g * h[i] * t[i];
                gt[i] += g * h[i] * r[i];
            }
            break;
        }
        case ModelKind::ComplEx: {
            for (int i = 0; i < d; ++i) {
                const double a = h[2 * i], b = h[2 * i + 1];
                const double c = r[2 * i], dd = r[2 * i + 1];
                const double e = t[2 * i], f = t[2 * i + 1];
                gh[2 * i] += g * (c * e + dd * f);
                gh[2 * i + 1] += g * (-dd * e + c * f);
                gr[2 * i] += g * (a * e + b * f);
                gr[2 * i + 1] += g * (-b * e + a * f);
                gt[2 * i] += g * (a * c - b * dd);
                gt[2 * i + 1] += g * (a * dd + b * c);
            }
            break;
        }
    }
    return loss;
}

struct GradResult {
    double loss;
    SparseGrad grad;
};

inline GradResult grad(const ModelParams& p, const Triple& tr, int y) {
    GradResult out;
    out.loss = accumulate_grad(p, tr, y, out.grad);
    return out;
}

}  // namespace kge
