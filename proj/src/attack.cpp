#include "aia/attack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include <json.hpp>

#include "aia/random.hpp"

namespace aia {

ConfidenceVector confidence_scores(const Matrix& posteriors) {
    const Eigen::Index n = posteriors.rows();
    const Eigen::Index c = posteriors.cols();
    if (c == 0) throw InputError("confidence_scores: posteriors have no columns");
    ConfidenceVector out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto row = posteriors.row(i);
        if (!row.allFinite() || row.minCoeff() < 0.0 || std::abs(row.sum() - 1.0) > 1e-6) {
            throw InputError("confidence_scores: row " + std::to_string(i) + " is not a probability distribution");
        }
        Eigen::Index arg = 0;
        for (Eigen::Index j = 1; j < c; ++j) {
            if (row(j) > row(arg)) arg = j;
        }
        if (c == 1) {
            out(i) = row(0);
            continue;
        }
        double rest = 0.0;
        for (Eigen::Index j = 0; j < c; ++j) {
            if (j != arg) rest += row(j);
        }
        out(i) = std::clamp(row(arg) - rest / static_cast<double>(c - 1), 0.0, 1.0);
    }
    return out;
}

namespace {

void check_attack_input(const BlackBoxHandle& handle, const PartialFeatureMatrix& x, const SparseGraph& g,
                        const AttackConfig& cfg) {
    if (x.masked_count() == 0) throw ParameterError("attack: feature matrix has no hidden cells");
    if (static_cast<std::size_t>(x.values.rows()) != g.num_nodes()) {
        throw ParameterError("attack: " + std::to_string(x.values.rows()) + " feature rows but graph has " +
                             std::to_string(g.num_nodes()) + " nodes");
    }
    if (static_cast<std::size_t>(x.values.cols()) != handle.input_dim()) {
        throw ParameterError("attack: feature width " + std::to_string(x.values.cols()) +
                             " does not match model input " + std::to_string(handle.input_dim()));
    }
    if (!(cfg.base_threshold >= 0.0 && cfg.base_threshold <= 1.0)) {
        throw ParameterError("attack: base_threshold must lie in [0, 1]");
    }
    if (!(cfg.decay > 0.0 && cfg.decay < 1.0)) throw ParameterError("attack: decay must lie in (0, 1)");
}

Matrix run_init(const PartialFeatureMatrix& x, const SparseGraph& g, InitKind init, const ImputerConfig& cfg) {
    return init == InitKind::feature_propagation ? feature_propagate(x, g, cfg) : random_impute(x, cfg);
}

double mean_over(const ConfidenceVector& cs, const std::vector<NodeId>& rows) {
    if (rows.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (NodeId r : rows) s += cs(static_cast<Eigen::Index>(r));
    return s / static_cast<double>(rows.size());
}

void finish(AttackOutcome& out, const ConfidenceVector& cs, const std::vector<NodeId>& inferred_rows) {
    out.per_node_confidence = cs;
    out.mean_confidence = mean_over(cs, inferred_rows);
    out.mean_confidence_all_rows = cs.size() ? cs.mean() : std::numeric_limits<double>::quiet_NaN();
}

std::vector<Eigen::Index> masked_cols_of(const PartialFeatureMatrix& x, NodeId row) {
    std::vector<Eigen::Index> cols;
    const auto r = static_cast<Eigen::Index>(row);
    for (Eigen::Index j = 0; j < x.missing_mask.cols(); ++j) {
        if (x.missing_mask(r, j)) cols.push_back(j);
    }
    return cols;
}

}  // namespace

AttackOutcome attack_iterative(const BlackBoxHandle& handle, const PartialFeatureMatrix& x, const SparseGraph& g,
                               InitKind init, const AttackConfig& cfg) {
    check_attack_input(handle, x, g, cfg);
    const std::vector<NodeId> candidates = x.masked_rows();
    std::vector<bool> pending(static_cast<std::size_t>(x.values.rows()), false);
    for (NodeId r : candidates) pending[r] = true;
    std::size_t remaining = candidates.size();

    PartialFeatureMatrix working = x;
    const std::size_t budget = candidates.size() * 500;
    double threshold = cfg.base_threshold;
    std::size_t queries = 0;
    AttackOutcome out;

    for (std::size_t iter = 0; remaining > 0; ++iter) {
        if (iter >= budget) {
            throw InternalError("attack_iterative: exceeded iteration budget of " + std::to_string(budget));
        }
        ImputerConfig icfg = cfg.imputer;
        icfg.seed = rng::make_engine(cfg.imputer.seed, 0x17e4, iter)();
        const Matrix imputed = run_init(working, g, init, icfg);
        if (cfg.on_query) cfg.on_query(imputed);
        const ConfidenceVector cs = confidence_scores(handle.query(imputed, g));
        ++queries;

        NodeId best = 0;
        double best_score = -1.0;
        for (NodeId r : candidates) {
            if (!pending[r]) continue;
            const double s = cs(static_cast<Eigen::Index>(r));
            if (s > best_score) {
                best_score = s;
                best = r;
            }
        }
        TraceRecord rec{iter, threshold, std::nullopt, best_score, queries};
        if (best_score > threshold) {
            const auto br = static_cast<Eigen::Index>(best);
            for (Eigen::Index j = 0; j < working.values.cols(); ++j) {
                if (working.missing_mask(br, j)) {
                    working.values(br, j) = imputed(br, j);
                    working.missing_mask(br, j) = false;
                }
            }
            pending[best] = false;
            --remaining;
            rec.fixed_node = best;
            threshold = cfg.base_threshold;
        } else {
            threshold *= cfg.decay;
        }
        out.trace.push_back(rec);
    }

    out.reconstructed = working.values;
    if (cfg.on_query) cfg.on_query(out.reconstructed);
    const ConfidenceVector cs = confidence_scores(handle.query(out.reconstructed, g));
    ++queries;
    out.queries_used = queries;
    finish(out, cs, candidates);
    return out;
}

AttackOutcome attack_single_pass(const BlackBoxHandle& handle, const PartialFeatureMatrix& x, const SparseGraph& g,
                                 InitKind init, const AttackConfig& cfg) {
    check_attack_input(handle, x, g, cfg);
    AttackOutcome out;
    out.reconstructed = run_init(x, g, init, cfg.imputer);
    if (cfg.on_query) cfg.on_query(out.reconstructed);
    const ConfidenceVector cs = confidence_scores(handle.query(out.reconstructed, g));
    out.queries_used = 1;
    finish(out, cs, x.masked_rows());
    return out;
}

namespace {

bool is_binary(double v) { return v == 0.0 || v == 1.0; }

void require_binary_sensitive(const Dataset& shadow_ds, const PartialFeatureMatrix& x) {
    if (shadow_ds.feature_kind != FeatureKind::binary) {
        throw UnsupportedConfiguration("attack_shadow: only binary sensitive attributes are supported");
    }
    for (std::size_t col : x.sensitive_attrs) {
        const auto c = static_cast<Eigen::Index>(col);
        if (col >= shadow_ds.num_features()) throw ParameterError("attack_shadow: sensitive column out of range");
        for (Eigen::Index i = 0; i < shadow_ds.features.rows(); ++i) {
            if (!is_binary(shadow_ds.features(i, c))) {
                throw UnsupportedConfiguration("attack_shadow: shadow column " + std::to_string(col) +
                                               " is not binary");
            }
        }
        for (Eigen::Index i = 0; i < x.values.rows(); ++i) {
            if (!x.missing_mask(i, c) && !is_binary(x.values(i, c))) {
                throw UnsupportedConfiguration("attack_shadow: target column " + std::to_string(col) +
                                               " is not binary");
            }
        }
    }
}

}  // namespace

AttackOutcome attack_shadow(const BlackBoxHandle& target, const Dataset& shadow_ds, const Split& shadow_split,
                            const PartialFeatureMatrix& x, const SparseGraph& g, const ShadowConfig& cfg) {
    check_attack_input(target, x, g, cfg.attack);
    require_binary_sensitive(shadow_ds, x);
    if (!shadow_split.shadow_train_ids || !shadow_split.shadow_test_ids) {
        throw ParameterError("attack_shadow: split has no shadow partition");
    }
    if (cfg.rounds == 0) throw ParameterError("attack_shadow: rounds must be positive");
    if (!(cfg.holdout_fraction >= 0.0 && cfg.holdout_fraction < 1.0)) {
        throw ParameterError("attack_shadow: holdout_fraction must lie in [0, 1)");
    }

    // Shadow model on the attacker's own data.
    Split own{*shadow_split.shadow_train_ids, *shadow_split.shadow_test_ids, {}, std::nullopt, std::nullopt};
    const BlackBoxHandle shadow = train_black_box(shadow_ds, own, cfg.shadow_gcn);

    const std::vector<NodeId> target_rows = x.masked_rows();
    const std::size_t n_shadow = std::min(target_rows.size(), own.train_ids.size());
    if (n_shadow < 2) throw ParameterError("attack_shadow: need at least two shadow candidates");
    const std::vector<NodeId> shadow_ids(own.train_ids.begin(),
                                         own.train_ids.begin() + static_cast<std::ptrdiff_t>(n_shadow));
    const Dataset view = induced_dataset(shadow_ds, shadow_ids);
    SparseGraph view_graph = view.graph;
    if (cfg.knn) {
        std::vector<Eigen::Index> keep;
        for (Eigen::Index j = 0; j < view.features.cols(); ++j) {
            if (std::find(x.sensitive_attrs.begin(), x.sensitive_attrs.end(), static_cast<std::size_t>(j)) ==
                x.sensitive_attrs.end()) {
                keep.push_back(j);
            }
        }
        view_graph = build_knn_graph(view.features(Eigen::all, keep), cfg.knn->k, cfg.knn->metric);
    }

    // Labelled posteriors: true sensitive values -> 1, random values -> 0.
    auto engine = rng::make_engine(cfg.seed, 0x5a);
    const auto n = static_cast<Eigen::Index>(n_shadow);
    const Eigen::Index c = static_cast<Eigen::Index>(shadow.num_classes());
    Matrix samples(2 * n * static_cast<Eigen::Index>(cfg.rounds), c);
    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(samples.rows()));
    Eigen::Index at = 0;
    const Matrix p_true = shadow.query(view.features, view_graph);
    for (std::size_t round = 0; round < cfg.rounds; ++round) {
        Matrix randomised = view.features;
        for (std::size_t col : x.sensitive_attrs) {
            for (Eigen::Index i = 0; i < n; ++i) {
                randomised(i, static_cast<Eigen::Index>(col)) = rng::bernoulli(engine, 0.5) ? 1.0 : 0.0;
            }
        }
        const Matrix p_rand = shadow.query(randomised, view_graph);
        samples.middleRows(at, n) = p_true;
        labels.insert(labels.end(), static_cast<std::size_t>(n), 1);
        at += n;
        samples.middleRows(at, n) = p_rand;
        labels.insert(labels.end(), static_cast<std::size_t>(n), 0);
        at += n;
    }

    std::vector<std::size_t> order(labels.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng::shuffle(order, engine);
    const auto n_hold = static_cast<std::size_t>(cfg.holdout_fraction * static_cast<double>(order.size()));
    const std::size_t n_fit = order.size() - n_hold;
    Matrix fit_x(static_cast<Eigen::Index>(n_fit), c);
    std::vector<int> fit_y(n_fit);
    Matrix hold_x(static_cast<Eigen::Index>(n_hold), c);
    std::vector<int> hold_y(n_hold);
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto src = static_cast<Eigen::Index>(order[i]);
        if (i < n_fit) {
            fit_x.row(static_cast<Eigen::Index>(i)) = samples.row(src);
            fit_y[i] = labels[order[i]];
        } else {
            hold_x.row(static_cast<Eigen::Index>(i - n_fit)) = samples.row(src);
            hold_y[i - n_fit] = labels[order[i]];
        }
    }
    const MlpAttackModel mlp = train_mlp(fit_x, fit_y, cfg.mlp);

    const PosteriorScorer score = [&mlp](NodeId, const Vector& posterior) {
        return mlp.predict_proba(posterior.transpose())(0, 1);
    };
    AttackOutcome out = shadow_select(target, x, g, score, cfg.attack.imputer);
    if (n_hold > 0) out.attack_model_holdout_accuracy = mlp.accuracy(hold_x, hold_y);
    return out;
}

AttackOutcome shadow_select(const BlackBoxHandle& target, const PartialFeatureMatrix& x, const SparseGraph& g,
                            const PosteriorScorer& score, const ImputerConfig& imputer) {
    if (x.masked_count() == 0) throw ParameterError("shadow_select: feature matrix has no hidden cells");
    for (Eigen::Index i = 0; i < x.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.values.cols(); ++j) {
            if (x.missing_mask(i, j) && std::find(x.sensitive_attrs.begin(), x.sensitive_attrs.end(),
                                                  static_cast<std::size_t>(j)) == x.sensitive_attrs.end()) {
                throw ParameterError("shadow_select: hidden cell outside the sensitive columns");
            }
        }
    }
    ImputerConfig base_cfg = imputer;
    base_cfg.rounding = Rounding::binary_round;
    Matrix working = random_impute(x, base_cfg);
    Matrix chosen = working;
    const std::vector<NodeId> rows = x.masked_rows();
    std::size_t queries = 0;
    for (NodeId row : rows) {
        const auto r = static_cast<Eigen::Index>(row);
        const std::vector<Eigen::Index> cols = masked_cols_of(x, row);
        if (cols.size() > 16) throw ParameterError("shadow_select: too many hidden cells in one row");
        const Vector saved = working.row(r);
        double best_score = -std::numeric_limits<double>::infinity();
        std::size_t best = 0;
        for (std::size_t a = 0; a < (std::size_t{1} << cols.size()); ++a) {
            for (std::size_t k = 0; k < cols.size(); ++k) working(r, cols[k]) = (a >> k) & 1U ? 1.0 : 0.0;
            const Matrix post = target.query(working, g);
            ++queries;
            const double s = score(row, post.row(r).transpose());
            if (s > best_score) {
                best_score = s;
                best = a;
            }
        }
        working.row(r) = saved;
        for (std::size_t k = 0; k < cols.size(); ++k) chosen(r, cols[k]) = (best >> k) & 1U ? 1.0 : 0.0;
    }

    AttackOutcome out;
    out.reconstructed = chosen;
    const ConfidenceVector cs = confidence_scores(target.query(out.reconstructed, g));
    ++queries;
    out.queries_used = queries;
    finish(out, cs, rows);
    return out;
}

const char* to_string(AttackKind k) {
    switch (k) {
        case AttackKind::fp: return "fp";
        case AttackKind::ri: return "ri";
        case AttackKind::fp_ma: return "fp_ma";
        case AttackKind::ri_ma: return "ri_ma";
        case AttackKind::sa: return "sa";
    }
    return "?";
}

AttackKind attack_kind_from_string(const std::string& s) {
    for (AttackKind k : {AttackKind::fp, AttackKind::ri, AttackKind::fp_ma, AttackKind::ri_ma, AttackKind::sa}) {
        if (s == to_string(k)) return k;
    }
    throw ParameterError("unknown attack '" + s + "'");
}

AttackOutcome infer_multi(const BlackBoxHandle& handle, const PartialFeatureMatrix& x, const SparseGraph& g,
                          AttackKind kind, const AttackConfig& cfg) {
    if (x.sensitive_attrs.empty()) throw ParameterError("infer_multi: no sensitive attributes");
    switch (kind) {
        case AttackKind::fp: return attack_single_pass(handle, x, g, InitKind::feature_propagation, cfg);
        case AttackKind::ri: return attack_single_pass(handle, x, g, InitKind::random, cfg);
        case AttackKind::fp_ma: return attack_iterative(handle, x, g, InitKind::feature_propagation, cfg);
        case AttackKind::ri_ma: return attack_iterative(handle, x, g, InitKind::random, cfg);
        case AttackKind::sa: break;
    }
    throw UnsupportedConfiguration("infer_multi: the shadow attack needs shadow data; call attack_shadow");
}

void write_trace_jsonl(const std::vector<TraceRecord>& trace, std::ostream& out) {
    for (const TraceRecord& r : trace) {
        nlohmann::json j;
        j["iteration"] = r.iteration;
        j["threshold"] = r.threshold;
        j["fixed_node"] = r.fixed_node ? nlohmann::json(*r.fixed_node) : nlohmann::json(nullptr);
        j["max_confidence"] = r.max_confidence;
        j["query_count"] = r.query_count;
        out << j.dump() << '\n';
    }
}

}  // namespace aia
