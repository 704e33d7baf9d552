#include "aia/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "aia/metrics.hpp"

namespace aia {

using nlohmann::json;

const char* to_string(StructureMode m) { return m == StructureMode::true_graph ? "true_graph" : "knn"; }

StructureMode structure_mode_from_string(const std::string& s) {
    if (s == "true_graph") return StructureMode::true_graph;
    if (s == "knn") return StructureMode::knn;
    throw ParameterError("unknown structure mode '" + s + "'");
}

std::vector<std::uint64_t> ExperimentConfig::default_seeds(std::uint64_t base, std::size_t count) {
    std::vector<std::uint64_t> s(count);
    for (std::size_t i = 0; i < count; ++i) s[i] = base + i;
    return s;
}

void ExperimentConfig::validate() const {
    if (seeds.empty()) throw ParameterError("config: seeds must not be empty");
    if (sensitive_attrs.empty()) throw ParameterError("config: sensitive_attrs must not be empty");
    if (std::set<std::size_t>(sensitive_attrs.begin(), sensitive_attrs.end()).size() != sensitive_attrs.size()) {
        throw ParameterError("config: duplicate sensitive attribute");
    }
    if (candidate_count == 0) throw ParameterError("config: candidate_count must be positive");
    if (train_size < candidate_count) throw ParameterError("config: train_size must be >= candidate_count");
    if (structure == StructureMode::knn && (knn.k == 0 || knn.k >= candidate_count)) {
        throw ParameterError("config: knn k must satisfy 1 <= k < candidate_count");
    }
    if (imputer.iterations == 0) throw ParameterError("config: imputer iterations must be positive");
    if (!(base_threshold >= 0.0 && base_threshold <= 1.0)) throw ParameterError("config: base_threshold outside [0, 1]");
    if (!(decay > 0.0 && decay < 1.0)) throw ParameterError("config: decay outside (0, 1)");
    if (shadow_rounds == 0) throw ParameterError("config: shadow_rounds must be positive");
}

std::filesystem::path data_root() {
    if (const char* env = std::getenv("AIA_DATA_ROOT"); env && *env) return env;
    return "data";
}

Dataset load_experiment_dataset(const ExperimentConfig& cfg) {
    if (cfg.synthetic) return generate_synthetic(*cfg.synthetic, cfg.synthetic_seed);
    std::filesystem::path p = cfg.dataset;
    if (p.is_relative()) p = data_root() / p;
    return load_dataset(p, cfg.format);
}

SparseGraph build_view_graph(const ExperimentConfig& cfg, const std::function<const SparseGraph&()>& true_graph,
                             const std::vector<NodeId>& candidate_ids, const Matrix& known_features) {
    if (cfg.structure == StructureMode::knn) {
        if (static_cast<std::size_t>(known_features.rows()) != candidate_ids.size()) {
            throw ParameterError("build_view_graph: feature rows do not match candidates");
        }
        return build_knn_graph(known_features, cfg.knn.k, cfg.knn.metric);
    }
    return induced_subgraph(true_graph(), candidate_ids);
}

namespace {

std::vector<Eigen::Index> non_sensitive_columns(std::size_t d, const std::vector<std::size_t>& sensitive) {
    std::vector<Eigen::Index> cols;
    for (std::size_t j = 0; j < d; ++j) {
        if (std::find(sensitive.begin(), sensitive.end(), j) == sensitive.end()) {
            cols.push_back(static_cast<Eigen::Index>(j));
        }
    }
    return cols;
}

// Population statistics of each sensitive column over nodes outside the
// candidate set.
std::map<std::size_t, ColumnStats> population_priors(const Dataset& ds, const std::vector<NodeId>& candidates,
                                                     const std::vector<std::size_t>& sensitive) {
    std::vector<bool> is_cand(ds.num_nodes(), false);
    for (NodeId c : candidates) is_cand[c] = true;
    std::map<std::size_t, ColumnStats> priors;
    for (std::size_t col : sensitive) {
        double sum = 0.0;
        double sq = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < ds.num_nodes(); ++i) {
            if (is_cand[i]) continue;
            const double v = ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col));
            sum += v;
            sq += v * v;
            ++n;
        }
        if (n < 2) continue;
        const double mean = sum / static_cast<double>(n);
        const double var = std::max(0.0, sq / static_cast<double>(n) - mean * mean);
        priors[col] = ColumnStats{mean, std::sqrt(var)};
    }
    return priors;
}

SeedResult run_seed(const ExperimentConfig& cfg, const Dataset& ds, std::uint64_t seed, const OutcomeHook& hook) {
    SeedResult res;
    res.seed = seed;
    SplitSpec ss;
    ss.train_size = cfg.train_size;
    ss.test_size = cfg.test_size;
    ss.candidate_count = cfg.candidate_count;
    ss.shadow = cfg.attack == AttackKind::sa;
    const Split split = make_split(ds, ss, seed);
    const PartialFeatureMatrix x = mask_sensitive(ds, split, cfg.sensitive_attrs, cfg.setting, seed);

    GcnHyper gh = cfg.gcn;
    gh.seed = seed;
    TrainReport report;
    const BlackBoxHandle target = train_black_box(ds, split, gh, &report);
    res.target_train_accuracy = report.train_accuracy;
    res.target_test_accuracy = report.test_accuracy;

    const PartialFeatureMatrix view = restrict_rows(x, split.candidate_ids);
    const Matrix truth = ds.features(split.candidate_ids, Eigen::all);
    const Matrix known = view.values(Eigen::all, non_sensitive_columns(ds.num_features(), cfg.sensitive_attrs));
    const SparseGraph g =
        build_view_graph(cfg, [&]() -> const SparseGraph& { return ds.graph; }, split.candidate_ids, known);

    AttackConfig ac;
    ac.base_threshold = cfg.base_threshold;
    ac.decay = cfg.decay;
    ac.imputer = cfg.imputer;
    ac.imputer.rounding = ds.feature_kind == FeatureKind::binary ? Rounding::binary_round : Rounding::none;
    ac.imputer.seed = seed;
    ac.imputer.priors = population_priors(ds, split.candidate_ids, cfg.sensitive_attrs);

    AttackOutcome out;
    if (cfg.attack == AttackKind::sa) {
        ShadowConfig sc;
        sc.attack = ac;
        sc.shadow_gcn = cfg.gcn;
        sc.shadow_gcn.seed = seed ^ 0x5ad0c0ffeeULL;
        sc.mlp = cfg.mlp;
        sc.mlp.seed = seed;
        if (cfg.structure == StructureMode::knn) sc.knn = cfg.knn;
        sc.rounds = cfg.shadow_rounds;
        sc.seed = seed;
        out = attack_shadow(target, ds, split, view, g, sc);
    } else {
        out = infer_multi(target, view, g, cfg.attack, ac);
    }
    if (hook) hook(seed, out);

    res.metric = ds.feature_kind == FeatureKind::binary ? metric_hamming_pct(out.reconstructed, truth, view.missing_mask)
                                                        : metric_mse(out.reconstructed, truth, view.missing_mask);
    res.mean_confidence = out.mean_confidence;
    res.queries_used = out.queries_used;
    res.attack_model_holdout_accuracy = out.attack_model_holdout_accuracy;
    res.ok = true;
    return res;
}

}  // namespace

ExperimentRecord run_experiment(const ExperimentConfig& cfg, const OutcomeHook& hook) {
    cfg.validate();
    return run_experiment(cfg, load_experiment_dataset(cfg), hook);
}

ExperimentRecord run_experiment(const ExperimentConfig& cfg, const Dataset& ds, const OutcomeHook& hook) {
    cfg.validate();
    for (std::size_t a : cfg.sensitive_attrs) {
        if (a >= ds.num_features()) {
            throw ParameterError("config: sensitive attribute " + std::to_string(a) + " out of range (d=" +
                                 std::to_string(ds.num_features()) + ")");
        }
    }
    const auto start = std::chrono::steady_clock::now();
    ExperimentRecord rec;
    rec.config = cfg;
    rec.metric_name = ds.feature_kind == FeatureKind::binary ? "hamming_pct" : "mse";
    for (std::uint64_t seed : cfg.seeds) {
        try {
            rec.per_seed.push_back(run_seed(cfg, ds, seed, hook));
        } catch (const std::exception& e) {
            SeedResult failed;
            failed.seed = seed;
            failed.error = e.what();
            rec.per_seed.push_back(failed);
        }
    }

    std::size_t ok = 0;
    double sum = 0.0;
    double conf = 0.0;
    double queries = 0.0;
    for (const SeedResult& s : rec.per_seed) {
        if (!s.ok) continue;
        ++ok;
        sum += s.metric;
        conf += s.mean_confidence;
        queries += static_cast<double>(s.queries_used);
    }
    rec.partial = ok != rec.per_seed.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (ok > 0) {
        const double k = static_cast<double>(ok);
        rec.mean = sum / k;
        double ss = 0.0;
        for (const SeedResult& s : rec.per_seed) {
            if (s.ok) ss += (s.metric - rec.mean) * (s.metric - rec.mean);
        }
        rec.stddev = std::sqrt(ss / k);
        rec.mean_confidence = conf / k;
        rec.queries_used = queries / k;
    } else {
        rec.mean = rec.stddev = rec.mean_confidence = rec.queries_used = nan;
    }
    rec.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!cfg.output.empty()) write_file_atomic(cfg.output, to_json(rec).dump() + "\n");
    return rec;
}

std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& base, const SweepSpec& sweep) {
    auto or_base = [](const auto& axis, auto value) {
        using T = std::decay_t<decltype(value)>;
        return axis.empty() ? std::vector<T>{value} : std::vector<T>(axis.begin(), axis.end());
    };
    std::vector<ExperimentConfig> out;
    for (AttackKind attack : or_base(sweep.attacks, base.attack)) {
        for (Setting setting : or_base(sweep.settings, base.setting)) {
            for (StructureMode structure : or_base(sweep.structures, base.structure)) {
                std::vector<std::size_t> ks = or_base(sweep.knn_ks, base.knn.k);
                if (structure == StructureMode::true_graph) ks.resize(1);
                for (std::size_t k : ks) {
                    for (const auto& attrs : or_base(sweep.sensitive_sets, base.sensitive_attrs)) {
                        for (std::size_t train : or_base(sweep.train_sizes, base.train_size)) {
                            ExperimentConfig c = base;
                            c.attack = attack;
                            c.setting = setting;
                            c.structure = structure;
                            c.knn.k = k;
                            c.sensitive_attrs = attrs;
                            c.train_size = train;
                            c.output.clear();
                            out.push_back(std::move(c));
                        }
                    }
                }
            }
        }
    }
    return out;
}

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ParameterError(where + ": expected an object");
    for (const auto& [key, _] : j.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            throw ParameterError(where + ": unknown key '" + key + "'");
        }
    }
}

template <typename T>
void read(const json& j, const char* key, T& into) {
    if (!j.contains(key)) return;
    try {
        into = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParameterError(std::string("config key '") + key + "': " + e.what());
    }
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double num(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

json synthetic_to_json(const SyntheticSpec& s) {
    return {{"num_nodes", s.num_nodes},         {"num_features", s.num_features},
            {"num_communities", s.num_communities}, {"num_sensitive", s.num_sensitive},
            {"p_in", s.p_in},                   {"p_out", s.p_out},
            {"flip_probability", s.flip_probability}, {"noise_std", s.noise_std},
            {"feature_kind", to_string(s.feature_kind)}};
}

SyntheticSpec synthetic_from_json(const json& j) {
    check_keys(j,
               {"num_nodes", "num_features", "num_communities", "num_sensitive", "p_in", "p_out", "flip_probability",
                "noise_std", "feature_kind"},
               "synthetic");
    SyntheticSpec s;
    read(j, "num_nodes", s.num_nodes);
    read(j, "num_features", s.num_features);
    read(j, "num_communities", s.num_communities);
    read(j, "num_sensitive", s.num_sensitive);
    read(j, "p_in", s.p_in);
    read(j, "p_out", s.p_out);
    read(j, "flip_probability", s.flip_probability);
    read(j, "noise_std", s.noise_std);
    if (j.contains("feature_kind")) s.feature_kind = feature_kind_from_string(j.at("feature_kind").get<std::string>());
    return s;
}

}  // namespace

json to_json(const ExperimentConfig& c) {
    json j;
    j["dataset"] = c.dataset;
    j["format"] = to_string(c.format);
    if (c.synthetic) {
        j["synthetic"] = synthetic_to_json(*c.synthetic);
        j["synthetic_seed"] = c.synthetic_seed;
    }
    j["sensitive_attrs"] = c.sensitive_attrs;
    j["setting"] = to_string(c.setting);
    j["structure"] = to_string(c.structure);
    j["knn_k"] = c.knn.k;
    j["knn_metric"] = to_string(c.knn.metric);
    j["attack"] = to_string(c.attack);
    j["train_size"] = c.train_size;
    j["test_size"] = c.test_size ? json(*c.test_size) : json(nullptr);
    j["candidate_count"] = c.candidate_count;
    j["imputer"] = {{"iterations", c.imputer.iterations}, {"operator", to_string(c.imputer.operator_kind)}};
    j["base_threshold"] = c.base_threshold;
    j["decay"] = c.decay;
    j["gcn"] = {{"hidden", c.gcn.hidden},
                {"learning_rate", c.gcn.learning_rate},
                {"epochs", c.gcn.epochs},
                {"weight_decay", c.gcn.weight_decay}};
    j["mlp"] = {{"hidden1", c.mlp.hidden1},
                {"hidden2", c.mlp.hidden2},
                {"epochs", c.mlp.epochs},
                {"learning_rate", c.mlp.learning_rate}};
    j["shadow_rounds"] = c.shadow_rounds;
    j["seeds"] = c.seeds;
    j["output"] = c.output;
    return j;
}

ExperimentConfig experiment_config_from_json(const json& j) {
    check_keys(j,
               {"dataset", "format", "synthetic", "synthetic_seed", "sensitive_attrs", "setting", "structure", "knn_k",
                "knn_metric", "attack", "train_size", "test_size", "candidate_count", "imputer", "base_threshold",
                "decay", "gcn", "mlp", "shadow_rounds", "seeds", "base_seed", "num_seeds", "output", "sweep"},
               "config");
    ExperimentConfig c;
    try {
        read(j, "dataset", c.dataset);
        if (j.contains("format")) c.format = dataset_format_from_string(j.at("format").get<std::string>());
        if (j.contains("synthetic")) c.synthetic = synthetic_from_json(j.at("synthetic"));
        read(j, "synthetic_seed", c.synthetic_seed);
        read(j, "sensitive_attrs", c.sensitive_attrs);
        if (j.contains("setting")) c.setting = setting_from_string(j.at("setting").get<std::string>());
        if (j.contains("structure")) c.structure = structure_mode_from_string(j.at("structure").get<std::string>());
        read(j, "knn_k", c.knn.k);
        if (j.contains("knn_metric")) c.knn.metric = knn_metric_from_string(j.at("knn_metric").get<std::string>());
        if (j.contains("attack")) c.attack = attack_kind_from_string(j.at("attack").get<std::string>());
        read(j, "train_size", c.train_size);
        if (j.contains("test_size") && !j.at("test_size").is_null()) c.test_size = j.at("test_size").get<std::size_t>();
        read(j, "candidate_count", c.candidate_count);
        if (j.contains("imputer")) {
            const json& im = j.at("imputer");
            check_keys(im, {"iterations", "operator"}, "imputer");
            read(im, "iterations", c.imputer.iterations);
            if (im.contains("operator")) {
                c.imputer.operator_kind = operator_kind_from_string(im.at("operator").get<std::string>());
            }
        }
        read(j, "base_threshold", c.base_threshold);
        read(j, "decay", c.decay);
        if (j.contains("gcn")) {
            const json& g = j.at("gcn");
            check_keys(g, {"hidden", "learning_rate", "epochs", "weight_decay"}, "gcn");
            read(g, "hidden", c.gcn.hidden);
            read(g, "learning_rate", c.gcn.learning_rate);
            read(g, "epochs", c.gcn.epochs);
            read(g, "weight_decay", c.gcn.weight_decay);
        }
        if (j.contains("mlp")) {
            const json& m = j.at("mlp");
            check_keys(m, {"hidden1", "hidden2", "epochs", "learning_rate"}, "mlp");
            read(m, "hidden1", c.mlp.hidden1);
            read(m, "hidden2", c.mlp.hidden2);
            read(m, "epochs", c.mlp.epochs);
            read(m, "learning_rate", c.mlp.learning_rate);
        }
        read(j, "shadow_rounds", c.shadow_rounds);
        if (j.contains("seeds")) {
            read(j, "seeds", c.seeds);
        } else {
            std::uint64_t base = 0;
            std::size_t count = 10;
            read(j, "base_seed", base);
            read(j, "num_seeds", count);
            c.seeds = ExperimentConfig::default_seeds(base, count);
        }
        read(j, "output", c.output);
    } catch (const json::exception& e) {
        throw ParameterError(std::string("config: ") + e.what());
    }
    return c;
}

SweepSpec sweep_spec_from_json(const json& j) {
    check_keys(j, {"train_sizes", "knn_k", "settings", "structures", "sensitive_sets", "attacks"}, "sweep");
    SweepSpec s;
    try {
        read(j, "train_sizes", s.train_sizes);
        read(j, "knn_k", s.knn_ks);
        read(j, "sensitive_sets", s.sensitive_sets);
        if (j.contains("settings")) {
            for (const auto& v : j.at("settings")) s.settings.push_back(setting_from_string(v.get<std::string>()));
        }
        if (j.contains("structures")) {
            for (const auto& v : j.at("structures")) {
                s.structures.push_back(structure_mode_from_string(v.get<std::string>()));
            }
        }
        if (j.contains("attacks")) {
            for (const auto& v : j.at("attacks")) s.attacks.push_back(attack_kind_from_string(v.get<std::string>()));
        }
    } catch (const json::exception& e) {
        throw ParameterError(std::string("sweep: ") + e.what());
    }
    return s;
}

json to_json(const ExperimentRecord& r) {
    json seeds = json::array();
    for (const SeedResult& s : r.per_seed) {
        seeds.push_back({{"seed", s.seed},
                         {"ok", s.ok},
                         {"error", s.error},
                         {"metric", num(s.metric)},
                         {"mean_confidence", num(s.mean_confidence)},
                         {"queries_used", s.queries_used},
                         {"target_train_accuracy", num(s.target_train_accuracy)},
                         {"target_test_accuracy", num(s.target_test_accuracy)},
                         {"attack_model_holdout_accuracy", s.attack_model_holdout_accuracy
                                                               ? num(*s.attack_model_holdout_accuracy)
                                                               : json(nullptr)}});
    }
    return {{"config", to_json(r.config)},
            {"metric_name", r.metric_name},
            {"per_seed", seeds},
            {"mean", num(r.mean)},
            {"stddev", num(r.stddev)},
            {"mean_confidence", num(r.mean_confidence)},
            {"queries_used", num(r.queries_used)},
            {"partial", r.partial},
            {"wall_clock_seconds", r.wall_clock_seconds}};
}

ExperimentRecord experiment_record_from_json(const json& j) {
    ExperimentRecord r;
    try {
        r.config = experiment_config_from_json(j.at("config"));
        r.metric_name = j.at("metric_name").get<std::string>();
        for (const json& s : j.at("per_seed")) {
            SeedResult sr;
            sr.seed = s.at("seed").get<std::uint64_t>();
            sr.ok = s.at("ok").get<bool>();
            sr.error = s.at("error").get<std::string>();
            sr.metric = num(s.at("metric"));
            sr.mean_confidence = num(s.at("mean_confidence"));
            sr.queries_used = s.at("queries_used").get<std::size_t>();
            sr.target_train_accuracy = num(s.at("target_train_accuracy"));
            sr.target_test_accuracy = num(s.at("target_test_accuracy"));
            if (!s.at("attack_model_holdout_accuracy").is_null()) {
                sr.attack_model_holdout_accuracy = s.at("attack_model_holdout_accuracy").get<double>();
            }
            r.per_seed.push_back(sr);
        }
        r.mean = num(j.at("mean"));
        r.stddev = num(j.at("stddev"));
        r.mean_confidence = num(j.at("mean_confidence"));
        r.queries_used = num(j.at("queries_used"));
        r.partial = j.at("partial").get<bool>();
        r.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
    } catch (const json::exception& e) {
        throw ParameterError(std::string("record: ") + e.what());
    }
    return r;
}

namespace {

const std::vector<std::string> kColumns{"dataset",    "attack",       "setting",   "structure",    "knn_k",
                                        "sensitive_attrs", "train_size", "candidate_count", "num_seeds",
                                        "failed_seeds", "metric_name", "mean",      "stddev",       "mean_confidence",
                                        "queries_used", "per_seed"};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(std::istream& in, bool& got) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    got = false;
    char ch = 0;
    while (in.get(ch)) {
        got = true;
        if (quoted) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    cur += '"';
                    in.get();
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (ch == '\n') {
            break;
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    if (quoted) throw ParameterError("csv: unterminated quoted field");
    if (got) fields.push_back(std::move(cur));
    return fields;
}

std::size_t to_size(const std::string& s) {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw ParameterError("csv: bad integer '" + s + "'");
    return static_cast<std::size_t>(v);
}

double to_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0') throw ParameterError("csv: bad number '" + s + "'");
    return v;
}

template <typename Range, typename F>
std::string join(const Range& r, F f) {
    std::string out;
    for (const auto& v : r) {
        if (!out.empty()) out += ';';
        out += f(v);
    }
    return out;
}

}  // namespace

TableRow table_row(const ExperimentRecord& r) {
    const ExperimentConfig& c = r.config;
    TableRow row;
    row.dataset = c.synthetic ? "synthetic" : c.dataset;
    row.attack = to_string(c.attack);
    row.setting = to_string(c.setting);
    row.structure = to_string(c.structure);
    row.knn_k = c.structure == StructureMode::knn ? c.knn.k : 0;
    row.sensitive_attrs = join(c.sensitive_attrs, [](std::size_t a) { return std::to_string(a); });
    row.train_size = c.train_size;
    row.candidate_count = c.candidate_count;
    row.num_seeds = r.per_seed.size();
    row.failed_seeds = static_cast<std::size_t>(
        std::count_if(r.per_seed.begin(), r.per_seed.end(), [](const SeedResult& s) { return !s.ok; }));
    row.metric_name = r.metric_name;
    row.mean = r.mean;
    row.stddev = r.stddev;
    row.mean_confidence = r.mean_confidence;
    row.queries_used = r.queries_used;
    row.per_seed = join(r.per_seed, [](const SeedResult& s) { return s.ok ? fmt(s.metric) : std::string("fail"); });
    return row;
}

std::string emit_table(const std::vector<ExperimentRecord>& records) {
    if (records.empty()) throw ParameterError("emit_table: no records");
    std::ostringstream out;
    for (std::size_t i = 0; i < kColumns.size(); ++i) out << (i ? "," : "") << kColumns[i];
    out << '\n';
    for (const ExperimentRecord& rec : records) {
        const TableRow r = table_row(rec);
        const std::vector<std::string> fields{r.dataset,
                                              r.attack,
                                              r.setting,
                                              r.structure,
                                              std::to_string(r.knn_k),
                                              r.sensitive_attrs,
                                              std::to_string(r.train_size),
                                              std::to_string(r.candidate_count),
                                              std::to_string(r.num_seeds),
                                              std::to_string(r.failed_seeds),
                                              r.metric_name,
                                              fmt(r.mean),
                                              fmt(r.stddev),
                                              fmt(r.mean_confidence),
                                              fmt(r.queries_used),
                                              r.per_seed};
        for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << csv_field(fields[i]);
        out << '\n';
    }
    return out.str();
}

std::vector<TableRow> parse_table(const std::string& csv) {
    std::istringstream in(csv);
    bool got = false;
    const std::vector<std::string> header = split_csv_line(in, got);
    if (header != kColumns) throw ParameterError("parse_table: unexpected header");
    std::vector<TableRow> rows;
    for (;;) {
        const std::vector<std::string> f = split_csv_line(in, got);
        if (!got) break;
        if (f.size() == 1 && f[0].empty()) continue;
        if (f.size() != kColumns.size()) {
            throw ParameterError("parse_table: row " + std::to_string(rows.size() + 1) + " has " +
                                 std::to_string(f.size()) + " fields");
        }
        TableRow r;
        r.dataset = f[0];
        r.attack = f[1];
        r.setting = f[2];
        r.structure = f[3];
        r.knn_k = to_size(f[4]);
        r.sensitive_attrs = f[5];
        r.train_size = to_size(f[6]);
        r.candidate_count = to_size(f[7]);
        r.num_seeds = to_size(f[8]);
        r.failed_seeds = to_size(f[9]);
        r.metric_name = f[10];
        r.mean = to_double(f[11]);
        r.stddev = to_double(f[12]);
        r.mean_confidence = to_double(f[13]);
        r.queries_used = to_double(f[14]);
        r.per_seed = f[15];
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace aia
