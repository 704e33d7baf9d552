#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "aia/harness.hpp"
#include "aia/metrics.hpp"
#include "support.hpp"

using namespace aia;

namespace {

ExperimentConfig synthetic_config(AttackKind attack = AttackKind::fp) {
    ExperimentConfig c;
    SyntheticSpec spec;
    spec.num_nodes = 200;
    spec.p_out = 0.0;
    c.synthetic = spec;
    c.synthetic_seed = 3;
    c.train_size = 150;
    c.test_size = 50;
    c.candidate_count = 40;
    c.attack = attack;
    c.seeds = ExperimentConfig::default_seeds(0, 3);
    return c;
}

bool same_results(const ExperimentRecord& a, const ExperimentRecord& b) {
    if (a.per_seed.size() != b.per_seed.size()) return false;
    for (std::size_t i = 0; i < a.per_seed.size(); ++i) {
        const SeedResult& x = a.per_seed[i];
        const SeedResult& y = b.per_seed[i];
        if (x.seed != y.seed || x.ok != y.ok || x.metric != y.metric || x.mean_confidence != y.mean_confidence ||
            x.queries_used != y.queries_used || x.target_test_accuracy != y.target_test_accuracy) {
            return false;
        }
    }
    return a.mean == b.mean && a.stddev == b.stddev && a.partial == b.partial;
}

}  // namespace

TEST_CASE("hamming metric examples") {
    Matrix t(2, 2);
    t << 1, 0, 0, 1;
    Mask m = Mask::Constant(2, 2, true);
    CHECK(metric_hamming_pct(t, t, m) == 100.0);
    CHECK(metric_hamming_pct(Matrix::Ones(2, 2) - t, t, m) == 0.0);
    Matrix half = t;
    half(0, 0) = 0;
    half(1, 1) = 0;
    CHECK(metric_hamming_pct(half, t, m) == 50.0);
    m(0, 0) = false;
    m(1, 1) = false;
    CHECK(metric_hamming_pct(half, t, m) == 100.0);

    Matrix bad = t;
    bad(0, 1) = 0.5;
    CHECK_THROWS_AS(metric_hamming_pct(bad, t, m), InputError);
    CHECK_THROWS_AS(metric_hamming_pct(t, t, Mask::Constant(2, 2, false)), ParameterError);
}

TEST_CASE("mse metric examples") {
    Matrix t(10, 2);
    for (Eigen::Index i = 0; i < t.size(); ++i) t(i) = static_cast<double>(i) * 0.3;
    const Mask m = Mask::Constant(10, 2, true);
    CHECK(metric_mse(t, t, m) == 0.0);
    CHECK(std::abs(metric_mse(t.array() + 0.25, t, m) - 0.0625) < 1e-15);
    Matrix one_off = t;
    one_off(4, 1) += 1.0;
    CHECK(std::abs(metric_mse(one_off, t, m) - 0.05) < 1e-15);
    CHECK_THROWS_AS(metric_mse(t, t, Mask::Constant(10, 2, false)), ParameterError);
}

TEST_CASE("metrics agree with brute force on random fixtures") {
    auto e = rng::make_engine(5);
    for (int trial = 0; trial < 100; ++trial) {
        const auto r = static_cast<Eigen::Index>(1 + rng::index(e, 30));
        const auto c = static_cast<Eigen::Index>(1 + rng::index(e, 5));
        Matrix a(r, c);
        Matrix b(r, c);
        Matrix ca(r, c);
        Matrix cb(r, c);
        Mask m(r, c);
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            a(i) = rng::bernoulli(e, 0.5) ? 1.0 : 0.0;
            b(i) = rng::bernoulli(e, 0.5) ? 1.0 : 0.0;
            ca(i) = rng::normal(e);
            cb(i) = rng::normal(e);
            m(i) = rng::bernoulli(e, 0.4);
        }
        m(0, 0) = true;
        const auto md = testsupport::to_dense(m);
        CHECK(metric_hamming_pct(a, b, m) == oracle::hamming_pct(testsupport::to_dense(a), testsupport::to_dense(b), md));
        CHECK(std::abs(metric_mse(ca, cb, m) - oracle::mse(testsupport::to_dense(ca), testsupport::to_dense(cb), md)) <
              1e-12);
    }
}

TEST_CASE("experiments are deterministic and aggregate correctly") {
    const ExperimentConfig cfg = synthetic_config();
    const ExperimentRecord a = run_experiment(cfg);
    const ExperimentRecord b = run_experiment(cfg);
    CHECK(same_results(a, b));
    CHECK_FALSE(a.partial);
    CHECK(a.metric_name == "hamming_pct");
    REQUIRE(a.per_seed.size() == 3);
    double sum = 0.0;
    for (const auto& s : a.per_seed) {
        CHECK(s.ok);
        CHECK(s.queries_used == 1);
        sum += s.metric;
    }
    const double mean = sum / 3.0;
    double ss = 0.0;
    for (const auto& s : a.per_seed) ss += (s.metric - mean) * (s.metric - mean);
    CHECK(std::abs(a.mean - mean) < 1e-9);
    CHECK(std::abs(a.stddev - std::sqrt(ss / 3.0)) < 1e-9);
    CHECK(a.queries_used == 1.0);

    const ExperimentRecord ma = run_experiment(synthetic_config(AttackKind::fp_ma));
    for (const auto& s : ma.per_seed) CHECK(s.queries_used > 1);
}

TEST_CASE("every attack runs through the harness") {
    for (AttackKind k : {AttackKind::ri, AttackKind::ri_ma, AttackKind::sa}) {
        ExperimentConfig cfg = synthetic_config(k);
        cfg.seeds = {1};
        if (k == AttackKind::sa) {
            cfg.train_size = 60;
            cfg.test_size = 30;
        }
        const ExperimentRecord r = run_experiment(cfg);
        CHECK_FALSE(r.partial);
        if (k == AttackKind::sa) CHECK(r.per_seed[0].attack_model_holdout_accuracy.has_value());
    }
    ExperimentConfig knn = synthetic_config(AttackKind::fp);
    knn.structure = StructureMode::knn;
    knn.knn.k = 3;
    knn.seeds = {2};
    CHECK_FALSE(run_experiment(knn).partial);
}

TEST_CASE("continuous data are scored by mse and failed seeds mark the record partial") {
    ExperimentConfig cfg = synthetic_config();
    cfg.synthetic->feature_kind = FeatureKind::continuous;
    const ExperimentRecord r = run_experiment(cfg);
    CHECK(r.metric_name == "mse");
    CHECK_FALSE(r.partial);

    cfg.attack = AttackKind::sa;
    cfg.train_size = 60;
    cfg.test_size = 30;
    const ExperimentRecord sa = run_experiment(cfg);
    CHECK(sa.partial);
    for (const auto& s : sa.per_seed) {
        CHECK_FALSE(s.ok);
        CHECK(s.error.find("binary") != std::string::npos);
    }
    CHECK(std::isnan(sa.mean));
}

TEST_CASE("invalid configs are rejected up front") {
    ExperimentConfig cfg = synthetic_config();
    cfg.seeds.clear();
    CHECK_THROWS_AS(run_experiment(cfg), ParameterError);
    cfg = synthetic_config();
    cfg.sensitive_attrs = {99};
    CHECK_THROWS_AS(run_experiment(cfg), ParameterError);
    cfg = synthetic_config();
    cfg.candidate_count = 200;
    CHECK_THROWS_AS(run_experiment(cfg), ParameterError);
}

TEST_CASE("knn view graph never touches the true edges") {
    ExperimentConfig cfg = synthetic_config();
    const Dataset ds = load_experiment_dataset(cfg);
    int calls = 0;
    const auto accessor = [&]() -> const SparseGraph& {
        ++calls;
        return ds.graph;
    };
    const std::vector<NodeId> ids{0, 1, 2, 3, 4, 5, 6, 7};
    const Matrix feats = ds.features(ids, Eigen::seq(1, 15));
    cfg.structure = StructureMode::knn;
    cfg.knn.k = 2;
    const SparseGraph g = build_view_graph(cfg, accessor, ids, feats);
    CHECK(calls == 0);
    CHECK(g == build_knn_graph(feats, 2, KnnMetric::euclidean));
    cfg.structure = StructureMode::true_graph;
    CHECK(build_view_graph(cfg, accessor, ids, feats) == induced_subgraph(ds.graph, ids));
    CHECK(calls == 1);
}

TEST_CASE("sweep expansion") {
    ExperimentConfig base = synthetic_config();
    SweepSpec s;
    CHECK(expand_sweep(base, s).size() == 4);
    s.train_sizes = {100, 1000};
    const auto two = expand_sweep(base, s);
    REQUIRE(two.size() == 2);
    CHECK(two[0].train_size == 100);
    CHECK(two[1].train_size == 1000);
    s.attacks = {AttackKind::fp, AttackKind::ri};
    s.settings = {Setting::setting1, Setting::setting2};
    s.structures = {StructureMode::true_graph, StructureMode::knn};
    s.knn_ks = {2, 5, 8};
    // true_graph ignores k: (1 + 3) structures-with-k per attack and setting.
    CHECK(expand_sweep(base, s).size() == 2 * 2 * 4 * 2);
}

TEST_CASE("config JSON round trip and strictness") {
    ExperimentConfig c = synthetic_config(AttackKind::ri_ma);
    c.sensitive_attrs = {0, 2};
    c.setting = Setting::setting2;
    c.structure = StructureMode::knn;
    c.knn = {8, KnnMetric::cosine};
    c.gcn.hidden = 32;
    c.imputer.operator_kind = OperatorKind::combinatorial_laplacian;
    const ExperimentConfig back = experiment_config_from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));

    CHECK_THROWS_AS(experiment_config_from_json(nlohmann::json{{"atack", "fp"}}), ParameterError);
    CHECK_THROWS_AS(experiment_config_from_json(nlohmann::json{{"attack", "zz"}}), ParameterError);
    CHECK_THROWS_AS(experiment_config_from_json(nlohmann::json{{"train_size", "many"}}), ParameterError);
    const ExperimentConfig seeded = experiment_config_from_json(nlohmann::json{{"base_seed", 100}});
    CHECK(seeded.seeds == ExperimentConfig::default_seeds(100));
    CHECK(seeded.seeds.size() == 10);
    CHECK(seeded.seeds.back() == 109);

    const SweepSpec sw = sweep_spec_from_json(nlohmann::json{{"attacks", {"fp", "sa"}}, {"knn_k", {2, 5}}});
    CHECK(sw.attacks.size() == 2);
    CHECK(sw.train_sizes == std::vector<std::size_t>{100, 200, 500, 1000});
}

TEST_CASE("tables: stable columns and round trip") {
    const ExperimentRecord fp = run_experiment(synthetic_config(AttackKind::fp));
    ExperimentConfig rc = synthetic_config(AttackKind::ri);
    rc.dataset = "with,comma \"quoted\"";
    rc.synthetic.reset();
    ExperimentRecord ri = fp;
    ri.config = rc;

    const std::string one = emit_table({fp});
    CHECK(std::count(one.begin(), one.end(), '\n') == 2);
    CHECK(one.rfind("dataset,attack,setting,", 0) == 0);
    CHECK(one.find("wall") == std::string::npos);

    const std::vector<ExperimentRecord> both{fp, ri};
    const auto rows = parse_table(emit_table(both));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == table_row(fp));
    CHECK(rows[1] == table_row(ri));
    CHECK(rows[0].attack == "fp");
    CHECK(rows[1].attack == "ri");
    CHECK(rows[1].dataset == rc.dataset);
    CHECK_THROWS_AS(emit_table({}), ParameterError);
    CHECK_THROWS_AS(parse_table("a,b\n1,2\n"), ParameterError);
}

TEST_CASE("record JSON round trip") {
    const ExperimentRecord r = run_experiment(synthetic_config());
    const ExperimentRecord back = experiment_record_from_json(nlohmann::json::parse(to_json(r).dump()));
    CHECK(same_results(r, back));
    CHECK(to_json(back) == to_json(r));
}

TEST_CASE("records are written atomically") {
    const auto dir = testsupport::temp_dir("harness_out");
    ExperimentConfig cfg = synthetic_config();
    cfg.seeds = {0};
    cfg.output = (dir / "sub" / "record.jsonl").string();
    run_experiment(cfg);
    std::ifstream in(cfg.output);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(nlohmann::json::parse(line).at("per_seed").size() == 1);
    CHECK_FALSE(std::filesystem::exists(cfg.output + ".tmp"));
}

TEST_CASE("data root comes from the environment") {
    ::setenv("AIA_DATA_ROOT", "/some/where", 1);
    CHECK(data_root() == std::filesystem::path("/some/where"));
    ::unsetenv("AIA_DATA_ROOT");
    CHECK(data_root() == std::filesystem::path("data"));
    ExperimentConfig cfg;
    cfg.dataset = "does-not-exist";
    CHECK_THROWS_AS(load_experiment_dataset(cfg), LoadError);
}
