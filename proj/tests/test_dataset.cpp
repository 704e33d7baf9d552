#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include "aia/dataset.hpp"
#include "support.hpp"

using namespace aia;

namespace {

void write(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

std::set<NodeId> as_set(const std::vector<NodeId>& v) { return {v.begin(), v.end()}; }

bool disjoint(const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
    const auto sa = as_set(a);
    for (NodeId x : b) {
        if (sa.count(x)) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("planetoid-like fixture loads exactly") {
    const auto dir = testsupport::temp_dir("planetoid");
    write(dir / "tiny.content", "p10 1 0 1 beta\np20 0 1 1 alpha\n");
    write(dir / "tiny.cites", "p10 p20\np20 p10\n");
    const Dataset ds = load_dataset(dir, DatasetFormat::planetoid_like);
    CHECK(ds.name == "tiny");
    CHECK(ds.num_nodes() == 2);
    CHECK(ds.graph.num_edges() == 1);
    Matrix expect(2, 3);
    expect << 1, 0, 1, 0, 1, 1;
    CHECK(ds.features == expect);
    CHECK(ds.labels == std::vector<std::int32_t>{1, 0});
    CHECK(ds.num_classes == 2);
    CHECK(ds.feature_kind == FeatureKind::binary);
}

TEST_CASE("planetoid-like errors name the offending record") {
    const auto dir = testsupport::temp_dir("planetoid_bad");
    write(dir / "t.content", "a 1 0 x\nb 1 y\n");
    write(dir / "t.cites", "a b\n");
    try {
        load_dataset(dir, DatasetFormat::planetoid_like);
        FAIL("expected LoadError");
    } catch (const LoadError& e) {
        CHECK(std::string(e.what()).find("'b'") != std::string::npos);
    }
    write(dir / "t.content", "a 1 0 x\nb 1 q y\n");
    try {
        load_dataset(dir, DatasetFormat::planetoid_like);
        FAIL("expected LoadError");
    } catch (const LoadError& e) {
        CHECK(std::string(e.what()).find("'q'") != std::string::npos);
    }
    write(dir / "t.content", "a 1 0 x\nb 1 1 y\n");
    write(dir / "t.cites", "a zz\n");
    try {
        load_dataset(dir, DatasetFormat::planetoid_like);
        FAIL("expected LoadError");
    } catch (const LoadError& e) {
        CHECK(std::string(e.what()).find("zz") != std::string::npos);
    }
}

TEST_CASE("manifest checksums are verified when present") {
    const auto dir = testsupport::temp_dir("manifest");
    write(dir / "m.content", "a 1 x\nb 0 y\n");
    write(dir / "m.cites", "a b\n");
    write(dir / "manifest.sha256",
          "0000000000000000000000000000000000000000000000000000000000000000  m.cites\n");
    CHECK_THROWS_AS(load_dataset(dir, DatasetFormat::planetoid_like), LoadError);
    write(dir / "manifest.sha256",
          "6efd9a5735955a95564772b789ccae1f63b6a4f2828f2901be7c8751c95cb2c7  m.content\n"
          "01186fcf04b4b447f393e552964c08c7b419c1ad7a25c342a0b631b1967d3a27 *m.cites\n");
    CHECK_NOTHROW(load_dataset(dir, DatasetFormat::planetoid_like));
    write(dir / "m.cites", "b a\n");
    CHECK_THROWS_WITH_AS(load_dataset(dir, DatasetFormat::planetoid_like), doctest::Contains("m.cites"), LoadError);
}

TEST_CASE("edge_list_plus_csv errors") {
    const auto dir = testsupport::temp_dir("csv_bad");
    write(dir / "edges.txt", "0 1\n");
    write(dir / "features.csv", "1,0\n0,abc\n");
    write(dir / "labels.txt", "0\n1\n");
    CHECK_THROWS_WITH_AS(load_dataset(dir, DatasetFormat::edge_list_plus_csv), doctest::Contains("abc"), LoadError);
    write(dir / "features.csv", "1,0\n0\n");
    CHECK_THROWS_WITH_AS(load_dataset(dir, DatasetFormat::edge_list_plus_csv), doctest::Contains("features.csv:2"),
                         LoadError);
    write(dir / "features.csv", "1,0\n0,1\n");
    write(dir / "edges.txt", "0 5\n");
    CHECK_THROWS_WITH_AS(load_dataset(dir, DatasetFormat::edge_list_plus_csv), doctest::Contains("0 5"), LoadError);
    write(dir / "edges.txt", "0 1\n");
    write(dir / "labels.txt", "0\n");
    CHECK_THROWS_AS(load_dataset(dir, DatasetFormat::edge_list_plus_csv), LoadError);
    CHECK_THROWS_AS(load_dataset(dir / "nope", DatasetFormat::edge_list_plus_csv), LoadError);
}

TEST_CASE("save then load reproduces the dataset") {
    for (FeatureKind kind : {FeatureKind::binary, FeatureKind::continuous}) {
        SyntheticSpec spec;
        spec.feature_kind = kind;
        spec.num_nodes = 60;
        const Dataset ds = generate_synthetic(spec, 5);
        const auto dir = testsupport::temp_dir(std::string("roundtrip_") + to_string(kind));
        save_dataset(ds, dir);
        CHECK(load_dataset(dir, DatasetFormat::edge_list_plus_csv) == ds);
    }
}

TEST_CASE("cora statistics") {
    const auto dir = testsupport::cora_dir();
    if (!dir) {
        MESSAGE("cora not found under $AIA_DATA_ROOT; skipped");
        return;
    }
    const Dataset ds = load_dataset(*dir, DatasetFormat::planetoid_like);
    CHECK(ds.num_nodes() == 2708);
    CHECK(ds.num_features() == 1433);
    CHECK(ds.num_classes == 7);
    CHECK(ds.graph.num_edges() == 5278);
    CHECK(ds.feature_kind == FeatureKind::binary);
}

TEST_CASE("pubmed statistics") {
    const char* env = std::getenv("AIA_DATA_ROOT");
    const std::filesystem::path dir = std::filesystem::path(env && *env ? env : "data") / "pubmed_csv";
    if (!std::filesystem::exists(dir / "features.csv")) {
        MESSAGE("pubmed_csv not found under $AIA_DATA_ROOT; skipped");
        return;
    }
    const Dataset ds = load_dataset(dir, DatasetFormat::edge_list_plus_csv);
    CHECK(ds.num_nodes() == 19717);
    CHECK(ds.num_features() == 500);
    CHECK(ds.num_classes == 3);
    CHECK(ds.feature_kind == FeatureKind::continuous);
}

TEST_CASE("make_split invariants and determinism") {
    SyntheticSpec spec;
    spec.num_nodes = 1000;
    const Dataset ds = generate_synthetic(spec, 1);
    SplitSpec ss;
    ss.train_size = 400;
    ss.test_size = 300;
    const Split a = make_split(ds, ss, 9);
    const Split b = make_split(ds, ss, 9);
    CHECK(a.candidate_ids == b.candidate_ids);
    CHECK(a.train_ids == b.train_ids);
    CHECK(a.train_ids.size() == 400);
    CHECK(a.test_ids.size() == 300);
    CHECK(a.candidate_ids.size() == 100);
    CHECK(disjoint(a.train_ids, a.test_ids));
    const auto train = as_set(a.train_ids);
    for (NodeId c : a.candidate_ids) CHECK(train.count(c) == 1);
    CHECK(make_split(ds, ss, 10).candidate_ids != a.candidate_ids);

    // Candidates stay put when only the training size changes.
    ss.train_size = 700;
    CHECK(make_split(ds, ss, 9).candidate_ids == a.candidate_ids);

    ss.train_size = 1000;
    ss.test_size.reset();
    CHECK(make_split(ds, ss, 9).train_ids.size() == 1000);

    SplitSpec frac;
    frac.train_fraction = 0.5;
    CHECK(make_split(ds, frac, 1).train_ids.size() == 500);
}

TEST_CASE("shadow split gives four disjoint sets") {
    SyntheticSpec spec;
    spec.num_nodes = 1000;
    const Dataset ds = generate_synthetic(spec, 1);
    SplitSpec ss;
    ss.train_size = 400;
    ss.test_size = 100;
    ss.shadow = true;
    const Split s = make_split(ds, ss, 3);
    REQUIRE(s.shadow_train_ids);
    REQUIRE(s.shadow_test_ids);
    const std::vector<std::vector<NodeId>> sets{s.train_ids, s.test_ids, *s.shadow_train_ids, *s.shadow_test_ids};
    for (std::size_t i = 0; i < sets.size(); ++i) {
        for (std::size_t j = i + 1; j < sets.size(); ++j) CHECK(disjoint(sets[i], sets[j]));
    }
    CHECK(s.shadow_train_ids->size() == 400);
}

TEST_CASE("make_split errors") {
    SyntheticSpec spec;
    spec.num_nodes = 100;
    const Dataset ds = generate_synthetic(spec, 1);
    SplitSpec ss;
    ss.train_size = 80;
    ss.test_size = 30;
    CHECK_THROWS_AS(make_split(ds, ss, 0), ParameterError);
    ss.test_size = 10;
    ss.candidate_count = 90;
    CHECK_THROWS_AS(make_split(ds, ss, 0), ParameterError);
    ss.candidate_count = 10;
    ss.shadow = true;
    CHECK_THROWS_AS(make_split(ds, ss, 0), ParameterError);
    CHECK_THROWS_AS(make_split(ds, SplitSpec{}, 0), ParameterError);
}

TEST_CASE("mask_sensitive cell counts and placement") {
    SyntheticSpec spec;
    spec.num_nodes = 400;
    const Dataset ds = generate_synthetic(spec, 2);
    SplitSpec ss;
    ss.train_size = 200;
    const Split split = make_split(ds, ss, 4);
    CHECK(mask_sensitive(ds, split, {3}, Setting::setting1, 4).masked_count() == 100);
    CHECK(mask_sensitive(ds, split, {3}, Setting::setting2, 4).masked_count() == 50);
    CHECK(mask_sensitive(ds, split, {3, 5}, Setting::setting1, 4).masked_count() == 200);

    ss.candidate_count = 7;
    const Split odd = make_split(ds, ss, 4);
    const PartialFeatureMatrix x2 = mask_sensitive(ds, odd, {0, 1}, Setting::setting2, 8);
    // ceil(7/2) = 4 revealed, 3 hidden rows.
    CHECK(x2.masked_rows().size() == 3);

    for (Setting setting : {Setting::setting1, Setting::setting2}) {
        const PartialFeatureMatrix x = mask_sensitive(ds, split, {1, 6}, setting, 11);
        const auto cands = as_set(split.candidate_ids);
        Matrix restored = x.values;
        for (Eigen::Index i = 0; i < x.values.rows(); ++i) {
            for (Eigen::Index j = 0; j < x.values.cols(); ++j) {
                if (x.missing_mask(i, j)) {
                    CHECK(cands.count(static_cast<NodeId>(i)) == 1);
                    CHECK((j == 1 || j == 6));
                    CHECK(std::isnan(x.values(i, j)));
                    restored(i, j) = ds.features(i, j);
                }
            }
        }
        CHECK(restored == ds.features);
    }
}

TEST_CASE("mask_sensitive errors") {
    const Dataset ds = testsupport::homophilous();
    SplitSpec ss;
    ss.train_size = 150;
    const Split split = make_split(ds, ss, 1);
    CHECK_THROWS_AS(mask_sensitive(ds, split, {}, Setting::setting1, 1), ParameterError);
    CHECK_THROWS_AS(mask_sensitive(ds, split, {16}, Setting::setting1, 1), ParameterError);
    CHECK_THROWS_AS(mask_sensitive(ds, split, {2, 2}, Setting::setting1, 1), ParameterError);
}

TEST_CASE("restrict_rows and induced_dataset keep labels and features") {
    const Dataset ds = testsupport::homophilous();
    const std::vector<NodeId> ids{5, 17, 3};
    const Dataset sub = induced_dataset(ds, ids);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        CHECK(sub.labels[i] == ds.labels[ids[i]]);
        CHECK(sub.features.row(static_cast<Eigen::Index>(i)) == ds.features.row(static_cast<Eigen::Index>(ids[i])));
    }
    SplitSpec ss;
    ss.train_size = 150;
    const Split split = make_split(ds, ss, 1);
    const PartialFeatureMatrix x = mask_sensitive(ds, split, {0}, Setting::setting1, 1);
    const PartialFeatureMatrix v = restrict_rows(x, split.candidate_ids);
    CHECK(v.masked_count() == 100);
    CHECK(v.values.rightCols(15) == ds.features(split.candidate_ids, Eigen::seq(1, 15)));
}

TEST_CASE("synthetic generator") {
    const Dataset a = testsupport::homophilous(3);
    const Dataset b = testsupport::homophilous(3);
    CHECK(a == b);
    CHECK(std::memcmp(a.features.data(), b.features.data(), sizeof(double) * static_cast<std::size_t>(a.features.size())) == 0);
    CHECK_NOTHROW(a.validate());
    for (std::size_t i = 0; i < a.num_nodes(); ++i) {
        CHECK(a.features(static_cast<Eigen::Index>(i), 0) == static_cast<double>(a.labels[i] % 2));
    }
    for (auto [u, v] : a.graph.edges()) CHECK(a.labels[u] == a.labels[v]);

    SyntheticSpec spec;
    spec.num_nodes = 4000;
    std::vector<int> community;
    std::vector<int> clean;
    std::vector<int> noisy;
    const Dataset d0 = generate_synthetic(spec, 1);
    spec.flip_probability = 0.5;
    const Dataset d5 = generate_synthetic(spec, 1);
    for (std::size_t i = 0; i < spec.num_nodes; ++i) {
        community.push_back(d0.labels[i]);
        clean.push_back(static_cast<int>(d0.features(static_cast<Eigen::Index>(i), 0)));
        noisy.push_back(static_cast<int>(d5.features(static_cast<Eigen::Index>(i), 0)));
    }
    CHECK(std::abs(oracle::mutual_information(community, clean) - std::log(2.0)) < 1e-3);
    CHECK(oracle::mutual_information(community, noisy) < 0.01);

    spec.feature_kind = FeatureKind::continuous;
    spec.flip_probability = 0.0;
    const Dataset c = generate_synthetic(spec, 1);
    CHECK(c.feature_kind == FeatureKind::continuous);
    CHECK_NOTHROW(c.validate());

    SyntheticSpec bad;
    bad.num_sensitive = 20;
    CHECK_THROWS_AS(generate_synthetic(bad, 0), ParameterError);
    bad = {};
    bad.p_in = 1.5;
    CHECK_THROWS_AS(generate_synthetic(bad, 0), ParameterError);
}

TEST_CASE("dataset validation") {
    Dataset ds = testsupport::homophilous();
    ds.features(0, 3) = 0.5;
    CHECK_THROWS_AS(ds.validate(), DataError);
    ds = testsupport::homophilous();
    ds.labels[0] = 5;
    CHECK_THROWS_AS(ds.validate(), DataError);
    ds = testsupport::homophilous();
    ds.labels.pop_back();
    CHECK_THROWS_AS(ds.validate(), DataError);
}
