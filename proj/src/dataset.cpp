#include "aia/dataset.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>
#include <openssl/evp.h>

#include "aia/random.hpp"

namespace aia {

namespace fs = std::filesystem;

void Dataset::validate() const {
    const auto n = num_nodes();
    if (static_cast<std::size_t>(features.rows()) != n) {
        throw DataError(name + ": features have " + std::to_string(features.rows()) + " rows, graph has " +
                        std::to_string(n) + " nodes");
    }
    if (labels.size() != n) {
        throw DataError(name + ": " + std::to_string(labels.size()) + " labels for " + std::to_string(n) + " nodes");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
            throw DataError(name + ": node " + std::to_string(i) + " has class " + std::to_string(labels[i]) +
                            " outside [0, " + std::to_string(num_classes) + ")");
        }
    }
    if (!features.allFinite()) throw DataError(name + ": non-finite feature value");
    if (feature_kind == FeatureKind::binary) {
        for (Eigen::Index i = 0; i < features.rows(); ++i) {
            for (Eigen::Index j = 0; j < features.cols(); ++j) {
                const double v = features(i, j);
                if (v != 0.0 && v != 1.0) {
                    throw DataError(name + ": binary dataset has value " + std::to_string(v) + " at (" +
                                    std::to_string(i) + ", " + std::to_string(j) + ")");
                }
            }
        }
    }
}

bool operator==(const Dataset& a, const Dataset& b) {
    return a.name == b.name && a.graph == b.graph && a.features.rows() == b.features.rows() &&
           a.features.cols() == b.features.cols() && a.features == b.features && a.labels == b.labels &&
           a.num_classes == b.num_classes && a.feature_kind == b.feature_kind;
}

namespace {

bool all_binary(const Matrix& m) {
    return ((m.array() == 0.0) || (m.array() == 1.0)).all();
}

double parse_double(const std::string& tok, const std::string& where) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || end != tok.c_str() + tok.size() || errno == ERANGE) {
        throw LoadError(where + ": unparseable value '" + tok + "'");
    }
    return v;
}

std::string sha256_hex(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open " + path.string() + " for checksum");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    char tmp[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(tmp, sizeof tmp, "%02x", digest[i]);
        hex += tmp;
    }
    return hex;
}

void verify_manifest(const fs::path& dir) {
    const fs::path manifest = dir / "manifest.sha256";
    if (!fs::exists(manifest)) return;
    std::ifstream in(manifest);
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string digest;
        std::string file;
        if (!(ss >> digest >> file)) continue;
        if (!file.empty() && file[0] == '*') file.erase(0, 1);
        const std::string actual = sha256_hex(dir / file);
        if (actual != digest) {
            throw LoadError("checksum mismatch for " + (dir / file).string() + ": manifest " + digest + ", actual " +
                            actual);
        }
    }
}

Dataset load_planetoid_like(const fs::path& dir) {
    fs::path content;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".content") {
            if (!content.empty()) throw LoadError(dir.string() + ": more than one .content file");
            content = entry.path();
        }
    }
    if (content.empty()) throw LoadError(dir.string() + ": no .content file");
    fs::path cites = content;
    cites.replace_extension(".cites");
    verify_manifest(dir);

    std::ifstream in(content);
    if (!in) throw LoadError("cannot open " + content.string());
    std::vector<std::string> paper_ids;
    std::vector<std::string> label_names;
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::vector<std::string> toks;
        for (std::string t; ss >> t;) toks.push_back(std::move(t));
        if (toks.empty()) continue;
        const std::string where = content.string() + ":" + std::to_string(lineno);
        if (toks.size() < 3) throw LoadError(where + ": expected '<id> <features>+ <label>'");
        std::vector<double> row(toks.size() - 2);
        for (std::size_t j = 1; j + 1 < toks.size(); ++j) row[j - 1] = parse_double(toks[j], where);
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw LoadError(where + ": record '" + toks.front() + "' has " + std::to_string(row.size()) +
                            " features, expected " + std::to_string(rows.front().size()));
        }
        paper_ids.push_back(toks.front());
        label_names.push_back(toks.back());
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw LoadError(content.string() + ": no records");

    std::unordered_map<std::string, NodeId> index;
    for (std::size_t i = 0; i < paper_ids.size(); ++i) {
        if (!index.emplace(paper_ids[i], i).second) {
            throw LoadError(content.string() + ": duplicate record id '" + paper_ids[i] + "'");
        }
    }

    std::vector<std::pair<NodeId, NodeId>> edges;
    std::ifstream cin_(cites);
    if (!cin_) throw LoadError("cannot open " + cites.string());
    lineno = 0;
    while (std::getline(cin_, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string a;
        std::string b;
        if (!(ss >> a)) continue;
        const std::string where = cites.string() + ":" + std::to_string(lineno);
        if (!(ss >> b)) throw LoadError(where + ": expected two ids");
        auto ia = index.find(a);
        auto ib = index.find(b);
        if (ia == index.end() || ib == index.end()) {
            throw LoadError(where + ": dangling endpoint in '" + a + " " + b + "'");
        }
        edges.emplace_back(ia->second, ib->second);
    }

    const std::set<std::string> classes(label_names.begin(), label_names.end());
    std::map<std::string, std::int32_t> class_id;
    for (const auto& c : classes) class_id.emplace(c, static_cast<std::int32_t>(class_id.size()));

    Dataset ds;
    ds.name = content.stem().string();
    ds.graph = SparseGraph(rows.size(), edges);
    ds.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    ds.labels.reserve(rows.size());
    for (const auto& l : label_names) ds.labels.push_back(class_id.at(l));
    ds.num_classes = classes.size();
    ds.feature_kind = all_binary(ds.features) ? FeatureKind::binary : FeatureKind::continuous;
    ds.validate();
    return ds;
}

Dataset load_edge_list_plus_csv(const fs::path& dir) {
    const fs::path features_path = dir / "features.csv";
    std::ifstream fin(features_path);
    if (!fin) throw LoadError("cannot open " + features_path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(fin, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = features_path.string() + ":" + std::to_string(lineno);
        std::vector<double> row;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            row.push_back(parse_double(line.substr(start, comma - start), where));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw LoadError(where + ": row has " + std::to_string(row.size()) + " columns, expected " +
                            std::to_string(rows.front().size()));
        }
        rows.push_back(std::move(row));
    }

    const fs::path labels_path = dir / "labels.txt";
    std::ifstream lin(labels_path);
    if (!lin) throw LoadError("cannot open " + labels_path.string());
    std::vector<std::int32_t> labels;
    lineno = 0;
    while (std::getline(lin, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = labels_path.string() + ":" + std::to_string(lineno);
        const double v = parse_double(line.substr(0, line.find_last_not_of(" \t\r") + 1), where);
        if (v < 0 || v != std::floor(v)) throw LoadError(where + ": label '" + line + "' is not a class id");
        labels.push_back(static_cast<std::int32_t>(v));
    }
    if (labels.size() != rows.size()) {
        throw LoadError(dir.string() + ": " + std::to_string(rows.size()) + " feature rows but " +
                        std::to_string(labels.size()) + " labels");
    }

    Dataset ds;
    ds.name = dir.filename().string();
    ds.graph = read_edge_list(dir / "edges.txt", rows.size());
    const auto d = rows.empty() ? 0 : rows.front().size();
    ds.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    ds.labels = std::move(labels);
    ds.num_classes =
        ds.labels.empty() ? 0 : static_cast<std::size_t>(*std::max_element(ds.labels.begin(), ds.labels.end())) + 1;
    ds.feature_kind = all_binary(ds.features) ? FeatureKind::binary : FeatureKind::continuous;

    const fs::path meta_path = dir / "meta.json";
    if (fs::exists(meta_path)) {
        std::ifstream min(meta_path);
        try {
            const auto meta = nlohmann::json::parse(min);
            if (meta.contains("name")) ds.name = meta.at("name").get<std::string>();
            if (meta.contains("feature_kind")) {
                ds.feature_kind = feature_kind_from_string(meta.at("feature_kind").get<std::string>());
            }
            if (meta.contains("num_classes")) ds.num_classes = meta.at("num_classes").get<std::size_t>();
        } catch (const nlohmann::json::exception& e) {
            throw LoadError(meta_path.string() + ": " + e.what());
        }
    }
    ds.validate();
    return ds;
}

}  // namespace

Dataset load_dataset(const fs::path& path, DatasetFormat format) {
    if (!fs::is_directory(path)) throw LoadError("dataset directory " + path.string() + " does not exist");
    return format == DatasetFormat::planetoid_like ? load_planetoid_like(path) : load_edge_list_plus_csv(path);
}

void save_dataset(const Dataset& ds, const fs::path& dir) {
    fs::create_directories(dir);
    write_edge_list(ds.graph, dir / "edges.txt");
    {
        std::ofstream out(dir / "features.csv");
        char buf[32];
        for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
            for (Eigen::Index j = 0; j < ds.features.cols(); ++j) {
                std::snprintf(buf, sizeof buf, "%.17g", ds.features(i, j));
                if (j > 0) out << ',';
                out << buf;
            }
            out << '\n';
        }
    }
    {
        std::ofstream out(dir / "labels.txt");
        for (auto l : ds.labels) out << l << '\n';
    }
    nlohmann::json meta = {
        {"name", ds.name}, {"feature_kind", to_string(ds.feature_kind)}, {"num_classes", ds.num_classes}};
    std::ofstream(dir / "meta.json") << meta.dump(2) << '\n';
}

DatasetFormat dataset_format_from_string(const std::string& s) {
    if (s == "planetoid_like") return DatasetFormat::planetoid_like;
    if (s == "edge_list_plus_csv") return DatasetFormat::edge_list_plus_csv;
    throw ParameterError("unknown dataset format '" + s + "'");
}

const char* to_string(DatasetFormat f) {
    return f == DatasetFormat::planetoid_like ? "planetoid_like" : "edge_list_plus_csv";
}

const char* to_string(FeatureKind k) { return k == FeatureKind::binary ? "binary" : "continuous"; }

FeatureKind feature_kind_from_string(const std::string& s) {
    if (s == "binary") return FeatureKind::binary;
    if (s == "continuous") return FeatureKind::continuous;
    throw ParameterError("unknown feature kind '" + s + "'");
}

namespace {

struct PoolSplit {
    std::vector<NodeId> train;
    std::vector<NodeId> test;
};

PoolSplit split_pool(const std::vector<NodeId>& pool, std::size_t train_size, std::optional<std::size_t> test_size,
                     const char* which) {
    const std::size_t test = test_size.value_or(pool.size() >= train_size ? pool.size() - train_size : 0);
    if (train_size == 0) throw ParameterError("make_split: train size must be positive");
    if (train_size + test > pool.size()) {
        throw ParameterError(std::string("make_split: ") + which + " pool has " + std::to_string(pool.size()) +
                             " nodes, cannot hold train " + std::to_string(train_size) + " + test " +
                             std::to_string(test));
    }
    PoolSplit out;
    out.train.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(train_size));
    out.test.assign(pool.begin() + static_cast<std::ptrdiff_t>(train_size),
                    pool.begin() + static_cast<std::ptrdiff_t>(train_size + test));
    return out;
}

}  // namespace

Split make_split(const Dataset& ds, const SplitSpec& spec, std::uint64_t seed) {
    const std::size_t n = ds.num_nodes();
    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), NodeId{0});
    auto engine = rng::make_engine(seed, 0x5b1170);
    rng::shuffle(order, engine);

    std::vector<NodeId> target_pool = order;
    std::vector<NodeId> shadow_pool;
    if (spec.shadow) {
        const std::size_t half = n / 2;
        target_pool.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(half));
        shadow_pool.assign(order.begin() + static_cast<std::ptrdiff_t>(half), order.end());
    }

    std::size_t train_size = 0;
    if (spec.train_size) {
        train_size = *spec.train_size;
    } else if (spec.train_fraction) {
        if (!(*spec.train_fraction > 0.0 && *spec.train_fraction <= 1.0)) {
            throw ParameterError("make_split: train_fraction must be in (0, 1]");
        }
        train_size = static_cast<std::size_t>(std::floor(*spec.train_fraction * static_cast<double>(target_pool.size())));
    } else {
        throw ParameterError("make_split: neither train_size nor train_fraction given");
    }
    if (spec.candidate_count > train_size) {
        throw ParameterError("make_split: candidate_count " + std::to_string(spec.candidate_count) +
                             " exceeds train size " + std::to_string(train_size));
    }

    Split split;
    auto target = split_pool(target_pool, train_size, spec.test_size, "target");
    split.candidate_ids.assign(target.train.begin(),
                               target.train.begin() + static_cast<std::ptrdiff_t>(spec.candidate_count));
    split.train_ids = std::move(target.train);
    split.test_ids = std::move(target.test);
    if (spec.shadow) {
        auto shadow = split_pool(shadow_pool, train_size, spec.test_size, "shadow");
        split.shadow_train_ids = std::move(shadow.train);
        split.shadow_test_ids = std::move(shadow.test);
    }
    return split;
}

const char* to_string(Setting s) { return s == Setting::setting1 ? "setting1" : "setting2"; }

Setting setting_from_string(const std::string& s) {
    if (s == "setting1") return Setting::setting1;
    if (s == "setting2") return Setting::setting2;
    throw ParameterError("unknown setting '" + s + "'");
}

std::vector<NodeId> PartialFeatureMatrix::masked_rows() const {
    std::vector<NodeId> rows;
    for (Eigen::Index i = 0; i < missing_mask.rows(); ++i) {
        if (missing_mask.row(i).any()) rows.push_back(static_cast<NodeId>(i));
    }
    return rows;
}

PartialFeatureMatrix mask_sensitive(const Dataset& ds, const Split& split,
                                    const std::vector<std::size_t>& sensitive_attrs, Setting setting,
                                    std::uint64_t seed) {
    if (sensitive_attrs.empty()) throw ParameterError("mask_sensitive: no sensitive attributes");
    for (auto a : sensitive_attrs) {
        if (a >= ds.num_features()) {
            throw ParameterError("mask_sensitive: attribute " + std::to_string(a) + " out of range (d=" +
                                 std::to_string(ds.num_features()) + ")");
        }
    }
    if (std::set<std::size_t>(sensitive_attrs.begin(), sensitive_attrs.end()).size() != sensitive_attrs.size()) {
        throw ParameterError("mask_sensitive: duplicate sensitive attribute");
    }

    std::vector<NodeId> hidden = split.candidate_ids;
    if (setting == Setting::setting2) {
        // Reveal ceil(n/2) candidates chosen uniformly.
        auto engine = rng::make_engine(seed, 0x5e77192);
        rng::shuffle(hidden, engine);
        const std::size_t revealed = (hidden.size() + 1) / 2;
        hidden.erase(hidden.begin(), hidden.begin() + static_cast<std::ptrdiff_t>(revealed));
        std::sort(hidden.begin(), hidden.end());
    }

    PartialFeatureMatrix x;
    x.values = ds.features;
    x.missing_mask = Mask::Constant(ds.features.rows(), ds.features.cols(), false);
    x.sensitive_attrs = sensitive_attrs;
    for (auto node : hidden) {
        for (auto a : sensitive_attrs) {
            const auto r = static_cast<Eigen::Index>(node);
            const auto c = static_cast<Eigen::Index>(a);
            x.missing_mask(r, c) = true;
            x.values(r, c) = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return x;
}

PartialFeatureMatrix restrict_rows(const PartialFeatureMatrix& x, const std::vector<NodeId>& ids) {
    PartialFeatureMatrix out;
    out.values.resize(static_cast<Eigen::Index>(ids.size()), x.values.cols());
    out.missing_mask.resize(static_cast<Eigen::Index>(ids.size()), x.values.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out.values.row(static_cast<Eigen::Index>(i)) = x.values.row(static_cast<Eigen::Index>(ids[i]));
        out.missing_mask.row(static_cast<Eigen::Index>(i)) = x.missing_mask.row(static_cast<Eigen::Index>(ids[i]));
    }
    out.sensitive_attrs = x.sensitive_attrs;
    return out;
}

Dataset induced_dataset(const Dataset& ds, const std::vector<NodeId>& ids) {
    Dataset out;
    out.name = ds.name;
    out.graph = induced_subgraph(ds.graph, ids);
    out.features.resize(static_cast<Eigen::Index>(ids.size()), ds.features.cols());
    out.labels.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out.features.row(static_cast<Eigen::Index>(i)) = ds.features.row(static_cast<Eigen::Index>(ids[i]));
        out.labels.push_back(ds.labels[ids[i]]);
    }
    out.num_classes = ds.num_classes;
    out.feature_kind = ds.feature_kind;
    return out;
}

Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    if (spec.num_nodes < 2 || spec.num_communities < 1 || spec.num_communities > spec.num_nodes) {
        throw ParameterError("generate_synthetic: need 2 <= num_nodes and 1 <= num_communities <= num_nodes");
    }
    if (spec.num_sensitive > spec.num_features || spec.num_features == 0) {
        throw ParameterError("generate_synthetic: num_sensitive must be <= num_features and num_features > 0");
    }
    auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob_ok(spec.p_in) || !prob_ok(spec.p_out) || !prob_ok(spec.flip_probability) || !(spec.noise_std >= 0.0)) {
        throw ParameterError("generate_synthetic: probabilities must lie in [0, 1] and noise_std >= 0");
    }

    auto engine = rng::make_engine(seed, 0x5717);
    const std::size_t n = spec.num_nodes;
    std::vector<std::int32_t> community(n);
    for (std::size_t i = 0; i < n; ++i) community[i] = static_cast<std::int32_t>(i % spec.num_communities);
    rng::shuffle(community, engine);

    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double p = community[i] == community[j] ? spec.p_in : spec.p_out;
            if (rng::bernoulli(engine, p)) edges.emplace_back(i, j);
        }
    }

    Dataset ds;
    ds.name = "synthetic";
    ds.graph = SparseGraph(n, edges);
    ds.labels = community;
    ds.num_classes = spec.num_communities;
    ds.feature_kind = spec.feature_kind;
    const auto d = static_cast<Eigen::Index>(spec.num_features);
    ds.features = Matrix::Zero(static_cast<Eigen::Index>(n), d);
    const auto ns = static_cast<Eigen::Index>(spec.num_sensitive);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const auto c = community[i];
        for (Eigen::Index j = 0; j < d; ++j) {
            const bool own = j % static_cast<Eigen::Index>(spec.num_communities) == c;
            if (spec.feature_kind == FeatureKind::binary) {
                if (j < ns) {
                    double v = static_cast<double>((c + j) % 2);
                    if (rng::bernoulli(engine, spec.flip_probability)) v = 1.0 - v;
                    ds.features(r, j) = v;
                } else {
                    ds.features(r, j) = rng::bernoulli(engine, own ? 0.6 : 0.1) ? 1.0 : 0.0;
                }
            } else {
                if (j < ns) {
                    ds.features(r, j) = static_cast<double>(c + j) + spec.noise_std * rng::normal(engine);
                } else {
                    ds.features(r, j) = (own ? 1.0 : 0.0) + 0.5 * rng::normal(engine);
                }
            }
        }
    }
    ds.validate();
    return ds;
}

}  // namespace aia
