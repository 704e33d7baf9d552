#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "aia/gcn.hpp"
#include "aia/harness.hpp"

namespace {

using nlohmann::json;

struct Overrides {
    std::string config_path;
    std::string dataset;
    std::string format;
    std::string attack;
    std::string setting;
    std::string structure;
    std::string knn_metric;
    std::size_t knn_k = 0;
    std::vector<std::size_t> sensitive;
    std::size_t train_size = 0;
    std::size_t candidates = 0;
    std::vector<std::uint64_t> seeds;
    std::uint64_t base_seed = 0;
    std::size_t num_seeds = 0;
    double base_threshold = -1.0;
    std::size_t iterations = 0;
};

void add_common(CLI::App* app, Overrides& o) {
    app->add_option("--config", o.config_path, "JSON config document");
    app->add_option("--dataset", o.dataset, "Dataset directory (relative to $AIA_DATA_ROOT)");
    app->add_option("--format", o.format, "planetoid_like | edge_list_plus_csv");
    app->add_option("--attack", o.attack, "fp | ri | fp_ma | ri_ma | sa");
    app->add_option("--setting", o.setting, "setting1 | setting2");
    app->add_option("--structure", o.structure, "true_graph | knn");
    app->add_option("--knn-k", o.knn_k);
    app->add_option("--knn-metric", o.knn_metric, "euclidean | cosine");
    app->add_option("--sensitive", o.sensitive, "Sensitive column indices")->delimiter(',');
    app->add_option("--train-size", o.train_size);
    app->add_option("--candidates", o.candidates);
    app->add_option("--seeds", o.seeds, "Explicit seed list")->delimiter(',');
    app->add_option("--base-seed", o.base_seed);
    app->add_option("--num-seeds", o.num_seeds);
    app->add_option("--base-threshold", o.base_threshold);
    app->add_option("--fp-iterations", o.iterations);
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw aia::ParameterError("cannot open config " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw aia::ParameterError("config " + path + ": " + e.what());
    }
}

aia::ExperimentConfig resolve(CLI::App* app, const Overrides& o, json* sweep = nullptr) {
    json doc = json::object();
    if (!o.config_path.empty()) doc = read_json_file(o.config_path);
    if (sweep && doc.contains("sweep")) *sweep = doc.at("sweep");
    aia::ExperimentConfig c = aia::experiment_config_from_json(doc);
    auto given = [&](const char* name) { return app->count(name) > 0; };
    if (given("--dataset")) {
        c.dataset = o.dataset;
        c.synthetic.reset();
    }
    if (given("--format")) c.format = aia::dataset_format_from_string(o.format);
    if (given("--attack")) c.attack = aia::attack_kind_from_string(o.attack);
    if (given("--setting")) c.setting = aia::setting_from_string(o.setting);
    if (given("--structure")) c.structure = aia::structure_mode_from_string(o.structure);
    if (given("--knn-k")) c.knn.k = o.knn_k;
    if (given("--knn-metric")) c.knn.metric = aia::knn_metric_from_string(o.knn_metric);
    if (given("--sensitive")) c.sensitive_attrs = o.sensitive;
    if (given("--train-size")) c.train_size = o.train_size;
    if (given("--candidates")) c.candidate_count = o.candidates;
    if (given("--base-seed") || given("--num-seeds")) {
        c.seeds = aia::ExperimentConfig::default_seeds(o.base_seed, given("--num-seeds") ? o.num_seeds : 10);
    }
    if (given("--seeds")) c.seeds = o.seeds;
    if (given("--base-threshold")) c.base_threshold = o.base_threshold;
    if (given("--fp-iterations")) c.imputer.iterations = o.iterations;
    c.validate();
    return c;
}

int cmd_train(CLI::App* app, const Overrides& o, const std::string& checkpoint) {
    const aia::ExperimentConfig cfg = resolve(app, o);
    const aia::Dataset ds = aia::load_experiment_dataset(cfg);
    const std::uint64_t seed = cfg.seeds.front();
    aia::SplitSpec ss;
    ss.train_size = cfg.train_size;
    ss.test_size = cfg.test_size;
    ss.candidate_count = cfg.candidate_count;
    const aia::Split split = aia::make_split(ds, ss, seed);
    aia::GcnHyper h = cfg.gcn;
    h.seed = seed;
    const aia::TrainedGcn trained = aia::train_gcn(ds, split, h);
    std::printf("dataset=%s nodes=%zu features=%zu classes=%zu train=%zu test=%zu\n", ds.name.c_str(),
                ds.num_nodes(), ds.num_features(), ds.num_classes, split.train_ids.size(), split.test_ids.size());
    std::printf("train_accuracy=%.4f test_accuracy=%.4f final_loss=%.6f\n", trained.report.train_accuracy,
                trained.report.test_accuracy, trained.report.final_loss);
    if (!checkpoint.empty()) aia::save_checkpoint(trained.model, checkpoint);
    return 0;
}

int cmd_attack(CLI::App* app, const Overrides& o, const std::string& output, const std::string& trace_path) {
    aia::ExperimentConfig cfg = resolve(app, o);
    if (!output.empty()) cfg.output = output;
    std::ostringstream trace;
    aia::OutcomeHook hook;
    if (!trace_path.empty()) {
        hook = [&](std::uint64_t seed, const aia::AttackOutcome& out) {
            std::ostringstream lines;
            aia::write_trace_jsonl(out.trace, lines);
            std::istringstream in(lines.str());
            for (std::string line; std::getline(in, line);) {
                json j = json::parse(line);
                j["seed"] = seed;
                trace << j.dump() << '\n';
            }
        };
    }
    const aia::ExperimentRecord rec = aia::run_experiment(cfg, hook);
    if (!trace_path.empty()) aia::write_file_atomic(trace_path, trace.str());
    std::cout << aia::to_json(rec).dump(2) << '\n';
    for (const auto& s : rec.per_seed) {
        if (!s.ok) std::cerr << "seed " << s.seed << " failed: " << s.error << '\n';
    }
    return rec.partial ? 3 : 0;
}

int cmd_sweep(CLI::App* app, const Overrides& o, const std::string& out_dir) {
    json sweep_doc = json::object();
    const aia::ExperimentConfig base = resolve(app, o, &sweep_doc);
    const aia::SweepSpec spec = aia::sweep_spec_from_json(sweep_doc);
    const aia::Dataset ds = aia::load_experiment_dataset(base);
    std::vector<aia::ExperimentRecord> records;
    std::string jsonl;
    for (const aia::ExperimentConfig& c : aia::expand_sweep(base, spec)) {
        records.push_back(aia::run_experiment(c, ds));
        jsonl += aia::to_json(records.back()).dump() + "\n";
        std::cerr << "done " << aia::table_row(records.back()).attack << " train_size=" << c.train_size
                  << " mean=" << records.back().mean << '\n';
    }
    const std::filesystem::path dir(out_dir);
    aia::write_file_atomic(dir / "records.jsonl", jsonl);
    aia::write_file_atomic(dir / "results.csv", aia::emit_table(records));
    std::cout << (dir / "results.csv").string() << '\n';
    bool partial = false;
    for (const auto& r : records) partial = partial || r.partial;
    return partial ? 3 : 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out) {
    std::vector<aia::ExperimentRecord> records;
    for (const std::string& path : inputs) {
        std::ifstream in(path);
        if (!in) throw aia::ParameterError("cannot open " + path);
        std::size_t lineno = 0;
        for (std::string line; std::getline(in, line);) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            try {
                records.push_back(aia::experiment_record_from_json(json::parse(line)));
            } catch (const json::exception& e) {
                throw aia::ParameterError(path + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
    }
    const std::string csv = aia::emit_table(records);
    if (out.empty()) {
        std::cout << csv;
    } else {
        aia::write_file_atomic(out, csv);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Attribute inference attacks against graph neural networks"};
    app.require_subcommand(1);

    Overrides train_o;
    std::string checkpoint;
    CLI::App* train = app.add_subcommand("train", "Train a target GCN and report accuracy");
    add_common(train, train_o);
    train->add_option("--checkpoint", checkpoint, "Write the trained weights here");

    Overrides attack_o;
    std::string attack_out;
    std::string trace_path;
    CLI::App* attack = app.add_subcommand("attack", "Run one attack configuration over all seeds");
    add_common(attack, attack_o);
    attack->add_option("--output", attack_out, "Write the record (JSON line) here");
    attack->add_option("--trace", trace_path, "Write per-iteration attack traces (JSON lines) here");

    Overrides sweep_o;
    std::string out_dir = "results";
    CLI::App* sweep = app.add_subcommand("sweep", "Expand the config's sweep section and run every point");
    add_common(sweep, sweep_o);
    sweep->add_option("--out-dir", out_dir, "Directory for records.jsonl and results.csv");

    std::vector<std::string> inputs;
    std::string report_out;
    CLI::App* report = app.add_subcommand("report", "Tabulate JSON-line records as CSV");
    report->add_option("inputs", inputs, "records.jsonl files")->required();
    report->add_option("--out", report_out, "CSV destination (default stdout)");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*train) return cmd_train(train, train_o, checkpoint);
        if (*attack) return cmd_attack(attack, attack_o, attack_out, trace_path);
        if (*sweep) return cmd_sweep(sweep, sweep_o, out_dir);
        if (*report) return cmd_report(inputs, report_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
