// dal: run disentanglement-based active learning simulations and compare
// their metrics.
//
//   dal run --config exp.json [--set acquisition.steps=50 ...] [--out dir]
//   dal compare a/metrics.csv b/metrics.csv [--levels 0.8,0.85,0.9]
//   dal presets
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dal/dal.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

std::string read_text(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw dal::IoError("cannot read " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides, const std::string& out_dir) {
    dal::Json doc;
    try {
        doc = dal::Json::parse(read_text(config_path));
    } catch (const dal::Json::parse_error& e) {
        throw dal::ConfigError(config_path + ": not valid JSON: " + e.what());
    }
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw dal::ConfigError("--set expects path=value, got \"" + o + "\"");
        dal::apply_override(doc, o.substr(0, eq), o.substr(eq + 1));
    }
    if (!out_dir.empty()) doc["output_dir"] = out_dir;
    const dal::ExperimentConfig cfg = dal::parse_config(doc);

    const dal::ExperimentResult result = dal::run(cfg);
    for (const auto& s : result.summaries())
        std::cout << dal::to_string(s.strategy) << ": final accuracy " << dal::format_fixed(s.final_accuracy_mean)
                  << " +/- " << dal::format_fixed(s.final_accuracy_std) << ", oracle labels per seed "
                  << dal::format_fixed(s.total_oracle_mean) << '\n';
    std::cout << "wrote " << cfg.output_dir << "/metrics.csv\n";
    return kExitOk;
}

int cmd_compare(const std::vector<std::string>& files, const std::vector<double>& levels) {
    std::vector<dal::NamedMetrics> inputs;
    for (const auto& f : files) {
        std::ifstream is(f, std::ios::binary);
        if (!is) throw dal::IoError("cannot read " + f);
        inputs.push_back({f, dal::read_metrics_csv(is, f)});
    }
    dal::compare(inputs, levels).write(std::cout);
    return kExitOk;
}

int cmd_presets() {
    std::cout << "preset,n_seed,m,mean_generation_accuracy,generation_accuracy\n";
    for (const auto& p : dal::presets()) {
        std::cout << p.name << ',' << p.n_seed << ',' << p.m << ','
                  << dal::format_fixed(dal::mean(p.generation_accuracy)) << ',';
        for (std::size_t i = 0; i < p.generation_accuracy.size(); ++i)
            std::cout << (i ? ";" : "") << p.generation_accuracy[i];
        std::cout << '\n';
    }
    const dal::WorldParams def;
    std::cout << "(default world)," << dal::ExperimentConfig{}.n_seed << ',' << dal::ExperimentConfig{}.m << ','
              << dal::format_fixed(dal::mean(def.generation_accuracy)) << ',';
    for (std::size_t i = 0; i < def.generation_accuracy.size(); ++i)
        std::cout << (i ? ";" : "") << def.generation_accuracy[i];
    std::cout << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Disentanglement-based active learning simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::vector<std::string> overrides;
    auto* run = app.add_subcommand("run", "Run the strategies of an experiment configuration");
    run->add_option("-c,--config", config_path, "Experiment configuration (JSON)")->required();
    run->add_option("-s,--set", overrides, "Override a config field by dotted path: key.sub=value");
    run->add_option("-o,--out", out_dir, "Output directory (overrides output_dir)");

    std::vector<std::string> files;
    std::vector<double> levels{0.80, 0.85, 0.90, 0.95};
    auto* cmp = app.add_subcommand("compare", "Oracle labels needed to reach accuracy levels, per strategy");
    cmp->add_option("files", files, "metrics.csv files")->required()->expected(2, -1);
    cmp->add_option("-l,--levels", levels, "Accuracy levels")->delimiter(',');

    app.add_subcommand("presets", "List the built-in world presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run->parsed()) return cmd_run(config_path, overrides, out_dir);
        if (cmp->parsed()) return cmd_compare(files, levels);
        return cmd_presets();
    } catch (const dal::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
