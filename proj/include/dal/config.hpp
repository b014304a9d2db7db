#pragma once

// Experiment configuration documents (JSON): parsing with preset expansion
// and strict key checking, serialization, dotted-path overrides, and
// GeneratorSpec (de)serialization.

#include <json.hpp>

#include <algorithm>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dal/error.hpp"
#include "dal/experiment.hpp"
#include "dal/generator.hpp"

namespace dal {

using Json = nlohmann::json;

struct Preset {
    std::string name;
    std::size_t n_seed;
    std::size_t m;
    std::vector<double> generation_accuracy;
    std::vector<std::vector<std::size_t>> confusable_groups;
};

/// Benchmark-analog presets. Each fixes (n_seed, m) and the per-class
/// generation accuracies; geometry is the default world's.
inline const std::vector<Preset>& presets() {
    static const std::vector<Preset> all{
        {"mnist-like", 100, 50, mnist_generation_accuracy(), {{4, 9}, {3, 5, 8}, {2, 7}}},
        {"fmnist-like", 100, 100, fmnist_generation_accuracy(), {{0, 2, 4, 6}, {5, 7, 9}}},
        {"cifar-like", 1000, 1000, cifar_generation_accuracy(), {{2, 3, 4, 5}, {0, 8}, {1, 9}}},
    };
    return all;
}

inline const Preset* find_preset(std::string_view name) {
    for (const auto& p : presets())
        if (p.name == name) return &p;
    return nullptr;
}

namespace detail {

class ConfigReader {
public:
    explicit ConfigReader(std::vector<std::string>& errors) : errors_(errors) {}

    /// Reports keys of `obj` not in `allowed` as errors under `path`.
    void reject_unknown(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
        for (const auto& [key, _] : obj.items())
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
                errors_.push_back(join(path, key) + ": unknown key");
    }

    template <class T>
    void read(const Json& obj, const std::string& path, const char* key, T& out) {
        if (!obj.contains(key)) return;
        const Json& v = obj.at(key);
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) throw std::invalid_argument("expected a number");
            } else if constexpr (std::is_unsigned_v<T>) {
                if (!v.is_number_unsigned()) throw std::invalid_argument("expected a non-negative integer");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw std::invalid_argument("expected a string");
            }
            out = v.get<T>();
        } catch (const std::exception& e) {
            errors_.push_back(join(path, key) + ": type mismatch (" + e.what() + ")");
        }
    }

    void error(const std::string& msg) { errors_.push_back(msg); }

    static std::string join(const std::string& path, const std::string& key) {
        return path.empty() ? key : path + "." + key;
    }

private:
    std::vector<std::string>& errors_;
};

[[noreturn]] inline void throw_config(const std::vector<std::string>& errors) {
    std::string msg = "configuration error:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
}

inline void read_world(ConfigReader& r, const Json& w, WorldParams& p) {
    const std::string path = "world";
    if (!w.is_object()) {
        r.error("world: type mismatch (expected an object)");
        return;
    }
    r.reject_unknown(w, path,
                     {"classes", "latent_dim", "feature_dim", "noise_scale", "real_noise_scale", "decoder_scale",
                      "prototype_scale", "min_separation", "world_seed", "generation_accuracy", "confusable_groups"});
    r.read(w, path, "classes", p.classes);
    r.read(w, path, "latent_dim", p.latent_dim);
    r.read(w, path, "feature_dim", p.feature_dim);
    r.read(w, path, "noise_scale", p.noise_scale);
    r.read(w, path, "real_noise_scale", p.real_noise_scale);
    r.read(w, path, "decoder_scale", p.decoder_scale);
    r.read(w, path, "prototype_scale", p.prototype_scale);
    r.read(w, path, "min_separation", p.min_separation);
    r.read(w, path, "world_seed", p.world_seed);
    r.read(w, path, "generation_accuracy", p.generation_accuracy);
    r.read(w, path, "confusable_groups", p.confusable_groups);
}

inline Architecture parse_architecture(const std::string& s, ConfigReader& r) {
    if (s == "linear") return Architecture::LinearSoftmax;
    if (s != "mlp") r.error("train.architecture: expected \"linear\" or \"mlp\", got \"" + s + "\"");
    return Architecture::OneHidden;
}

inline CodePolicy parse_code_policy(const std::string& s, ConfigReader& r) {
    if (s == "stratified") return CodePolicy::Stratified;
    if (s != "uniform") r.error("acquisition.code_policy: expected \"uniform\" or \"stratified\", got \"" + s + "\"");
    return CodePolicy::Uniform;
}

}  // namespace detail

/// Parses and validates a configuration document. Every problem found is
/// reported in one ConfigError, each line naming the offending path.
inline ExperimentConfig parse_config(const Json& doc) {
    std::vector<std::string> errors;
    detail::ConfigReader r(errors);
    ExperimentConfig cfg;
    if (!doc.is_object()) detail::throw_config({"<root>: expected an object"});

    r.reject_unknown(doc, "",
                     {"preset", "world", "strategies", "n_seed", "m", "budget", "max_cycles", "acquisition", "train",
                      "seeds", "test_size", "pool_size", "output_dir"});

    const Preset* preset = nullptr;
    if (doc.contains("preset")) {
        r.read(doc, "", "preset", cfg.preset);
        if (!cfg.preset.empty()) {
            preset = find_preset(cfg.preset);
            if (preset == nullptr) {
                std::string known;
                for (const auto& p : presets()) known += " " + p.name;
                errors.push_back("preset: unknown preset \"" + cfg.preset + "\" (known:" + known + ")");
            } else {
                cfg.n_seed = preset->n_seed;
                cfg.m = preset->m;
                cfg.world.generation_accuracy = preset->generation_accuracy;
                cfg.world.confusable_groups = preset->confusable_groups;
            }
        }
    }

    std::vector<std::string> missing;
    auto need = [&](const char* key) {
        if (!doc.contains(key)) missing.emplace_back(key);
    };
    need("strategies");
    if (preset == nullptr) {
        need("n_seed");
        need("m");
    }
    need("budget");
    need("max_cycles");
    need("seeds");
    if (!missing.empty()) {
        std::string line = "missing required fields:";
        for (const auto& k : missing) line += " " + k;
        errors.insert(errors.begin(), line);
    }

    if (doc.contains("world")) detail::read_world(r, doc.at("world"), cfg.world);

    if (doc.contains("strategies")) {
        const Json& s = doc.at("strategies");
        if (!s.is_array() || s.empty()) {
            errors.emplace_back("strategies: type mismatch (expected a non-empty array of strategy names)");
        } else {
            cfg.strategies.clear();
            for (std::size_t i = 0; i < s.size(); ++i) {
                const auto kind = s[i].is_string() ? strategy_from_string(s[i].get<std::string>()) : std::nullopt;
                if (!kind)
                    errors.push_back("strategies[" + std::to_string(i) + "]: unknown strategy " + s[i].dump());
                else
                    cfg.strategies.push_back(*kind);
            }
        }
    }

    for (const char* key : {"n_seed", "m"}) {
        if (!doc.contains(key)) continue;
        std::size_t value = 0;
        std::size_t& field = std::string_view(key) == "m" ? cfg.m : cfg.n_seed;
        const std::size_t before = errors.size();
        r.read(doc, "", key, value);
        if (errors.size() != before) continue;
        if (preset != nullptr && value != field)
            errors.push_back(std::string(key) + ": preset \"" + preset->name + "\" fixes " + key + " = " +
                             std::to_string(field));
        else
            field = value;
    }
    r.read(doc, "", "budget", cfg.budget);
    r.read(doc, "", "max_cycles", cfg.max_cycles);
    r.read(doc, "", "test_size", cfg.test_size);
    r.read(doc, "", "pool_size", cfg.pool_size);
    r.read(doc, "", "output_dir", cfg.output_dir);
    if (doc.contains("seeds")) {
        const Json& s = doc.at("seeds");
        if (!s.is_array() || s.empty() || !std::all_of(s.begin(), s.end(), [](const Json& v) { return v.is_number_unsigned(); }))
            errors.emplace_back("seeds: type mismatch (expected a non-empty array of non-negative integers)");
        else
            cfg.seeds = s.get<std::vector<std::uint64_t>>();
    }

    if (doc.contains("acquisition")) {
        const Json& a = doc.at("acquisition");
        if (!a.is_object()) {
            errors.emplace_back("acquisition: type mismatch (expected an object)");
        } else {
            r.reject_unknown(a, "acquisition", {"batch", "steps", "learning_rate", "code_policy"});
            r.read(a, "acquisition", "batch", cfg.acquisition.batch);
            r.read(a, "acquisition", "steps", cfg.acquisition.steps);
            r.read(a, "acquisition", "learning_rate", cfg.acquisition.learning_rate);
            std::string policy = "uniform";
            r.read(a, "acquisition", "code_policy", policy);
            cfg.acquisition.code_policy = detail::parse_code_policy(policy, r);
        }
    }
    if (doc.contains("train")) {
        const Json& t = doc.at("train");
        if (!t.is_object()) {
            errors.emplace_back("train: type mismatch (expected an object)");
        } else {
            r.reject_unknown(t, "train",
                             {"architecture", "hidden", "learning_rate", "momentum", "batch_size", "max_epochs",
                              "patience", "validation_fraction", "weight_decay", "seed"});
            std::string arch = "mlp";
            r.read(t, "train", "architecture", arch);
            cfg.train.arch = detail::parse_architecture(arch, r);
            r.read(t, "train", "hidden", cfg.train.hidden);
            r.read(t, "train", "learning_rate", cfg.train.learning_rate);
            r.read(t, "train", "momentum", cfg.train.momentum);
            r.read(t, "train", "batch_size", cfg.train.batch_size);
            r.read(t, "train", "max_epochs", cfg.train.max_epochs);
            r.read(t, "train", "patience", cfg.train.patience);
            r.read(t, "train", "validation_fraction", cfg.train.validation_fraction);
            r.read(t, "train", "weight_decay", cfg.train.weight_decay);
            r.read(t, "train", "seed", cfg.train.seed);
        }
    }
    cfg.acquisition.m = cfg.m;

    if (!errors.empty()) detail::throw_config(errors);
    cfg.validate();
    return cfg;
}

inline ExperimentConfig parse_config(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

/// Full, explicit document for `cfg`; parse_config(serialize_config(c)) == c.
inline Json serialize_config(const ExperimentConfig& cfg) {
    Json doc;
    if (!cfg.preset.empty()) doc["preset"] = cfg.preset;
    const WorldParams& w = cfg.world;
    doc["world"] = {
        {"classes", w.classes},
        {"latent_dim", w.latent_dim},
        {"feature_dim", w.feature_dim},
        {"noise_scale", w.noise_scale},
        {"real_noise_scale", w.real_noise_scale},
        {"decoder_scale", w.decoder_scale},
        {"prototype_scale", w.prototype_scale},
        {"min_separation", w.min_separation},
        {"world_seed", w.world_seed},
        {"generation_accuracy", w.generation_accuracy},
        {"confusable_groups", w.confusable_groups},
    };
    Json strategies = Json::array();
    for (StrategyKind k : cfg.strategies) strategies.push_back(std::string(to_string(k)));
    doc["strategies"] = strategies;
    doc["n_seed"] = cfg.n_seed;
    doc["m"] = cfg.m;
    doc["budget"] = cfg.budget;
    doc["max_cycles"] = cfg.max_cycles;
    doc["acquisition"] = {
        {"batch", cfg.acquisition.batch},
        {"steps", cfg.acquisition.steps},
        {"learning_rate", cfg.acquisition.learning_rate},
        {"code_policy", cfg.acquisition.code_policy == CodePolicy::Stratified ? "stratified" : "uniform"},
    };
    doc["train"] = {
        {"architecture", std::string(to_string(cfg.train.arch))},
        {"hidden", cfg.train.hidden},
        {"learning_rate", cfg.train.learning_rate},
        {"momentum", cfg.train.momentum},
        {"batch_size", cfg.train.batch_size},
        {"max_epochs", cfg.train.max_epochs},
        {"patience", cfg.train.patience},
        {"validation_fraction", cfg.train.validation_fraction},
        {"weight_decay", cfg.train.weight_decay},
        {"seed", cfg.train.seed},
    };
    doc["seeds"] = cfg.seeds;
    doc["test_size"] = cfg.test_size;
    doc["pool_size"] = cfg.pool_size;
    doc["output_dir"] = cfg.output_dir;
    return doc;
}

/// Sets the field at dotted `path` (e.g. "acquisition.steps") to `value`,
/// which is read as JSON when it parses and as a plain string otherwise.
inline void apply_override(Json& doc, const std::string& path, const std::string& value) {
    if (path.empty()) throw ConfigError("override: empty path");
    Json parsed;
    try {
        parsed = Json::parse(value);
    } catch (const Json::parse_error&) {
        parsed = value;
    }
    Json* node = &doc;
    std::stringstream ss(path);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        if (parts[i].empty()) throw ConfigError("override: malformed path \"" + path + "\"");
        if (!node->contains(parts[i])) (*node)[parts[i]] = Json::object();
        node = &(*node)[parts[i]];
        if (!node->is_object()) throw ConfigError("override: \"" + path + "\" descends into a non-object");
    }
    (*node)[parts.back()] = parsed;
}

// GeneratorSpec as an explicit document (decoders row-major).
inline Json generator_to_json(const GeneratorSpec& spec) {
    auto matrix = [](const Matrix& m) {
        Json rows = Json::array();
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            Json row = Json::array();
            for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
            rows.push_back(row);
        }
        return rows;
    };
    Json decoders = Json::array();
    Json offsets = Json::array();
    for (std::size_t k = 0; k < spec.classes; ++k) {
        decoders.push_back(matrix(spec.decoders[k]));
        offsets.push_back(std::vector<double>(spec.offsets[k].data(), spec.offsets[k].data() + spec.offsets[k].size()));
    }
    return {{"classes", spec.classes},       {"latent_dim", spec.latent_dim}, {"feature_dim", spec.feature_dim},
            {"noise_scale", spec.noise_scale}, {"decoders", decoders},        {"offsets", offsets},
            {"confusion", matrix(spec.confusion)}};
}

inline GeneratorSpec generator_from_json(const Json& j) {
    try {
        GeneratorSpec spec;
        spec.classes = j.at("classes").get<std::size_t>();
        spec.latent_dim = j.at("latent_dim").get<std::size_t>();
        spec.feature_dim = j.at("feature_dim").get<std::size_t>();
        spec.noise_scale = j.at("noise_scale").get<double>();
        auto matrix = [](const Json& rows) {
            const auto r = static_cast<Eigen::Index>(rows.size());
            const auto c = r == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(rows.at(0).size());
            Matrix m(r, c);
            for (Eigen::Index i = 0; i < r; ++i) {
                const auto& row = rows.at(static_cast<std::size_t>(i));
                if (static_cast<Eigen::Index>(row.size()) != c) throw ConfigError("ragged matrix");
                for (Eigen::Index k = 0; k < c; ++k) m(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
            }
            return m;
        };
        for (const auto& d : j.at("decoders")) spec.decoders.push_back(matrix(d));
        for (const auto& o : j.at("offsets")) {
            const auto v = o.get<std::vector<double>>();
            spec.offsets.emplace_back(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
        }
        spec.confusion = matrix(j.at("confusion"));
        spec.validate();
        return spec;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("generator spec: ") + e.what());
    }
}

}  // namespace dal
