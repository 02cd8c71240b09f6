#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nlglrt/classifier.hpp"
#include "nlglrt/errors.hpp"
#include "nlglrt/signal.hpp"

namespace nlglrt {

// Operator-facing knobs for one run, parsed from a flat key = value file.
struct RunConfig {
    SceneConfig scene;
    TrainConfig train;
    double flagged_fraction = 0.5;
    bool classifier_enabled = true;
    double loading_relative = 1e-9;   // diagonal loading as a fraction of mean(diag)
    std::vector<std::uint64_t> eval_seeds;
    std::size_t guard = 0;
    std::string output_dir = "out";
};

inline RunConfig default_run_config() {
    RunConfig cfg;
    cfg.eval_seeds.reserve(20);
    for (std::uint64_t s = 100; s < 120; ++s) cfg.eval_seeds.push_back(s);
    return cfg;
}

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct ConfigContext {
    std::string path;
    int line = 0;
    std::string key;

    std::string where() const {
        return path + ":" + std::to_string(line) + ": key '" + key + "'";
    }
};

inline double cfg_double(const ConfigContext& ctx, const std::string& value) {
    const char* begin = value.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw ConfigError(ctx.where() + ": expected a number, got '" + value + "'");
    return v;
}

inline std::uint64_t cfg_u64(const ConfigContext& ctx, const std::string& value) {
    const char* begin = value.c_str();
    char* end = nullptr;
    const unsigned long long v = std::strtoull(begin, &end, 10);
    if (end == begin || *end != '\0')
        throw ConfigError(ctx.where() + ": expected a non-negative integer, got '" + value + "'");
    return static_cast<std::uint64_t>(v);
}

inline std::size_t cfg_size(const ConfigContext& ctx, const std::string& value) {
    return static_cast<std::size_t>(cfg_u64(ctx, value));
}

inline bool cfg_bool(const ConfigContext& ctx, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError(ctx.where() + ": expected true/false, got '" + value + "'");
}

inline std::vector<std::uint64_t> cfg_seed_list(const ConfigContext& ctx, const std::string& value) {
    std::vector<std::uint64_t> seeds;
    std::string tok;
    std::istringstream in(value);
    while (std::getline(in, tok, ',')) {
        tok = trim(tok);
        if (tok.empty())
            throw ConfigError(ctx.where() + ": empty entry in seed list");
        seeds.push_back(cfg_u64(ctx, tok));
    }
    if (seeds.empty()) throw ConfigError(ctx.where() + ": seed list is empty");
    return seeds;
}

}  // namespace detail

// Comma-separated seed list, e.g. for a --seeds override.
inline std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
    detail::ConfigContext ctx{"<cmdline>", 0, "seeds"};
    return detail::cfg_seed_list(ctx, csv);
}

inline RunConfig parse_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    RunConfig cfg = default_run_config();
    detail::ConfigContext ctx;
    ctx.path = path;
    std::string line;
    while (std::getline(in, line)) {
        ++ctx.line;
        const std::string stripped = detail::trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(ctx.line) +
                              ": expected 'key = value', got '" + stripped + "'");
        const std::string key = detail::trim(stripped.substr(0, eq));
        const std::string value = detail::trim(stripped.substr(eq + 1));
        ctx.key = key;
        if (key.empty())
            throw ConfigError(path + ":" + std::to_string(ctx.line) + ": empty key");

        if (key == "scene.num_antennas") cfg.scene.num_antennas = detail::cfg_size(ctx, value);
        else if (key == "scene.num_samples") cfg.scene.num_samples = detail::cfg_size(ctx, value);
        else if (key == "scene.window_k") cfg.scene.window_k = detail::cfg_size(ctx, value);
        else if (key == "scene.onset_t0") cfg.scene.onset_t0 = detail::cfg_size(ctx, value);
        else if (key == "scene.dir_interferer") cfg.scene.dir_interferer = detail::cfg_double(ctx, value);
        else if (key == "scene.dir_soi") cfg.scene.dir_soi = detail::cfg_double(ctx, value);
        else if (key == "scene.inr_db") cfg.scene.inr_db = detail::cfg_double(ctx, value);
        else if (key == "scene.snr_db") cfg.scene.snr_db = detail::cfg_double(ctx, value);
        else if (key == "scene.noise_variance") cfg.scene.noise_variance = detail::cfg_double(ctx, value);
        else if (key == "scene.samples_per_symbol") cfg.scene.samples_per_symbol = detail::cfg_size(ctx, value);
        else if (key == "scene.alpha") cfg.scene.alpha = detail::cfg_double(ctx, value);
        else if (key == "scene.seed") cfg.scene.seed = detail::cfg_u64(ctx, value);
        else if (key == "train.batch_size") cfg.train.batch_size = detail::cfg_size(ctx, value);
        else if (key == "train.learning_rate") cfg.train.learning_rate = detail::cfg_double(ctx, value);
        else if (key == "train.max_epochs") cfg.train.max_epochs = detail::cfg_size(ctx, value);
        else if (key == "train.patience") cfg.train.patience = detail::cfg_size(ctx, value);
        else if (key == "train.hidden_layers") cfg.train.hidden_layers = detail::cfg_size(ctx, value);
        else if (key == "train.hidden_units") cfg.train.hidden_units = detail::cfg_size(ctx, value);
        else if (key == "train.optimizer") cfg.train.optimizer = optimizer_from_string(value);
        else if (key == "train.seed") cfg.train.seed = detail::cfg_u64(ctx, value);
        else if (key == "classifier.flagged_fraction") cfg.flagged_fraction = detail::cfg_double(ctx, value);
        else if (key == "classifier.enabled") cfg.classifier_enabled = detail::cfg_bool(ctx, value);
        else if (key == "detector.loading_epsilon") cfg.loading_relative = detail::cfg_double(ctx, value);
        else if (key == "evaluation.seeds") cfg.eval_seeds = detail::cfg_seed_list(ctx, value);
        else if (key == "evaluation.guard") cfg.guard = detail::cfg_size(ctx, value);
        else if (key == "output_dir") cfg.output_dir = value;
        else
            throw ConfigError(path + ":" + std::to_string(ctx.line) + ": unknown key '" + key + "'");
    }
    return cfg;
}

inline void validate(const RunConfig& cfg) {
    validate(cfg.scene);
    validate(cfg.train);
    if (!(cfg.flagged_fraction > 0.0 && cfg.flagged_fraction < 1.0))
        throw InvalidConfig("classifier.flagged_fraction must lie in (0, 1)");
    if (cfg.loading_relative < 0.0)
        throw InvalidConfig("detector.loading_epsilon must be >= 0");
    if (cfg.eval_seeds.empty())
        throw InvalidConfig("evaluation.seeds must be non-empty");
    if (cfg.output_dir.empty())
        throw InvalidConfig("output_dir must be non-empty");
}

}  // namespace nlglrt
