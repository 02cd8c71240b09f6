#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlglrt/classifier.hpp"
#include "nlglrt/errors.hpp"
#include "nlglrt/evaluation.hpp"
#include "nlglrt/sha256.hpp"
#include "nlglrt/signal.hpp"

namespace nlglrt {

// Full round-trip decimal formatting; '.' separator, no locale surprises.
inline std::string format_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double_token(const std::string& tok, const std::string& context) {
    const char* begin = tok.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || (end && *end != '\0'))
        throw IoError(context + ": cannot parse number '" + tok + "'");
    return v;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << content;
    if (!out) throw IoError("short write to " + path);
}

inline std::string sha256_file_hex(const std::string& path) {
    return sha256_hex(read_file(path));
}

// ---------------------------------------------------------------------------
// scene CSV pair + JSON sidecar
// ---------------------------------------------------------------------------

// One row per antenna; each sample contributes a re,im cell pair in order.
inline void write_matrix_csv(const ComplexMatrix& z, const std::string& path) {
    std::ostringstream out;
    for (std::size_t m = 0; m < z.rows(); ++m) {
        for (std::size_t t = 0; t < z.cols(); ++t) {
            if (t) out << ',';
            out << format_double(z(m, t).real()) << ',' << format_double(z(m, t).imag());
        }
        out << '\n';
    }
    write_file(path, out.str());
}

inline ComplexMatrix read_matrix_csv(const std::string& path) {
    const std::string content = read_file(path);
    std::vector<std::vector<double>> rows;
    std::istringstream in(content);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string tok;
        while (std::getline(ls, tok, ','))
            row.push_back(parse_double_token(tok, path + ":" + std::to_string(lineno)));
        if (row.size() % 2 != 0)
            throw IoError(path + ":" + std::to_string(lineno) + ": odd cell count");
        if (!rows.empty() && row.size() != rows.front().size())
            throw IoError(path + ":" + std::to_string(lineno) + ": ragged row width");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError(path + ": no data rows");
    ComplexMatrix z(rows.size(), rows.front().size() / 2);
    for (std::size_t m = 0; m < z.rows(); ++m)
        for (std::size_t t = 0; t < z.cols(); ++t)
            z(m, t) = {rows[m][2 * t], rows[m][2 * t + 1]};
    return z;
}

namespace detail {

// dB fields may legitimately be -inf (a disabled source); JSON has no inf,
// so non-finite values are stored as strings.
inline nlohmann::json json_double(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

inline double double_from_json(const nlohmann::json& j, const std::string& key) {
    if (!j.contains(key)) throw ConfigError("missing field '" + key + "'");
    const auto& v = j.at(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_double_token(v.get<std::string>(), key);
    throw ConfigError("field '" + key + "' is not numeric");
}

template <typename T>
inline T integer_from_json(const nlohmann::json& j, const std::string& key) {
    if (!j.contains(key)) throw ConfigError("missing field '" + key + "'");
    if (!j.at(key).is_number_integer() && !j.at(key).is_number_unsigned())
        throw ConfigError("field '" + key + "' is not an integer");
    return j.at(key).get<T>();
}

}  // namespace detail

inline nlohmann::json scene_config_to_json(const SceneConfig& c) {
    nlohmann::json j;
    j["num_antennas"] = c.num_antennas;
    j["num_samples"] = c.num_samples;
    j["window_k"] = c.window_k;
    j["onset_t0"] = c.onset_t0;
    j["dir_interferer"] = detail::json_double(c.dir_interferer);
    j["dir_soi"] = detail::json_double(c.dir_soi);
    j["inr_db"] = detail::json_double(c.inr_db);
    j["snr_db"] = detail::json_double(c.snr_db);
    j["noise_variance"] = detail::json_double(c.noise_variance);
    j["samples_per_symbol"] = c.samples_per_symbol;
    j["alpha"] = detail::json_double(c.alpha);
    j["seed"] = c.seed;
    return j;
}

inline SceneConfig scene_config_from_json(const nlohmann::json& j) {
    SceneConfig c;
    c.num_antennas = detail::integer_from_json<std::size_t>(j, "num_antennas");
    c.num_samples = detail::integer_from_json<std::size_t>(j, "num_samples");
    c.window_k = detail::integer_from_json<std::size_t>(j, "window_k");
    c.onset_t0 = detail::integer_from_json<std::size_t>(j, "onset_t0");
    c.dir_interferer = detail::double_from_json(j, "dir_interferer");
    c.dir_soi = detail::double_from_json(j, "dir_soi");
    c.inr_db = detail::double_from_json(j, "inr_db");
    c.snr_db = detail::double_from_json(j, "snr_db");
    c.noise_variance = detail::double_from_json(j, "noise_variance");
    c.samples_per_symbol = detail::integer_from_json<std::size_t>(j, "samples_per_symbol");
    c.alpha = detail::double_from_json(j, "alpha");
    c.seed = detail::integer_from_json<std::uint64_t>(j, "seed");
    return c;
}

// Writes scene_linear.csv, scene_nonlinear.csv, scene_config.json; returns
// the paths in that order.
inline std::vector<std::string> write_scene(const Scene& scene, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::string lin = dir + "/scene_linear.csv";
    const std::string nl = dir + "/scene_nonlinear.csv";
    const std::string cfg = dir + "/scene_config.json";
    write_matrix_csv(scene.z_linear, lin);
    write_matrix_csv(scene.z_nonlinear, nl);
    write_file(cfg, scene_config_to_json(scene.config).dump(2) + "\n");
    return {lin, nl, cfg};
}

inline Scene load_scene(const std::string& dir) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(dir + "/scene_config.json"));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(dir + "/scene_config.json: " + e.what());
    }
    Scene scene;
    scene.config = scene_config_from_json(j);
    scene.z_linear = read_matrix_csv(dir + "/scene_linear.csv");
    scene.z_nonlinear = read_matrix_csv(dir + "/scene_nonlinear.csv");
    if (scene.z_linear.rows() != scene.config.num_antennas ||
        scene.z_linear.cols() != scene.config.num_samples ||
        scene.z_nonlinear.rows() != scene.z_linear.rows() ||
        scene.z_nonlinear.cols() != scene.z_linear.cols())
        throw IoError(dir + ": scene matrices do not match the sidecar config");
    scene.soi_active_mask.assign(scene.config.num_samples, false);
    for (std::size_t t = scene.config.onset_t0; t < scene.config.num_samples; ++t)
        scene.soi_active_mask[t] = true;
    return scene;
}

// ---------------------------------------------------------------------------
// model JSON
// ---------------------------------------------------------------------------

inline constexpr const char* kModelSchema = "nlglrt.mlp.v1";

inline nlohmann::json train_config_to_json(const TrainConfig& c) {
    nlohmann::json j;
    j["batch_size"] = c.batch_size;
    j["learning_rate"] = c.learning_rate;
    j["max_epochs"] = c.max_epochs;
    j["patience"] = c.patience;
    j["hidden_layers"] = c.hidden_layers;
    j["hidden_units"] = c.hidden_units;
    j["optimizer"] = to_string(c.optimizer);
    j["seed"] = c.seed;
    return j;
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.batch_size = detail::integer_from_json<std::size_t>(j, "batch_size");
    c.learning_rate = detail::double_from_json(j, "learning_rate");
    c.max_epochs = detail::integer_from_json<std::size_t>(j, "max_epochs");
    c.patience = detail::integer_from_json<std::size_t>(j, "patience");
    c.hidden_layers = detail::integer_from_json<std::size_t>(j, "hidden_layers");
    c.hidden_units = detail::integer_from_json<std::size_t>(j, "hidden_units");
    if (j.contains("optimizer")) c.optimizer = optimizer_from_string(j.at("optimizer"));
    c.seed = detail::integer_from_json<std::uint64_t>(j, "seed");
    return c;
}

inline nlohmann::json model_to_json(const MlpModel& model, const TrainConfig& train_cfg) {
    nlohmann::json j;
    j["schema"] = kModelSchema;
    j["layer_sizes"] = model.layer_sizes();
    nlohmann::json layers = nlohmann::json::array();
    for (const DenseLayer& l : model.layers) {
        nlohmann::json lj;
        lj["in"] = l.in;
        lj["out"] = l.out;
        lj["w"] = l.w;
        lj["b"] = l.b;
        layers.push_back(std::move(lj));
    }
    j["layers"] = std::move(layers);
    j["feat_mean"] = model.feat_mean;
    j["feat_std"] = model.feat_std;
    j["feat_whiten"] = model.feat_whiten;
    j["label_threshold"] = model.label_threshold;
    j["train_config"] = train_config_to_json(train_cfg);
    return j;
}

inline MlpModel model_from_json(const nlohmann::json& j) {
    if (!j.contains("schema") || j.at("schema") != kModelSchema)
        throw MissingArtifact("model file has wrong or missing schema tag");
    MlpModel model;
    for (const auto& lj : j.at("layers")) {
        DenseLayer l;
        l.in = detail::integer_from_json<std::size_t>(lj, "in");
        l.out = detail::integer_from_json<std::size_t>(lj, "out");
        l.w = lj.at("w").get<std::vector<double>>();
        l.b = lj.at("b").get<std::vector<double>>();
        model.layers.push_back(std::move(l));
    }
    model.feat_mean = j.at("feat_mean").get<std::vector<double>>();
    model.feat_std = j.at("feat_std").get<std::vector<double>>();
    if (j.contains("feat_whiten"))
        model.feat_whiten = j.at("feat_whiten").get<std::vector<double>>();
    model.label_threshold = detail::double_from_json(j, "label_threshold");
    detail::check_layer_chain(model);
    return model;
}

inline void write_model(const MlpModel& model, const TrainConfig& train_cfg,
                        const std::string& path) {
    write_file(path, model_to_json(model, train_cfg).dump(2) + "\n");
}

inline MlpModel load_model(const std::string& path) {
    if (!std::filesystem::exists(path))
        throw MissingArtifact("model file not found: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw MissingArtifact(path + ": not a valid model file (" + e.what() + ")");
    }
    try {
        return model_from_json(j);
    } catch (const MissingArtifact&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        throw MissingArtifact(path + ": not a valid model file (" + e.what() + ")");
    } catch (const Error& e) {
        throw MissingArtifact(path + ": not a valid model file (" + std::string(e.what()) + ")");
    }
}

// ---------------------------------------------------------------------------
// report CSVs and the training-loss log
// ---------------------------------------------------------------------------

inline void write_trace_csv(const DetectionTrace& tr, const std::string& path) {
    std::ostringstream out;
    out << "edited_index,original_time,statistic\n";
    for (std::size_t i = 0; i < tr.stat.size(); ++i)
        out << tr.index_map[i] << ',' << tr.original_time[i] << ','
            << format_double(tr.stat[i]) << '\n';
    write_file(path, out.str());
}

inline void write_roc_csv(const RocCurve& roc, const std::string& path) {
    std::ostringstream out;
    out << "gamma,fpr,tpr\n";
    for (const RocPoint& p : roc.points)
        out << format_double(p.gamma) << ',' << format_double(p.fpr) << ','
            << format_double(p.tpr) << '\n';
    write_file(path, out.str());
}

inline void write_training_log_csv(const std::vector<double>& losses, bool early_stopped,
                                   const std::string& path) {
    std::ostringstream out;
    out << "epoch,loss,event\n";
    for (std::size_t i = 0; i < losses.size(); ++i) {
        out << (i + 1) << ',' << format_double(losses[i]) << ',';
        if (early_stopped && i + 1 == losses.size()) out << "early_stop";
        out << '\n';
    }
    write_file(path, out.str());
}

}  // namespace nlglrt
