// nlglrt command line: generate scenes, train the sample classifier, run the
// detection pipelines and write evaluation artifacts. All inputs come from a
// flat key = value config file; a few flags override it.

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "nlglrt.hpp"

namespace {

std::size_t worker_threads(std::size_t njobs) {
    std::size_t n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("NLGLRT_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) n = std::min<std::size_t>(n, v);
    }
    return std::max<std::size_t>(1, std::min(n, njobs));
}

struct Options {
    std::string config_path;
    std::string out_dir;     // overrides config output_dir when set
    std::string modes_csv;
    std::string seeds_csv;
    std::string model_path;
};

nlglrt::RunConfig load_config(const Options& opt) {
    nlglrt::RunConfig cfg = nlglrt::parse_run_config(opt.config_path);
    if (!opt.out_dir.empty()) cfg.output_dir = opt.out_dir;
    if (!opt.seeds_csv.empty()) cfg.eval_seeds = nlglrt::parse_seed_list(opt.seeds_csv);
    nlglrt::validate(cfg);
    return cfg;
}

std::string model_path_for(const Options& opt, const nlglrt::RunConfig& cfg) {
    return opt.model_path.empty() ? cfg.output_dir + "/model.json" : opt.model_path;
}

void run_generate(const nlglrt::RunConfig& cfg) {
    const nlglrt::Scene scene = nlglrt::synthesize_scene(cfg.scene);
    const std::vector<std::string> paths = nlglrt::write_scene(scene, cfg.output_dir);
    for (const std::string& p : paths)
        std::cout << nlglrt::sha256_file_hex(p) << "  " << p << "\n";
}

void run_train(const nlglrt::RunConfig& cfg, const std::string& model_path) {
    const nlglrt::TrainOutputs out = nlglrt::train_classifier(cfg);
    std::filesystem::create_directories(cfg.output_dir);
    nlglrt::write_model(out.result.model, cfg.train, model_path);
    nlglrt::write_training_log_csv(out.result.epoch_loss, out.result.early_stopped,
                                   cfg.output_dir + "/training_loss.csv");
    const double train_acc =
        nlglrt::balanced_accuracy(out.result.model, out.data.samples, out.data.labels);
    std::cout << "model: " << model_path << "\n";
    std::cout << "epochs_run: " << out.result.epoch_loss.size()
              << (out.result.early_stopped ? " (early stop)" : "") << "\n";
    std::cout << "best_train_loss: " << nlglrt::format_double(out.result.epoch_loss.empty()
                                                                  ? 0.0
                                                                  : *std::min_element(
                                                                        out.result.epoch_loss.begin(),
                                                                        out.result.epoch_loss.end()))
              << "\n";
    std::cout << "train_balanced_accuracy: " << nlglrt::format_double(train_acc) << "\n";
}

void run_evaluate(const nlglrt::RunConfig& cfg, const Options& opt) {
    std::vector<nlglrt::PipelineMode> modes = opt.modes_csv.empty()
                                                  ? nlglrt::default_modes(cfg)
                                                  : nlglrt::modes_from_csv(opt.modes_csv);
    bool needs_model = false;
    for (const auto m : modes) needs_model |= nlglrt::mode_uses_model(m);

    nlglrt::MlpModel model;
    const nlglrt::MlpModel* model_ptr = nullptr;
    if (needs_model) {
        model = nlglrt::load_model(model_path_for(opt, cfg));
        model_ptr = &model;
    }
    const auto summary = nlglrt::evaluate_modes(cfg, modes, model_ptr, cfg.output_dir,
                                                worker_threads(cfg.eval_seeds.size()));
    for (const auto& [name, block] : summary.at("modes").items())
        std::cout << name << ": auc=" << nlglrt::format_double(block.at("auc").get<double>())
                  << " peak_hit_rate="
                  << nlglrt::format_double(block.at("peak_hit_rate").get<double>()) << "\n";
    std::cout << "report: " << cfg.output_dir << "/summary.json\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GLRT sliding-window detector with neural-net sample screening"};
    app.require_subcommand(1);

    Options opt;
    auto add_common = [&opt](CLI::App* sub, bool with_model) {
        sub->add_option("--config", opt.config_path, "run configuration file")->required();
        sub->add_option("--out", opt.out_dir, "output directory (overrides output_dir)");
        if (with_model) sub->add_option("--model", opt.model_path, "model file path");
    };

    CLI::App* generate = app.add_subcommand("generate", "synthesize a scene and write CSV + sidecar");
    add_common(generate, false);

    CLI::App* train = app.add_subcommand("train", "train the nonlinear-sample classifier");
    add_common(train, true);

    CLI::App* evaluate = app.add_subcommand("evaluate", "run detection pipelines and write reports");
    add_common(evaluate, true);
    evaluate->add_option("--modes", opt.modes_csv, "comma-separated pipeline modes");
    evaluate->add_option("--seeds", opt.seeds_csv, "comma-separated seeds (overrides config)");

    CLI::App* all = app.add_subcommand("all", "generate, train, then evaluate");
    add_common(all, true);
    all->add_option("--modes", opt.modes_csv, "comma-separated pipeline modes");
    all->add_option("--seeds", opt.seeds_csv, "comma-separated seeds (overrides config)");

    CLI11_PARSE(app, argc, argv);

    try {
        const nlglrt::RunConfig cfg = load_config(opt);
        if (generate->parsed()) {
            run_generate(cfg);
        } else if (train->parsed()) {
            run_train(cfg, model_path_for(opt, cfg));
        } else if (evaluate->parsed()) {
            run_evaluate(cfg, opt);
        } else if (all->parsed()) {
            run_generate(cfg);
            if (cfg.classifier_enabled) run_train(cfg, model_path_for(opt, cfg));
            run_evaluate(cfg, opt);
        }
        return 0;
    } catch (const nlglrt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const nlglrt::InvalidConfig& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const nlglrt::NonFiniteLoss& e) {
        std::cerr << "training diverged: " << e.what() << "\n";
        return 3;
    } catch (const nlglrt::MissingArtifact& e) {
        std::cerr << "missing artifact: " << e.what() << "\n";
        return 4;
    } catch (const nlglrt::InsufficientSamples& e) {
        std::cerr << "degenerate data: " << e.what() << "\n";
        return 5;
    } catch (const nlglrt::DegenerateLabels& e) {
        std::cerr << "degenerate data: " << e.what() << "\n";
        return 5;
    } catch (const nlglrt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
