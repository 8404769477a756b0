// exoctl: command-line front end for the EMG orthosis control toolkit.
//
//   exoctl synth  --config run.cfg [--seed N] [--out DIR]
//   exoctl train  --session out/train_session.csv --model out/model.json
//   exoctl run    --mode device --model out/model.json [--session CSV]
//   exoctl eval   --pred out/pred_trace.csv --truth out/truth_trace.csv
//
// Every stochastic stage derives its stream from the one --seed value, so a
// repeated invocation chain reproduces its outputs byte for byte.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "exo/config.hpp"
#include "exo/eval.hpp"
#include "exo/runner.hpp"

namespace {

exo::RunConfig make_config(const std::string& config_path, const std::optional<std::uint64_t>& seed,
                           const std::string& out_dir) {
    exo::RunConfig cfg;
    if (!config_path.empty()) cfg = exo::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EMG pattern-classification control for an exotendon hand orthosis"};
    app.require_subcommand(1);

    std::string config_path, out_dir, session_path, model_path, mode_name = "device";
    std::string pred_path, truth_path;
    std::optional<std::uint64_t> seed;
    std::int64_t window_ms = 850;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "config file (defaults apply when omitted)");
        cmd->add_option("--seed", seed, "session seed; overrides the config value");
        cmd->add_option("--out", out_dir, "output directory; overrides the config value");
    };

    CLI::App* synth = app.add_subcommand("synth", "generate labeled training and test sessions");
    add_common(synth);

    CLI::App* train = app.add_subcommand("train", "fit a forest on a labeled session");
    add_common(train);
    train->add_option("--session", session_path, "labeled session CSV")->required();
    train->add_option("--model", model_path, "output model path")->required();

    CLI::App* run = app.add_subcommand("run", "stream a session through the trained pipeline");
    add_common(run);
    run->add_option("--mode", mode_name, "no-device | device | pickplace | button");
    run->add_option("--model", model_path, "trained model (all modes except button)");
    run->add_option("--session", session_path, "recorded session to replay instead of the live subject");

    CLI::App* eval = app.add_subcommand("eval", "score a predicted intent trace against ground truth");
    eval->add_option("--pred", pred_path, "predicted intent trace CSV")->required();
    eval->add_option("--truth", truth_path, "ground-truth intent trace CSV")->required();
    eval->add_option("--window-ms", window_ms, "match window after each truth event (default 850)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            const exo::RunConfig cfg = make_config(config_path, seed, out_dir);
            const exo::SynthResult result = exo::cmd_synth(cfg);
            std::cout << "wrote " << result.train_path << " (" << result.train_samples << " labeled frames)\n"
                      << "wrote " << result.test_path << " (" << result.test_samples << " labeled frames)\n";
        } else if (train->parsed()) {
            const exo::RunConfig cfg = make_config(config_path, seed, out_dir);
            const exo::TrainResult result = exo::cmd_train(cfg, session_path, model_path);
            std::cout << "trained on " << result.sample_count << " frames, training accuracy "
                      << result.training_accuracy * 100.0 << "%\n"
                      << "wrote " << result.model_path << '\n';
        } else if (run->parsed()) {
            const exo::RunConfig cfg = make_config(config_path, seed, out_dir);
            const exo::RunMode mode = exo::run_mode_from_string(mode_name);
            if (mode != exo::RunMode::Button && model_path.empty()) {
                throw std::runtime_error("run mode '" + std::string(exo::to_string(mode)) + "' needs --model");
            }
            const exo::RunResult result = exo::cmd_run(cfg, mode, model_path, session_path);
            if (mode == exo::RunMode::Button) {
                std::cout << "button run complete, " << result.telemetry.size() << " telemetry rows\n";
            } else {
                std::cout << exo::render_report(result.report);
            }
            if (!result.peaks.empty()) {
                std::cout << "force peaks (N):";
                for (double p : result.peaks) std::cout << ' ' << p;
                std::cout << '\n';
            }
            std::cout << "outputs in " << result.out_dir << '\n';
        } else if (eval->parsed()) {
            const exo::EventReport report = exo::cmd_eval(pred_path, truth_path, window_ms);
            std::cout << exo::render_report(report);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
