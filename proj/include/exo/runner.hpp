#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "exo/config.hpp"
#include "exo/eval.hpp"
#include "exo/pipeline.hpp"

namespace exo {

// Seed streams fanned out from RunConfig::seed — see derive_seed().
inline constexpr std::uint64_t kSeedStreamTrainSubject = 1;
inline constexpr std::uint64_t kSeedStreamTestSubject = 2;
inline constexpr std::uint64_t kSeedStreamForest = 3;

enum class RunMode { NoDevice, Device, PickPlace, Button };

RunMode run_mode_from_string(std::string_view s);
std::string_view to_string(RunMode mode);

struct SynthResult {
    std::string train_path;
    std::string test_path;
    std::size_t train_samples = 0;  // usable (labeled) frames
    std::size_t test_samples = 0;
};

/// Generates a labeled training session (full protocol against the device)
/// and a device-less test session for the configured subject, and writes both
/// CSVs into out_dir.
SynthResult cmd_synth(const RunConfig& cfg);

struct TrainResult {
    std::string model_path;
    double training_accuracy = 0.0;
    std::size_t sample_count = 0;
};

/// Trains a forest on the labeled rows of a session file and saves it.
TrainResult cmd_train(const RunConfig& cfg, const std::string& session_path, const std::string& model_path);

struct RunResult {
    EventReport report;  // meaningful in every mode except Button
    std::vector<PipelineStep> trace;
    IntentTrace predicted;
    IntentTrace truth;
    std::vector<TelemetryRow> telemetry;  // empty in NoDevice mode
    std::vector<double> peaks;
    std::string out_dir;
};

/// Streams a session through the trained pipeline and scores it.
///
///   NoDevice   - replays `session_path` (required, must carry labels)
///   Device     - live closed loop: the synthetic subject reacts to the test
///                schedule, the pipeline's commands move the device, and the
///                device phase feeds back into the generated EMG.  With a
///                session path the recording is replayed instead and the
///                device just follows the commands.
///   PickPlace  - Device with the subject's arm engaged in a functional task
///                (coactivation shift active on a live run)
///   Button     - scripted button schedule drives the device directly; the
///                classifier and pipeline are bypassed, `model_path` unused
///
/// Writes traces, telemetry, and reports into cfg.out_dir.
RunResult cmd_run(const RunConfig& cfg, RunMode mode, const std::string& model_path,
                  const std::string& session_path = "");

/// Reads two intent-trace CSVs and scores them.
EventReport cmd_eval(const std::string& pred_path, const std::string& truth_path,
                     std::int64_t window_ms = 850);

}  // namespace exo
