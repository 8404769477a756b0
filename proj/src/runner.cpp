#include "exo/runner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "exo/rng.hpp"

namespace exo {

namespace {

namespace fs = std::filesystem;

std::string join(const std::string& dir, const char* name) {
    return (fs::path(dir) / name).string();
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
}

template <typename WriteFn>
void write_file(const std::string& path, WriteFn&& fn) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    fn(out);
    out.flush();
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

/// Ground truth for scoring runs comes straight from the cue: an open cue is
/// Open intent, relax and close both mean the hand should be (allowed to be)
/// closed.
HandState truth_for(Instruction cue) {
    return cue == Instruction::Open ? HandState::Open : HandState::Close;
}

struct ScheduleCursor {
    const std::vector<CueStep>* schedule;
    std::size_t idx = 0;
    std::int64_t cue_end;

    explicit ScheduleCursor(const std::vector<CueStep>& s)
        : schedule(&s), cue_end(s.empty() ? 0 : s[0].duration_ms) {}

    const CueStep& at(std::int64_t t) {
        while (t >= cue_end && idx + 1 < schedule->size()) {
            ++idx;
            cue_end += (*schedule)[idx].duration_ms;
        }
        return (*schedule)[idx];
    }
};

std::int64_t schedule_duration(const std::vector<CueStep>& schedule) {
    std::int64_t total = 0;
    for (const CueStep& cue : schedule) total += cue.duration_ms;
    return total;
}

void check_model_compatible(const LoadedModel& loaded, const RunConfig& cfg) {
    if (loaded.sample_rate_hz != cfg.sample_rate_hz) {
        throw std::runtime_error("model was trained at " + std::to_string(loaded.sample_rate_hz) +
                                 "Hz but the session runs at " + std::to_string(cfg.sample_rate_hz) + "Hz");
    }
}

void write_run_outputs(const RunResult& result, bool with_device) {
    write_file(join(result.out_dir, "pipeline_trace.csv"),
               [&](std::ostream& out) { write_pipeline_trace(result.trace, out); });
    write_file(join(result.out_dir, "pred_trace.csv"),
               [&](std::ostream& out) { write_intent_trace(result.predicted, out); });
    write_file(join(result.out_dir, "truth_trace.csv"),
               [&](std::ostream& out) { write_intent_trace(result.truth, out); });
    if (with_device) {
        write_file(join(result.out_dir, "telemetry.csv"),
                   [&](std::ostream& out) { write_telemetry(result.telemetry, out); });
    }
    write_file(join(result.out_dir, "report.txt"),
               [&](std::ostream& out) { out << render_report(result.report); });
    write_file(join(result.out_dir, "report.csv"),
               [&](std::ostream& out) { write_report_csv(result.report, out); });
    write_file(join(result.out_dir, "events.csv"),
               [&](std::ostream& out) { write_event_details_csv(result.report, out); });
}

RunResult run_replay(const RunConfig& cfg, RunMode mode, const ForestModel& model,
                     const std::string& session_path) {
    const SessionRecording session = read_session_file(session_path);
    if (session.frames.empty()) throw std::runtime_error("session '" + session_path + "' has no frames");
    if (!session.annotated()) {
        throw std::runtime_error("session '" + session_path + "' carries no annotations to score against");
    }
    if (session.sample_rate_hz != cfg.sample_rate_hz) {
        throw std::runtime_error("session '" + session_path + "' was recorded at " +
                                 std::to_string(session.sample_rate_hz) + "Hz, config expects " +
                                 std::to_string(cfg.sample_rate_hz) + "Hz");
    }

    const bool with_device = mode != RunMode::NoDevice;
    RunResult result;
    result.out_dir = cfg.out_dir;
    Pipeline pipeline(cfg.pipeline);
    ExotendonSim device(cfg.device);
    std::int64_t device_t = 0;
    Command command = cfg.pipeline.initial_command;

    SessionReplay replay(session);
    while (auto item = replay.next()) {
        if (with_device) {
            while (device_t + device.params().dt_ms <= item->frame.t_ms) {
                device.step(command);
                device_t += device.params().dt_ms;
            }
        }
        command = pipeline.push(model, item->frame);
        result.trace.push_back(pipeline.last_step());
        result.predicted.push_back({item->frame.t_ms, to_hand_state(command)});
        result.truth.push_back({item->frame.t_ms, truth_for(item->annotation->instruction)});
        if (with_device) {
            const DeviceStatus& st = device.status();
            result.telemetry.push_back({item->frame.t_ms, st.position_mm, st.phase, st.force_n, command});
        }
    }

    result.report = match_events(result.predicted, result.truth);
    result.peaks = force_peaks(result.telemetry);
    write_run_outputs(result, with_device);
    return result;
}

RunResult run_live(const RunConfig& cfg, RunMode mode, const ForestModel& model) {
    if (cfg.test_schedule.empty()) throw std::runtime_error("test schedule is empty");
    const double period_ms = 1000.0 / cfg.sample_rate_hz;
    const std::int64_t end_ms = schedule_duration(cfg.test_schedule);

    RunResult result;
    result.out_dir = cfg.out_dir;
    SyntheticSubject subject(cfg.make_profile(derive_seed(cfg.seed, kSeedStreamTestSubject)));
    subject.set_arm_engaged(mode == RunMode::PickPlace);
    Pipeline pipeline(cfg.pipeline);
    ExotendonSim device(cfg.device);
    ScheduleCursor cursor(cfg.test_schedule);
    std::int64_t device_t = 0;
    Command command = cfg.pipeline.initial_command;

    for (std::int64_t k = 0;; ++k) {
        const std::int64_t t = std::llround(static_cast<double>(k) * period_ms);
        if (t >= end_ms) break;
        const CueStep& cue = cursor.at(t);

        // The device follows the command stream with its own period; its
        // phase at this instant shapes the EMG the subject produces.
        while (device_t + device.params().dt_ms <= t) {
            device.step(command);
            device_t += device.params().dt_ms;
        }

        EmgFrame frame = subject.generate(cue.instruction, device.status().phase, t);
        command = pipeline.push(model, frame);

        result.trace.push_back(pipeline.last_step());
        result.predicted.push_back({t, to_hand_state(command)});
        result.truth.push_back({t, truth_for(cue.instruction)});
        const DeviceStatus& st = device.status();
        result.telemetry.push_back({t, st.position_mm, st.phase, st.force_n, command});
    }

    result.report = match_events(result.predicted, result.truth);
    result.peaks = force_peaks(result.telemetry);
    write_run_outputs(result, true);
    return result;
}

RunResult run_button(const RunConfig& cfg) {
    if (cfg.button_schedule.empty()) throw std::runtime_error("button schedule is empty");
    RunResult result;
    result.out_dir = cfg.out_dir;
    ExotendonSim device(cfg.device);

    std::int64_t t = 0;
    for (const ButtonPress& press : cfg.button_schedule) {
        if (press.duration_ms <= 0) throw std::runtime_error("button press durations must be positive");
        const std::int64_t press_end = t + press.duration_ms;
        while (t + device.params().dt_ms <= press_end) {
            const DeviceStatus st = device.step(press.command);
            t += device.params().dt_ms;
            result.telemetry.push_back({t, st.position_mm, st.phase, st.force_n, press.command});
        }
        t = press_end;
    }

    result.peaks = force_peaks(result.telemetry);
    write_file(join(result.out_dir, "telemetry.csv"),
               [&](std::ostream& out) { write_telemetry(result.telemetry, out); });
    return result;
}

}  // namespace

RunMode run_mode_from_string(std::string_view s) {
    if (s == "no-device") return RunMode::NoDevice;
    if (s == "device") return RunMode::Device;
    if (s == "pickplace") return RunMode::PickPlace;
    if (s == "button") return RunMode::Button;
    throw std::invalid_argument("unknown run mode '" + std::string(s) +
                                "' (expected no-device, device, pickplace, or button)");
}

std::string_view to_string(RunMode mode) {
    switch (mode) {
        case RunMode::NoDevice: return "no-device";
        case RunMode::Device: return "device";
        case RunMode::PickPlace: return "pickplace";
        case RunMode::Button: return "button";
    }
    return "?";
}

SynthResult cmd_synth(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.train_schedule.empty()) throw std::runtime_error("training schedule is empty");
    if (cfg.test_schedule.empty()) throw std::runtime_error("test schedule is empty");

    // Build both runs before touching the filesystem so a bad schedule fails
    // without leaving partial output behind.
    SyntheticSubject train_subject(cfg.make_profile(derive_seed(cfg.seed, kSeedStreamTrainSubject)));
    ExotendonSim device(cfg.device);
    const ProtocolRun train_run = run_protocol_session(
        [&](Instruction i, DevicePhase p, std::int64_t t) { return train_subject.generate(i, p, t); }, device,
        cfg.train_schedule, cfg.sample_rate_hz);

    SyntheticSubject test_subject(cfg.make_profile(derive_seed(cfg.seed, kSeedStreamTestSubject)));
    const ProtocolRun test_run = run_nofunction_session(
        [&](Instruction i, DevicePhase p, std::int64_t t) { return test_subject.generate(i, p, t); },
        cfg.test_schedule, cfg.sample_rate_hz);

    ensure_out_dir(cfg.out_dir);
    SynthResult result;
    result.train_path = join(cfg.out_dir, "train_session.csv");
    result.test_path = join(cfg.out_dir, "test_session.csv");
    result.train_samples = train_run.samples.size();
    result.test_samples = test_run.samples.size();
    write_session_file(train_run.session, result.train_path);
    write_session_file(test_run.session, result.test_path);
    return result;
}

TrainResult cmd_train(const RunConfig& cfg, const std::string& session_path, const std::string& model_path) {
    cfg.validate();
    const SessionRecording session = read_session_file(session_path);
    if (!session.annotated()) {
        throw std::runtime_error("session '" + session_path + "' carries no labels to train on");
    }
    if (session.sample_rate_hz != cfg.sample_rate_hz) {
        throw std::runtime_error("session '" + session_path + "' was recorded at " +
                                 std::to_string(session.sample_rate_hz) + "Hz, config expects " +
                                 std::to_string(cfg.sample_rate_hz) + "Hz");
    }

    TrainingSet samples;
    for (std::size_t i = 0; i < session.frames.size(); ++i) {
        if (session.annotations[i].label) samples.emplace_back(session.frames[i], *session.annotations[i].label);
    }

    ForestHyperparams hp = cfg.forest;
    hp.rng_seed = derive_seed(cfg.seed, kSeedStreamForest);
    const ForestModel model = train_forest(samples, hp);

    save_model(model, session.sample_rate_hz, model_path);
    TrainResult result;
    result.model_path = model_path;
    result.training_accuracy = training_accuracy(model, samples);
    result.sample_count = samples.size();
    return result;
}

RunResult cmd_run(const RunConfig& cfg, RunMode mode, const std::string& model_path,
                  const std::string& session_path) {
    cfg.validate();
    ensure_out_dir(cfg.out_dir);

    if (mode == RunMode::Button) return run_button(cfg);

    const LoadedModel loaded = load_model(model_path);
    check_model_compatible(loaded, cfg);

    if (mode == RunMode::NoDevice) {
        if (session_path.empty()) throw std::runtime_error("no-device mode requires a recorded session");
        return run_replay(cfg, mode, loaded.model, session_path);
    }
    if (!session_path.empty()) return run_replay(cfg, mode, loaded.model, session_path);
    return run_live(cfg, mode, loaded.model);
}

EventReport cmd_eval(const std::string& pred_path, const std::string& truth_path, std::int64_t window_ms) {
    const auto read_trace = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open intent trace '" + path + "'");
        return read_intent_trace(in);
    };
    return match_events(read_trace(pred_path), read_trace(truth_path), window_ms);
}

}  // namespace exo
