// Release gate for the toolkit: nine self-contained behavioral checks, each
// printed as one [PASS]/[FAIL] line.  Exit status is the number of failures.
// Runtime ceilings are part of the contract and enforced here, not advisory.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "exo/config.hpp"
#include "exo/device.hpp"
#include "exo/eval.hpp"
#include "exo/forest.hpp"
#include "exo/pipeline.hpp"
#include "exo/rng.hpp"
#include "exo/runner.hpp"
#include "exo/subject.hpp"
#include "exo/trainer.hpp"

using namespace exo;
namespace fs = std::filesystem;

namespace {

fs::path scratch_root() { return fs::temp_directory_path() / "exoctl_acceptance"; }

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "<unreadable: " + path.string() + ">";
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss << v;
    return ss.str();
}

// ---------------------------------------------------------------------------
// 1. Cue labeling: the full instruction x phase table, spelled out.

std::string crit_labeling() {
    constexpr auto kOpen = HandState::Open;
    constexpr auto kClose = HandState::Close;
    const struct Row {
        Instruction instruction;
        DevicePhase phase;
        std::optional<HandState> want;
    } table[] = {
        {Instruction::Open, DevicePhase::Extended, kOpen},
        {Instruction::Open, DevicePhase::Retracting, kOpen},
        {Instruction::Open, DevicePhase::Retracted, kOpen},
        {Instruction::Open, DevicePhase::Extending, kOpen},
        {Instruction::Close, DevicePhase::Extended, kClose},
        {Instruction::Close, DevicePhase::Retracting, kClose},
        {Instruction::Close, DevicePhase::Retracted, kClose},
        {Instruction::Close, DevicePhase::Extending, kClose},
        {Instruction::Relax, DevicePhase::Extended, kClose},
        {Instruction::Relax, DevicePhase::Retracted, kClose},
        {Instruction::Relax, DevicePhase::Retracting, std::nullopt},
        {Instruction::Relax, DevicePhase::Extending, std::nullopt},
    };
    for (const Row& row : table) {
        const auto got = label_for(row.instruction, row.phase);
        if (got != row.want) {
            return std::string("label_for(") + std::string(to_string(row.instruction)) + ", " +
                   std::string(to_string(row.phase)) + ") produced the wrong label";
        }
    }
    return "";
}

// ---------------------------------------------------------------------------
// 2. Spike suppression: a burst of up to 12 flipped frames inside a full
//    26-frame median window can never move the command, wherever it lands.
//    Checked by brute force over every burst length and position in a 10s
//    stream, in both directions.

std::string crit_spikes() {
    const PipelineConfig cfg;  // 500ms window, 26 frames at 50Hz, 0.75/0.75
    const int n = 500;         // 10 seconds
    const int warmup = 26;     // spikes start only once the window is full
    for (int len = 1; len <= 12; ++len) {
        for (int start = warmup; start + len <= n; ++start) {
            Pipeline low(cfg);   // all-Close stream, burst toward Open
            Pipeline high(cfg);  // all-Open stream, burst toward Close
            for (int k = 0; k < n; ++k) {
                const bool burst = k >= start && k < start + len;
                low.push_probability(k * 20, burst ? 1.0 : 0.0);
                high.push_probability(k * 20, burst ? 0.0 : 1.0);
                if (low.command() != Command::Close) {
                    return "burst len " + std::to_string(len) + " at " + std::to_string(start) +
                           " opened an all-close stream (step " + std::to_string(k) + ")";
                }
                if (k >= 1 && high.command() != Command::Open) {
                    return "burst len " + std::to_string(len) + " at " + std::to_string(start) +
                           " closed an all-open stream (step " + std::to_string(k) + ")";
                }
            }
        }
    }
    return "";
}

// ---------------------------------------------------------------------------
// 3. Latch semantics under fuzz: across 100000 random streams the command
//    changes only when the corresponding filtered probability clears its
//    threshold, and the two guards are never simultaneously true.

std::string crit_latch() {
    Rng rng(404);
    long changes = 0;
    for (int trial = 0; trial < 100000; ++trial) {
        PipelineConfig cfg;
        cfg.open_threshold = 0.505 + 0.49 * rng.uniform01();
        cfg.close_threshold = 0.505 + 0.49 * rng.uniform01();
        cfg.initial_command = rng.next_below(2) == 0 ? Command::Open : Command::Close;
        Pipeline ps(cfg);
        Command prev = ps.command();
        const int steps = 10 + static_cast<int>(rng.next_below(40));
        for (int k = 0; k < steps; ++k) {
            double p = 0.0;
            switch (rng.next_below(4)) {
                case 0: p = 0.0; break;
                case 1: p = 1.0; break;
                default: p = rng.uniform01(); break;
            }
            ps.push_probability(k * 20, p);
            const PipelineStep& s = ps.last_step();
            const bool open_guard = s.filtered_open >= cfg.open_threshold;
            const bool close_guard = s.filtered_close >= cfg.close_threshold;
            if (open_guard && close_guard) {
                return "both guards true in trial " + std::to_string(trial) + " at step " +
                       std::to_string(k) + " (filtered " + fmt(s.filtered_open) + "/" +
                       fmt(s.filtered_close) + ")";
            }
            const Command now = ps.command();
            if (open_guard && now != Command::Open) return "open guard held but command is close";
            if (close_guard && now != Command::Close) return "close guard held but command is open";
            if (!open_guard && !close_guard && now != prev) {
                return "command changed with no guard true (trial " + std::to_string(trial) + ")";
            }
            if (now != prev) ++changes;
            prev = now;
        }
    }
    if (changes < 10000) {
        return "fuzz only produced " + std::to_string(changes) + " command changes; not probing";
    }
    return "";
}

// ---------------------------------------------------------------------------
// 4. Event matching against an independent reference matcher.  The reference
//    rescans the raw traces for every candidate instead of reusing any of the
//    library's machinery.

struct RefMatch {
    int correct = 0;
    std::vector<std::optional<std::int64_t>> predicted_t;
};

RefMatch reference_match(const IntentTrace& pred, const IntentTrace& truth, std::int64_t window_ms) {
    const auto transitions = [](const IntentTrace& tr) {
        std::vector<std::pair<std::int64_t, HandState>> out;
        for (std::size_t i = 1; i < tr.size(); ++i) {
            if (tr[i].state != tr[i - 1].state) out.emplace_back(tr[i].t_ms, tr[i].state);
        }
        return out;
    };
    const auto tev = transitions(truth);
    const auto pev = transitions(pred);
    std::vector<bool> used(pev.size(), false);
    RefMatch result;
    result.predicted_t.assign(tev.size(), std::nullopt);
    for (std::size_t k = 0; k < tev.size(); ++k) {
        const std::int64_t t_g = tev[k].first;
        const HandState want = tev[k].second;
        const std::int64_t t_next =
            k + 1 < tev.size() ? tev[k + 1].first : truth.back().t_ms + 1;
        for (std::size_t j = 0; j < pev.size(); ++j) {
            if (used[j] || pev[j].second != want) continue;
            const std::int64_t t_p = pev[j].first;
            if (t_p < t_g || t_p > t_g + window_ms || t_p >= t_next) continue;
            bool holds = true;
            for (const IntentSample& s : pred) {
                if (s.t_ms >= t_p && s.t_ms < t_next && s.state != want) {
                    holds = false;
                    break;
                }
            }
            if (!holds) continue;
            used[j] = true;
            result.predicted_t[k] = t_p;
            ++result.correct;
            break;
        }
    }
    return result;
}

std::string crit_matcher() {
    Rng rng(77);
    long truth_total = 0;
    long matched_total = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_below(499));
        IntentTrace truth(n);
        HandState state = rng.next_below(2) == 0 ? HandState::Open : HandState::Close;
        for (int i = 0; i < n; ++i) {
            if (i > 0 && rng.uniform01() < 0.03) {
                state = state == HandState::Open ? HandState::Close : HandState::Open;
            }
            truth[i] = {i * 20, state};
        }
        IntentTrace pred = truth;
        switch (trial % 3) {
            case 0:  // independent flips
                for (auto& s : pred) {
                    if (rng.uniform01() < 0.05) {
                        s.state = s.state == HandState::Open ? HandState::Close : HandState::Open;
                    }
                }
                break;
            case 1: {  // truth delayed by a few frames, plus light noise
                const int d = static_cast<int>(rng.next_below(30));
                for (int i = n - 1; i >= 0; --i) pred[i].state = truth[std::max(0, i - d)].state;
                for (auto& s : pred) {
                    if (rng.uniform01() < 0.01) {
                        s.state = s.state == HandState::Open ? HandState::Close : HandState::Open;
                    }
                }
                break;
            }
            default: {  // unrelated stream
                HandState ps = HandState::Close;
                for (auto& s : pred) {
                    if (rng.uniform01() < 0.04) {
                        ps = ps == HandState::Open ? HandState::Close : HandState::Open;
                    }
                    s.state = ps;
                }
                break;
            }
        }
        const EventReport got = match_events(pred, truth, 850);
        const RefMatch want = reference_match(pred, truth, 850);
        truth_total += static_cast<long>(want.predicted_t.size());
        matched_total += want.correct;
        if (got.correct_events != want.correct ||
            got.event_details.size() != want.predicted_t.size()) {
            return "trial " + std::to_string(trial) + ": " + std::to_string(got.correct_events) +
                   " correct, reference says " + std::to_string(want.correct);
        }
        for (std::size_t k = 0; k < want.predicted_t.size(); ++k) {
            if (got.event_details[k].predicted_t_ms != want.predicted_t[k]) {
                return "trial " + std::to_string(trial) + ": event " + std::to_string(k) +
                       " matched at a different prediction time than the reference";
            }
        }
    }
    if (truth_total < 2000 || matched_total < 500) {
        return "fuzz too tame: " + std::to_string(truth_total) + " events, " +
               std::to_string(matched_total) + " matched";
    }
    return "";
}

// ---------------------------------------------------------------------------
// 5. End to end: synthesize, train, and drive the device live.  The separable
//    subject must score, and the overlapping subject must score strictly
//    worse.  Criterion 9 reuses the separable run.

std::optional<RunResult> g_separable_run;
int g_separable_reaction_ms = 0;

void run_chain(RunConfig cfg, const fs::path& dir, RunMode mode, RunResult& out) {
    cfg.out_dir = (dir / "synth").string();
    const SynthResult synth = cmd_synth(cfg);
    const std::string model = (dir / "model.json").string();
    cmd_train(cfg, synth.train_path, model);
    cfg.out_dir = (dir / "run").string();
    out = cmd_run(cfg, mode, model);
}

std::string crit_end_to_end() {
    RunConfig cfg;
    cfg.seed = 11;
    RunResult separable;
    run_chain(cfg, scratch_root() / "e2e_separable", RunMode::Device, separable);
    g_separable_run = separable;
    g_separable_reaction_ms = cfg.make_profile(0).reaction_ms;

    if (separable.report.per_sample_accuracy < 0.95) {
        return "separable accuracy " + fmt(separable.report.per_sample_accuracy) + " < 0.95";
    }
    const double needed = 0.9 * separable.report.total_events;
    if (separable.report.correct_events < needed) {
        return "separable events " + std::to_string(separable.report.correct_events) + "/" +
               std::to_string(separable.report.total_events) + " below 90%";
    }

    cfg.profile = "overlapping";
    RunResult overlapping;
    run_chain(cfg, scratch_root() / "e2e_overlapping", RunMode::Device, overlapping);
    if (!(overlapping.report.per_sample_accuracy < separable.report.per_sample_accuracy)) {
        return "overlapping subject scored " + fmt(overlapping.report.per_sample_accuracy) +
               ", not strictly below " + fmt(separable.report.per_sample_accuracy);
    }
    return "";
}

// ---------------------------------------------------------------------------
// 6. Coactivation sensitivity: a model trained on resting-arm data must lose
//    events once the arm is engaged in a functional task.

std::string crit_coactivation() {
    RunConfig cfg;
    cfg.seed = 13;
    cfg.profile = "coactivating";
    cfg.out_dir = (scratch_root() / "coact" / "synth").string();
    const SynthResult synth = cmd_synth(cfg);
    const std::string model = (scratch_root() / "coact" / "model.json").string();
    cmd_train(cfg, synth.train_path, model);

    cfg.out_dir = (scratch_root() / "coact" / "rest").string();
    const RunResult rest = cmd_run(cfg, RunMode::Device, model);
    cfg.out_dir = (scratch_root() / "coact" / "engaged").string();
    const RunResult engaged = cmd_run(cfg, RunMode::PickPlace, model);

    if (!(engaged.report.correct_events < rest.report.correct_events)) {
        return "engaged arm matched " + std::to_string(engaged.report.correct_events) +
               " events, resting " + std::to_string(rest.report.correct_events) +
               "; expected strictly fewer";
    }
    return "";
}

// ---------------------------------------------------------------------------
// 7. Device safety caps: 10000 fuzzed steps never exceed the speed or force
//    ceilings.

std::string crit_device_safety() {
    const DeviceParams params;
    ExotendonSim sim(params);
    Rng rng(31);
    const double step_cap = params.v_max_mm_s * (params.dt_ms / 1000.0) + 1e-9;
    double prev_pos = sim.status().position_mm;
    for (int k = 0; k < 10000; ++k) {
        const Command cmd = rng.next_below(2) == 0 ? Command::Open : Command::Close;
        const DeviceStatus s = sim.step(cmd);
        if (std::abs(s.position_mm - prev_pos) > step_cap) {
            return "step " + std::to_string(k) + " moved " +
                   fmt(std::abs(s.position_mm - prev_pos)) + "mm, cap " + fmt(step_cap);
        }
        if (s.force_n < 0.0 || s.force_n > params.f_peak_n) {
            return "step " + std::to_string(k) + " force " + fmt(s.force_n) + "N outside [0, " +
                   fmt(params.f_peak_n) + "]";
        }
        if (s.position_mm < 0.0 || s.position_mm > params.travel_max_mm) {
            return "step " + std::to_string(k) + " position " + fmt(s.position_mm) +
                   "mm outside travel";
        }
        prev_pos = s.position_mm;
    }
    return "";
}

// ---------------------------------------------------------------------------
// 8. Determinism: two identically configured pipelines produce byte-identical
//    artifacts and models with identical outputs.

std::string crit_determinism() {
    const auto chain = [](const fs::path& dir, std::string& model_path) {
        RunConfig cfg;
        cfg.seed = 21;
        cfg.out_dir = (dir / "synth").string();
        const SynthResult synth = cmd_synth(cfg);
        model_path = (dir / "model.json").string();
        cmd_train(cfg, synth.train_path, model_path);
        cfg.out_dir = (dir / "run").string();
        cmd_run(cfg, RunMode::Device, model_path);
    };
    const fs::path a = scratch_root() / "det_a";
    const fs::path b = scratch_root() / "det_b";
    std::string model_a, model_b;
    chain(a, model_a);
    chain(b, model_b);

    const char* artifacts[] = {
        "synth/train_session.csv", "synth/test_session.csv", "run/pipeline_trace.csv",
        "run/pred_trace.csv",      "run/truth_trace.csv",    "run/telemetry.csv",
        "run/report.txt",          "run/report.csv",         "run/events.csv",
    };
    for (const char* rel : artifacts) {
        if (read_file(a / rel) != read_file(b / rel)) {
            return std::string(rel) + " differs between identical reruns";
        }
    }

    const LoadedModel la = load_model(model_a);
    const LoadedModel lb = load_model(model_b);
    Rng rng(5);
    for (int i = 0; i < 500; ++i) {
        EmgFrame f;
        f.t_ms = i * 20;
        for (double& c : f.channels) c = rng.uniform(-20.0, 60.0);
        if (classify(la.model, f) != classify(lb.model, f)) {
            return "models from identical reruns disagree on frame " + std::to_string(i);
        }
    }
    return "";
}

// ---------------------------------------------------------------------------
// 9. Transition latency: on the separable live run, every intent change is
//    matched within 520ms plus the subject's reaction delay.

std::string crit_latency() {
    if (!g_separable_run) return "no live run available (end-to-end criterion did not finish)";
    const std::int64_t bound = 520 + g_separable_reaction_ms;
    for (const EventDetail& ev : g_separable_run->report.event_details) {
        if (!ev.matched || !ev.predicted_t_ms) {
            return "intent change at " + std::to_string(ev.truth_t_ms) + "ms was never matched";
        }
        const std::int64_t delay = *ev.predicted_t_ms - ev.truth_t_ms;
        if (delay > bound) {
            return "intent change at " + std::to_string(ev.truth_t_ms) + "ms took " +
                   std::to_string(delay) + "ms, bound " + std::to_string(bound) + "ms";
        }
    }
    return "";
}

// ---------------------------------------------------------------------------

struct Criterion {
    int id;
    const char* name;
    double limit_s;  // 0 = no runtime ceiling
    std::string (*fn)();
};

}  // namespace

int main() {
    const Criterion criteria[] = {
        {1, "cue labeling table", 1.0, crit_labeling},
        {2, "median spike suppression", 5.0, crit_spikes},
        {3, "latch guard fuzz", 0.0, crit_latch},
        {4, "event matcher vs reference", 30.0, crit_matcher},
        {5, "end-to-end training and control", 60.0, crit_end_to_end},
        {6, "coactivation sensitivity", 0.0, crit_coactivation},
        {7, "device safety caps", 0.0, crit_device_safety},
        {8, "deterministic reruns", 0.0, crit_determinism},
        {9, "transition latency", 0.0, crit_latency},
    };

    std::error_code ec;
    fs::remove_all(scratch_root(), ec);

    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string why;
        try {
            why = c.fn();
        } catch (const std::exception& e) {
            why = std::string("threw: ") + e.what();
        }
        const double dt =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (why.empty() && c.limit_s > 0.0 && dt > c.limit_s) {
            std::ostringstream ss;
            ss << "took " << dt << "s, ceiling " << c.limit_s << "s";
            why = ss.str();
        }
        if (why.empty()) {
            std::printf("[PASS] %d %s (%.2fs)\n", c.id, c.name, dt);
        } else {
            std::printf("[FAIL] %d %s (%.2fs): %s\n", c.id, c.name, dt, why.c_str());
            ++failures;
        }
    }

    if (failures == 0) fs::remove_all(scratch_root(), ec);
    return failures;
}
