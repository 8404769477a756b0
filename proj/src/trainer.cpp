#include "exo/trainer.hpp"

#include <cmath>
#include <stdexcept>

namespace exo {

namespace {

bool is_transit(DevicePhase p) {
    return p == DevicePhase::Retracting || p == DevicePhase::Extending;
}

void check_schedule(const std::vector<CueStep>& schedule) {
    if (schedule.empty()) throw std::invalid_argument("cue schedule is empty");
    for (const CueStep& cue : schedule) {
        if (cue.duration_ms <= 0) {
            throw std::invalid_argument("cue durations must be positive, got " +
                                        std::to_string(cue.duration_ms) + "ms");
        }
    }
}

std::int64_t total_duration(const std::vector<CueStep>& schedule) {
    std::int64_t total = 0;
    for (const CueStep& cue : schedule) total += cue.duration_ms;
    return total;
}

// Shared protocol loop.  With a device the schedule's motor commands drive
// it and every frame is stamped with the phase reported at that frame's
// timestamp; without one the phase is pinned to Extended, which makes
// label_for() collapse to the cue-only mapping.
ProtocolRun run_session(const SubjectSource& subject, ExotendonSim* device,
                        const std::vector<CueStep>& schedule, double sample_rate_hz) {
    check_schedule(schedule);
    if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
        throw std::invalid_argument("sample_rate_hz must be positive");
    }

    const double period_ms = 1000.0 / sample_rate_hz;
    const std::int64_t end_ms = total_duration(schedule);

    ProtocolRun run;
    run.session.sample_rate_hz = sample_rate_hz;

    std::size_t cue_idx = 0;
    std::int64_t cue_end = schedule[0].duration_ms;
    std::int64_t device_t = 0;  // how far the simulator has been stepped
    for (std::int64_t k = 0;; ++k) {
        const std::int64_t t = std::llround(static_cast<double>(k) * period_ms);
        if (t >= end_ms) break;
        while (t >= cue_end) {
            ++cue_idx;
            cue_end += schedule[cue_idx].duration_ms;
        }
        const CueStep& cue = schedule[cue_idx];

        DevicePhase phase = DevicePhase::Extended;
        if (device != nullptr) {
            // Catch the device up to this frame's timestamp.
            while (device_t + device->params().dt_ms <= t) {
                device->step(cue.device_command);
                device_t += device->params().dt_ms;
            }
            phase = device->status().phase;
        }

        LabeledSample sample;
        sample.frame = subject(cue.instruction, phase, t);
        sample.frame.t_ms = t;
        sample.instruction = cue.instruction;
        sample.phase = phase;
        sample.label = label_for(cue.instruction, phase);

        run.session.frames.push_back(sample.frame);
        run.session.annotations.push_back({cue.instruction, phase, sample.label});
        if (sample.label) run.samples.push_back(sample);
    }
    run.session.validate();
    return run;
}

}  // namespace

std::optional<HandState> label_for(Instruction instruction, DevicePhase phase) {
    switch (instruction) {
        case Instruction::Open:
            return HandState::Open;
        case Instruction::Close:
            return HandState::Close;
        case Instruction::Relax:
            if (is_transit(phase)) return std::nullopt;
            return HandState::Close;
    }
    return std::nullopt;
}

ProtocolRun run_protocol_session(const SubjectSource& subject, ExotendonSim& device,
                                 const std::vector<CueStep>& schedule, double sample_rate_hz) {
    return run_session(subject, &device, schedule, sample_rate_hz);
}

std::vector<LabeledSample> run_protocol(const SubjectSource& subject, ExotendonSim& device,
                                        const std::vector<CueStep>& schedule, double sample_rate_hz) {
    return run_protocol_session(subject, device, schedule, sample_rate_hz).samples;
}

ProtocolRun run_nofunction_session(const SubjectSource& subject, const std::vector<CueStep>& schedule,
                                   double sample_rate_hz) {
    return run_session(subject, nullptr, schedule, sample_rate_hz);
}

std::vector<LabeledSample> run_nofunction_protocol(const SubjectSource& subject,
                                                   const std::vector<CueStep>& schedule,
                                                   double sample_rate_hz) {
    return run_nofunction_session(subject, schedule, sample_rate_hz).samples;
}

std::vector<CueStep> default_training_cycle() {
    // Counter-clockwise around the cue/phase cycle.  Transit cues run 3 s so
    // the 40 mm stroke at 15 mm/s (~2.7 s) completes inside them.
    return {
        {Instruction::Relax, 3500, Command::Close},  // at rest, tendon extended
        {Instruction::Open, 3500, Command::Close},   // open intent, device still parked
        {Instruction::Open, 3000, Command::Open},    // operator retracts while the subject opens
        {Instruction::Relax, 3500, Command::Open},   // rest, held retracted
        {Instruction::Close, 3500, Command::Open},   // close intent against the tendon
        {Instruction::Close, 3000, Command::Close},  // operator pays out while the subject closes
        {Instruction::Relax, 2500, Command::Close},  // back at rest, extended
    };
}

std::vector<CueStep> default_training_schedule() {
    return repeat_schedule(default_training_cycle(), 2);
}

std::vector<CueStep> default_test_schedule() {
    return {
        {Instruction::Relax, 12000, Command::Close},
        {Instruction::Open, 12000, Command::Close},
        {Instruction::Relax, 12000, Command::Close},
        {Instruction::Open, 12000, Command::Close},
        {Instruction::Relax, 12000, Command::Close},
    };
}

std::vector<CueStep> repeat_schedule(const std::vector<CueStep>& cycle, int times) {
    if (times < 1) throw std::invalid_argument("schedule repeat count must be >= 1");
    std::vector<CueStep> out;
    out.reserve(cycle.size() * static_cast<std::size_t>(times));
    for (int i = 0; i < times; ++i) out.insert(out.end(), cycle.begin(), cycle.end());
    return out;
}

TrainingSet to_training_set(const std::vector<LabeledSample>& samples) {
    TrainingSet out;
    out.reserve(samples.size());
    for (const LabeledSample& s : samples) {
        if (s.label) out.emplace_back(s.frame, *s.label);
    }
    return out;
}

}  // namespace exo
