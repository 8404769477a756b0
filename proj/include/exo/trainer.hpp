#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "exo/device.hpp"
#include "exo/forest.hpp"
#include "exo/signal.hpp"
#include "exo/types.hpp"

namespace exo {

/// Ground-truth class for a frame captured under `instruction` while the
/// device reports `phase`:
///
///               Extended   Retracting   Retracted   Extending
///   Open        Open       Open         Open        Open
///   Relax       Close      (discard)    Close       (discard)
///   Close       Close      Close        Close       Close
///
/// Cued intent wins over mechanical state — a subject told to open while the
/// tendon is still moving is opening.  Relax at a rest phase means the wearer
/// accepts that posture, which the controller reaches via Close; relax while
/// the tendon is in transit is ambiguous, so those frames return nullopt and
/// are dropped from training.
std::optional<HandState> label_for(Instruction instruction, DevicePhase phase);

/// One cue of a training schedule.  `device_command` is what the operator has
/// the motor doing from the start of this cue onward (rest cues just re-issue
/// the command that holds the current end of travel).
struct CueStep {
    Instruction instruction = Instruction::Relax;
    std::int64_t duration_ms = 0;
    Command device_command = Command::Close;
};

struct LabeledSample {
    EmgFrame frame;
    Instruction instruction = Instruction::Relax;
    DevicePhase phase = DevicePhase::Extended;
    std::optional<HandState> label;
};

/// Anything that yields an EMG frame for a cue + device phase at a timestamp.
using SubjectSource = std::function<EmgFrame(Instruction, DevicePhase, std::int64_t)>;

struct ProtocolRun {
    SessionRecording session;            // every frame; discarded rows have an empty label
    std::vector<LabeledSample> samples;  // usable frames only
};

/// Runs a cue schedule against a live device.  Frames arrive on the sample
/// grid; each one is stamped with the phase the device reports at that
/// instant, so a mid-cue arrival at an end of travel changes the recorded
/// phase (and with it the label) on exactly that frame.
/// Throws std::invalid_argument on an empty schedule or non-positive durations.
ProtocolRun run_protocol_session(const SubjectSource& subject, ExotendonSim& device,
                                 const std::vector<CueStep>& schedule, double sample_rate_hz = 50.0);

/// As above, returning just the usable samples.
std::vector<LabeledSample> run_protocol(const SubjectSource& subject, ExotendonSim& device,
                                        const std::vector<CueStep>& schedule, double sample_rate_hz = 50.0);

/// Device-less variant: no phases to wait for, so the label follows the cue
/// directly (Open -> Open, Relax and Close -> Close) and nothing is discarded.
/// Frames are recorded with phase Extended throughout.
ProtocolRun run_nofunction_session(const SubjectSource& subject, const std::vector<CueStep>& schedule,
                                   double sample_rate_hz = 50.0);
std::vector<LabeledSample> run_nofunction_protocol(const SubjectSource& subject,
                                                   const std::vector<CueStep>& schedule,
                                                   double sample_rate_hz = 50.0);

/// One counter-clockwise pass around the cue/phase cycle, starting and ending
/// relaxed with the tendon extended (22.5 s at the default durations).
std::vector<CueStep> default_training_cycle();

/// The full default protocol: two passes, 45 s, ~2250 frames at 50 Hz.
std::vector<CueStep> default_training_schedule();

/// Relax/open alternation used for scoring runs: 60 s, four intent changes,
/// holds long enough for the tendon to complete each stroke.
std::vector<CueStep> default_test_schedule();

std::vector<CueStep> repeat_schedule(const std::vector<CueStep>& cycle, int times);

/// Drops the (frame, label) pairs into the shape train_forest() consumes.
TrainingSet to_training_set(const std::vector<LabeledSample>& samples);

}  // namespace exo
