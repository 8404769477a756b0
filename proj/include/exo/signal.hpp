#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "exo/types.hpp"

namespace exo {

/// Per-frame session annotation: the cue in force, the device phase the frame
/// was captured in, and (when the frame is usable for training) its class.
struct FrameAnnotation {
    Instruction instruction = Instruction::Relax;
    DevicePhase device_state = DevicePhase::Extended;
    std::optional<HandState> label;

    bool operator==(const FrameAnnotation&) const = default;
};

/// A recorded EMG session: nominally fixed-rate frames with strictly
/// increasing timestamps.  `annotations` is either empty or holds exactly one
/// entry per frame.
struct SessionRecording {
    double sample_rate_hz = 50.0;
    std::vector<EmgFrame> frames;
    std::vector<FrameAnnotation> annotations;

    bool annotated() const { return !annotations.empty(); }

    /// Throws std::invalid_argument on rate/timestamp/annotation violations.
    void validate() const;

    bool operator==(const SessionRecording&) const = default;
};

// Session CSV layout:
//   # sample_rate_hz=50
//   t_ms,e1,e2,e3,e4,e5,e6,e7,e8,instruction,device_state,label
//   0,12.5,...,,,,
// The three annotation columns are empty for unannotated recordings, and the
// label column alone may be empty on annotated rows that were discarded for
// training.  Channel values are written in shortest round-trip form, so
// read(write(r)) reproduces r bit for bit.
void write_session(const SessionRecording& rec, std::ostream& out);
void write_session_file(const SessionRecording& rec, const std::string& path);

/// Throws std::runtime_error naming the offending row on malformed input.
SessionRecording read_session(std::istream& in);
SessionRecording read_session_file(const std::string& path);

struct ReplayItem {
    EmgFrame frame;
    std::optional<FrameAnnotation> annotation;
};

/// Sequential replay of a recording, one frame per call in timestamp order.
class SessionReplay {
public:
    explicit SessionReplay(const SessionRecording& rec) : rec_(&rec) {}

    std::optional<ReplayItem> next();
    bool done() const { return pos_ >= rec_->frames.size(); }
    void reset() { pos_ = 0; }

private:
    const SessionRecording* rec_;
    std::size_t pos_ = 0;
};

}  // namespace exo
