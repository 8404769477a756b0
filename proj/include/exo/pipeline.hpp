#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "exo/forest.hpp"
#include "exo/types.hpp"

namespace exo {

struct PipelineConfig {
    std::int64_t window_ms = 500;  // trailing median span, current sample included
    double open_threshold = 0.75;   // on the filtered Open probability
    double close_threshold = 0.75;  // on the filtered Close probability
    Command initial_command = Command::Close;

    /// Thresholds must lie in (0.5, 1]; throws std::invalid_argument.
    void validate() const;
};

/// Median of a nonempty list: middle element when the length is odd, the
/// arithmetic mean of the two middle elements when it is even.
double median(std::span<const double> values);

struct PipelineStep {
    std::int64_t t_ms = 0;
    double p_open = 0.0;          // raw classifier output for this frame
    double filtered_open = 0.0;   // median of buffered p values
    double filtered_close = 0.0;  // median of buffered (1 - p) values
    Command command = Command::Close;
};

/// Streaming decision stage between classifier and device.  Each frame's raw
/// Open probability joins a trailing window; the two filtered probabilities
/// are medians over that window, taken independently (which is why their sum
/// can drift off 1 by a rounding hair on even-length windows).  The command
/// opens when filtered-open clears its threshold, else closes when
/// filtered-close clears its own, else repeats the previous command — that
/// last branch is what keeps the device from chattering near the thresholds.
class Pipeline {
public:
    explicit Pipeline(const PipelineConfig& cfg);

    /// Classifies the frame and advances one step.
    Command push(const ForestModel& model, const EmgFrame& frame);

    /// Advances one step on an externally supplied probability.  Frames must
    /// arrive in non-decreasing time order; a regressing timestamp throws
    /// std::invalid_argument and leaves the state untouched.
    Command push_probability(std::int64_t t_ms, double p_open);

    Command command() const { return command_; }
    const PipelineStep& last_step() const;  // valid once a push has succeeded

    /// Buffered (t_ms, p) pairs, oldest first — the current filter window.
    std::vector<std::pair<std::int64_t, double>> window_contents() const;

private:
    PipelineConfig cfg_;
    std::deque<std::pair<std::int64_t, double>> window_;
    std::vector<double> scratch_;
    Command command_;
    PipelineStep last_{};
    bool has_last_ = false;
};

// Trace CSV: t_ms,p_open,filtered_open,filtered_close,command
void write_pipeline_trace(const std::vector<PipelineStep>& steps, std::ostream& out);
std::vector<PipelineStep> read_pipeline_trace(std::istream& in);

}  // namespace exo
