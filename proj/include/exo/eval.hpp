#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "exo/device.hpp"
#include "exo/types.hpp"

namespace exo {

struct IntentSample {
    std::int64_t t_ms = 0;
    HandState state = HandState::Close;

    bool operator==(const IntentSample&) const = default;
};

/// A per-frame sequence of hand states with strictly increasing timestamps.
using IntentTrace = std::vector<IntentSample>;

struct IntentEvent {
    std::int64_t t_ms = 0;
    HandState new_state = HandState::Close;

    bool operator==(const IntentEvent&) const = default;
};

struct EventDetail {
    std::int64_t truth_t_ms = 0;
    HandState new_state = HandState::Close;
    bool matched = false;
    std::optional<std::int64_t> predicted_t_ms;  // matching prediction's transition time
};

struct EventReport {
    int total_events = 0;
    int correct_events = 0;
    double per_sample_accuracy = 0.0;
    std::vector<EventDetail> event_details;
};

/// Fraction of timestamps where the two traces agree.  Both traces must be
/// nonempty and cover exactly the same timestamps; throws
/// std::invalid_argument otherwise.
double per_sample_accuracy(const IntentTrace& pred, const IntentTrace& truth);

/// Transitions of a trace: every sample whose state differs from its
/// predecessor.  The first sample is a starting condition, not an event.
/// Throws std::invalid_argument on an empty trace.
std::vector<IntentEvent> extract_events(const IntentTrace& trace);

/// Scores predicted intent changes against ground-truth ones.  A truth event
/// at t_g with new state S (next truth event at t_next, or one step past the
/// end of the trace) counts as correct when some predicted transition to S
/// happens at t_p within [t_g, t_g + window_ms], before t_next, and the
/// prediction then reads S at every timestamp in [t_p, t_next).  The before-
/// t_next requirement keeps the hold interval nonempty: a transition arriving
/// after the truth has already moved on predicted nothing.  Truth events are
/// taken in order and consume the earliest qualifying predicted transition;
/// no predicted transition is credited twice.  Requires aligned traces, like
/// per_sample_accuracy.
EventReport match_events(const IntentTrace& pred, const IntentTrace& truth, std::int64_t window_ms = 850);

/// Peak load-cell reading of each tendon excursion: one value per contiguous
/// stretch of telemetry away from the Extended rest phase, in time order.
std::vector<double> force_peaks(const std::vector<TelemetryRow>& telemetry);
std::vector<double> force_peaks(std::istream& telemetry_csv);

// Intent trace CSV: t_ms,state
void write_intent_trace(const IntentTrace& trace, std::ostream& out);
IntentTrace read_intent_trace(std::istream& in);

/// Two-column text table; event counts render in the "k/n" style.
std::string render_report(const EventReport& report);

// report CSV: metric,value rows; events CSV: one row per ground-truth event.
void write_report_csv(const EventReport& report, std::ostream& out);
void write_event_details_csv(const EventReport& report, std::ostream& out);

}  // namespace exo
