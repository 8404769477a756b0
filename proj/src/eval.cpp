#include "exo/eval.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "exo/csv.hpp"

namespace exo {

namespace {

constexpr std::string_view kIntentHeader = "t_ms,state";

void check_aligned(const IntentTrace& pred, const IntentTrace& truth) {
    if (pred.empty() || truth.empty()) throw std::invalid_argument("intent traces must be nonempty");
    if (pred.size() != truth.size()) {
        throw std::invalid_argument("intent traces differ in length: " + std::to_string(pred.size()) +
                                    " vs " + std::to_string(truth.size()));
    }
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i].t_ms != truth[i].t_ms) {
            throw std::invalid_argument("intent traces disagree on timestamp at index " + std::to_string(i) +
                                        ": " + std::to_string(pred[i].t_ms) + "ms vs " +
                                        std::to_string(truth[i].t_ms) + "ms");
        }
    }
}

}  // namespace

double per_sample_accuracy(const IntentTrace& pred, const IntentTrace& truth) {
    check_aligned(pred, truth);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i].state == truth[i].state) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

std::vector<IntentEvent> extract_events(const IntentTrace& trace) {
    if (trace.empty()) throw std::invalid_argument("cannot extract events from an empty trace");
    std::vector<IntentEvent> events;
    for (std::size_t i = 1; i < trace.size(); ++i) {
        if (trace[i].state != trace[i - 1].state) events.push_back({trace[i].t_ms, trace[i].state});
    }
    return events;
}

EventReport match_events(const IntentTrace& pred, const IntentTrace& truth, std::int64_t window_ms) {
    check_aligned(pred, truth);
    if (window_ms < 0) throw std::invalid_argument("window_ms must be >= 0");

    const std::vector<IntentEvent> truth_events = extract_events(truth);
    const std::vector<IntentEvent> pred_events = extract_events(pred);

    EventReport report;
    report.total_events = static_cast<int>(truth_events.size());
    report.per_sample_accuracy = per_sample_accuracy(pred, truth);

    std::vector<bool> used(pred_events.size(), false);
    for (std::size_t k = 0; k < truth_events.size(); ++k) {
        const IntentEvent& ev = truth_events[k];
        const std::int64_t t_next = k + 1 < truth_events.size() ? truth_events[k + 1].t_ms
                                                                : truth.back().t_ms + 1;
        EventDetail detail;
        detail.truth_t_ms = ev.t_ms;
        detail.new_state = ev.new_state;

        for (std::size_t j = 0; j < pred_events.size(); ++j) {
            if (used[j] || pred_events[j].new_state != ev.new_state) continue;
            const std::int64_t t_p = pred_events[j].t_ms;
            if (t_p < ev.t_ms) continue;
            if (t_p > ev.t_ms + window_ms) break;  // pred events are time-ordered
            // A transition that lands after the next truth event predicted
            // nothing, even inside the window: the hold below would be
            // vacuously empty, so it is excluded outright.
            if (t_p >= t_next) break;
            // The prediction must hold the new state from t_p until the next
            // truth event; its own next transition ending the hold early
            // disqualifies it.
            const std::int64_t hold_until =
                j + 1 < pred_events.size() ? pred_events[j + 1].t_ms : std::numeric_limits<std::int64_t>::max();
            if (hold_until < t_next) continue;
            used[j] = true;
            detail.matched = true;
            detail.predicted_t_ms = t_p;
            ++report.correct_events;
            break;
        }
        report.event_details.push_back(detail);
    }
    return report;
}

std::vector<double> force_peaks(const std::vector<TelemetryRow>& telemetry) {
    std::vector<double> peaks;
    bool in_excursion = false;
    double peak = 0.0;
    for (const TelemetryRow& row : telemetry) {
        if (row.phase != DevicePhase::Extended) {
            peak = in_excursion ? std::max(peak, row.force_n) : row.force_n;
            in_excursion = true;
        } else if (in_excursion) {
            peaks.push_back(peak);
            in_excursion = false;
        }
    }
    if (in_excursion) peaks.push_back(peak);  // excursion still running at the end
    return peaks;
}

std::vector<double> force_peaks(std::istream& telemetry_csv) {
    return force_peaks(read_telemetry(telemetry_csv));
}

void write_intent_trace(const IntentTrace& trace, std::ostream& out) {
    out << kIntentHeader << '\n';
    for (const IntentSample& s : trace) out << s.t_ms << ',' << to_string(s.state) << '\n';
}

IntentTrace read_intent_trace(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kIntentHeader) {
        throw std::runtime_error("intent trace: malformed or missing header");
    }
    IntentTrace trace;
    std::size_t row = 1;
    std::int64_t prev = std::numeric_limits<std::int64_t>::min();
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto fields = csv::split_fields(line);
        if (fields.size() != 2) {
            throw std::runtime_error("intent trace row " + std::to_string(row) + ": expected 2 fields");
        }
        try {
            IntentSample s;
            s.t_ms = csv::parse_int(fields[0]);
            s.state = hand_state_from_string(fields[1]);
            if (s.t_ms <= prev) throw std::runtime_error("timestamps must be strictly increasing");
            prev = s.t_ms;
            trace.push_back(s);
        } catch (const std::exception& e) {
            throw std::runtime_error("intent trace row " + std::to_string(row) + ": " + e.what());
        }
    }
    return trace;
}

std::string render_report(const EventReport& report) {
    std::ostringstream out;
    out << std::left << std::setw(24) << "per-sample accuracy" << std::fixed << std::setprecision(1)
        << report.per_sample_accuracy * 100.0 << "%\n";
    out << std::left << std::setw(24) << "correct events" << report.correct_events << '/'
        << report.total_events << '\n';
    return out.str();
}

void write_report_csv(const EventReport& report, std::ostream& out) {
    out << "metric,value\n";
    out << "per_sample_accuracy," << csv::format_double(report.per_sample_accuracy) << '\n';
    out << "total_events," << report.total_events << '\n';
    out << "correct_events," << report.correct_events << '\n';
}

void write_event_details_csv(const EventReport& report, std::ostream& out) {
    out << "truth_t_ms,new_state,matched,predicted_t_ms\n";
    for (const EventDetail& d : report.event_details) {
        out << d.truth_t_ms << ',' << to_string(d.new_state) << ',' << (d.matched ? "1" : "0") << ',';
        if (d.predicted_t_ms) out << *d.predicted_t_ms;
        out << '\n';
    }
}

}  // namespace exo
