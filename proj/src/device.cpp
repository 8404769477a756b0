#include "exo/device.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "exo/csv.hpp"

namespace exo {

namespace {

// Position this close to an end of travel counts as being at rest there.
constexpr double kRestEpsMm = 1e-6;

constexpr std::string_view kTelemetryHeader = "t_ms,position_mm,phase,force_n,command";

}  // namespace

void DeviceParams::validate() const {
    if (!(travel_max_mm > 0.0)) throw std::invalid_argument("travel_max_mm must be > 0");
    if (!(v_max_mm_s > 0.0)) throw std::invalid_argument("v_max_mm_s must be > 0");
    if (!(f_peak_n > 0.0)) throw std::invalid_argument("f_peak_n must be > 0");
    if (dt_ms <= 0) throw std::invalid_argument("dt_ms must be > 0");
    if (hand_stiffness_n_per_mm < 0.0) throw std::invalid_argument("hand_stiffness_n_per_mm must be >= 0");
}

ExotendonSim::ExotendonSim(const DeviceParams& params) : params_(params) {
    params_.validate();
    // Fresh device: tendon extended, no spring load.
    status_.position_mm = 0.0;
    status_.phase = DevicePhase::Extended;
    status_.force_n = 0.0;
    status_.target = Command::Close;
}

DeviceStatus ExotendonSim::step(Command command) {
    const double dt = params_.dt_ms / 1000.0;
    const double setpoint = command == Command::Open ? params_.travel_max_mm : 0.0;

    const double error = setpoint - status_.position_mm;
    integral_ += error * dt;
    const double derivative = have_prev_error_ ? (error - prev_error_) / dt : 0.0;
    prev_error_ = error;
    have_prev_error_ = true;

    double v = params_.pid.kp * error + params_.pid.ki * integral_ + params_.pid.kd * derivative;
    v = std::clamp(v, -params_.v_max_mm_s, params_.v_max_mm_s);

    const double before = status_.position_mm;
    double pos = std::clamp(before + v * dt, 0.0, params_.travel_max_mm);

    // The spring force ceiling stalls retraction: positions that would load
    // the tendon past f_peak are unreachable.
    if (params_.hand_stiffness_n_per_mm > 0.0) {
        pos = std::min(pos, params_.f_peak_n / params_.hand_stiffness_n_per_mm);
    }

    status_.position_mm = pos;
    status_.force_n = std::min(params_.hand_stiffness_n_per_mm * pos, params_.f_peak_n);
    status_.target = command;

    if (pos <= kRestEpsMm) {
        status_.phase = DevicePhase::Extended;
    } else if (pos >= params_.travel_max_mm - kRestEpsMm) {
        status_.phase = DevicePhase::Retracted;
    } else {
        status_.phase = command == Command::Open ? DevicePhase::Retracting : DevicePhase::Extending;
    }
    return status_;
}

void write_telemetry(const std::vector<TelemetryRow>& rows, std::ostream& out) {
    out << kTelemetryHeader << '\n';
    for (const TelemetryRow& r : rows) {
        out << r.t_ms << ',' << csv::format_double(r.position_mm) << ',' << to_string(r.phase) << ','
            << csv::format_double(r.force_n) << ',' << to_string(r.command) << '\n';
    }
}

std::vector<TelemetryRow> read_telemetry(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kTelemetryHeader) {
        throw std::runtime_error("telemetry: malformed or missing header");
    }
    std::vector<TelemetryRow> rows;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto fields = csv::split_fields(line);
        if (fields.size() != 5) {
            throw std::runtime_error("telemetry row " + std::to_string(row) + ": expected 5 fields, got " +
                                     std::to_string(fields.size()));
        }
        try {
            TelemetryRow r;
            r.t_ms = csv::parse_int(fields[0]);
            r.position_mm = csv::parse_double(fields[1]);
            r.phase = phase_from_string(fields[2]);
            r.force_n = csv::parse_double(fields[3]);
            r.command = command_from_string(fields[4]);
            rows.push_back(r);
        } catch (const std::exception& e) {
            throw std::runtime_error("telemetry row " + std::to_string(row) + ": " + e.what());
        }
    }
    return rows;
}

std::vector<ButtonPress> default_button_schedule() {
    std::vector<ButtonPress> presses;
    for (int i = 0; i < 3; ++i) {
        presses.push_back({Command::Open, 3500});
        presses.push_back({Command::Close, 4500});
    }
    return presses;
}

}  // namespace exo
