#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "exo/types.hpp"

namespace exo {

struct PidGains {
    double kp = 50.0;  // default is deliberately hot: the speed clamp governs
    double ki = 0.0;   // the whole stroke and the last fraction of a mm lands
    double kd = 0.0;   // in one step
};

struct DeviceParams {
    double travel_max_mm = 40.0;
    double v_max_mm_s = 15.0;            // motor speed ceiling
    double f_peak_n = 80.0;              // tendon force ceiling
    PidGains pid;
    int dt_ms = 20;                      // control period
    double hand_stiffness_n_per_mm = 1.5;  // wearer's flexor tone as a linear spring

    void validate() const;  // throws std::invalid_argument
};

struct DeviceStatus {
    double position_mm = 0.0;  // 0 = tendon fully extended, travel_max = fully retracted
    DevicePhase phase = DevicePhase::Extended;
    double force_n = 0.0;
    Command target = Command::Close;
};

/// One-degree-of-freedom exotendon drive.  A PID loop servos tendon position
/// toward the commanded end of travel; the commanded velocity is clamped to
/// v_max, so no step ever moves more than v_max * dt.  Retraction works
/// against the wearer's flexor tone, modeled as a linear spring read by a
/// series load cell; when spring force reaches f_peak the drive holds there
/// and cannot retract further.
class ExotendonSim {
public:
    explicit ExotendonSim(const DeviceParams& params);

    /// Advances one control period under `command` and returns the new status.
    DeviceStatus step(Command command);

    const DeviceStatus& status() const { return status_; }
    double load_cell() const { return status_.force_n; }
    const DeviceParams& params() const { return params_; }

private:
    DeviceParams params_;
    DeviceStatus status_;
    double integral_ = 0.0;
    double prev_error_ = 0.0;
    bool have_prev_error_ = false;
};

struct TelemetryRow {
    std::int64_t t_ms = 0;
    double position_mm = 0.0;
    DevicePhase phase = DevicePhase::Extended;
    double force_n = 0.0;
    Command command = Command::Close;

    bool operator==(const TelemetryRow&) const = default;
};

// Telemetry CSV: t_ms,position_mm,phase,force_n,command
void write_telemetry(const std::vector<TelemetryRow>& rows, std::ostream& out);
std::vector<TelemetryRow> read_telemetry(std::istream& in);

struct ButtonPress {
    Command command = Command::Open;
    std::int64_t duration_ms = 0;
};

/// Three full grasp-and-release cycles, the stand-in for manual button control.
std::vector<ButtonPress> default_button_schedule();

}  // namespace exo
