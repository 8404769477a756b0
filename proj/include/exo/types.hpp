#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace exo {

inline constexpr std::size_t kNumChannels = 8;

/// Hand intent decoded from forearm EMG: the wearer wants the hand open or closed.
enum class HandState : std::uint8_t { Open, Close };

/// Verbal cue given to the subject during a session.
enum class Instruction : std::uint8_t { Open, Relax, Close };

/// Where the exotendon is along its travel.  Extended and Retracted are the
/// rest states (hand free to flex / hand held open); Retracting and Extending
/// are the transit states in between.
enum class DevicePhase : std::uint8_t { Extended, Retracting, Retracted, Extending };

/// Motor command.  Open retracts the tendon so the hand extends; Close pays
/// the tendon out so the hand can flex.
enum class Command : std::uint8_t { Open, Close };

/// One raw EMG sample: a timestamp plus the eight armband channels.
struct EmgFrame {
    std::int64_t t_ms = 0;
    std::array<double, kNumChannels> channels{};

    bool operator==(const EmgFrame&) const = default;
};

HandState to_hand_state(Command c);
Command to_command(HandState s);

std::string_view to_string(HandState s);
std::string_view to_string(Instruction i);
std::string_view to_string(DevicePhase p);
std::string_view to_string(Command c);

HandState hand_state_from_string(std::string_view s);
Instruction instruction_from_string(std::string_view s);
DevicePhase phase_from_string(std::string_view s);
Command command_from_string(std::string_view s);

/// Throws std::invalid_argument unless t_ms >= 0 and every channel is finite.
void validate_frame(const EmgFrame& frame);

}  // namespace exo
