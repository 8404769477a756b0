#include "exo/types.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace exo {

HandState to_hand_state(Command c) {
    return c == Command::Open ? HandState::Open : HandState::Close;
}

Command to_command(HandState s) {
    return s == HandState::Open ? Command::Open : Command::Close;
}

std::string_view to_string(HandState s) {
    return s == HandState::Open ? "open" : "close";
}

std::string_view to_string(Instruction i) {
    switch (i) {
        case Instruction::Open: return "open";
        case Instruction::Relax: return "relax";
        case Instruction::Close: return "close";
    }
    return "?";
}

std::string_view to_string(DevicePhase p) {
    switch (p) {
        case DevicePhase::Extended: return "extended";
        case DevicePhase::Retracting: return "retracting";
        case DevicePhase::Retracted: return "retracted";
        case DevicePhase::Extending: return "extending";
    }
    return "?";
}

std::string_view to_string(Command c) {
    return c == Command::Open ? "open" : "close";
}

namespace {

[[noreturn]] void bad_token(const char* kind, std::string_view s) {
    throw std::invalid_argument(std::string("unknown ") + kind + ": '" + std::string(s) + "'");
}

}  // namespace

HandState hand_state_from_string(std::string_view s) {
    if (s == "open") return HandState::Open;
    if (s == "close") return HandState::Close;
    bad_token("hand state", s);
}

Instruction instruction_from_string(std::string_view s) {
    if (s == "open") return Instruction::Open;
    if (s == "relax") return Instruction::Relax;
    if (s == "close") return Instruction::Close;
    bad_token("instruction", s);
}

DevicePhase phase_from_string(std::string_view s) {
    if (s == "extended") return DevicePhase::Extended;
    if (s == "retracting") return DevicePhase::Retracting;
    if (s == "retracted") return DevicePhase::Retracted;
    if (s == "extending") return DevicePhase::Extending;
    bad_token("device phase", s);
}

Command command_from_string(std::string_view s) {
    if (s == "open") return Command::Open;
    if (s == "close") return Command::Close;
    bad_token("command", s);
}

void validate_frame(const EmgFrame& frame) {
    if (frame.t_ms < 0) {
        throw std::invalid_argument("frame timestamp must be >= 0, got " + std::to_string(frame.t_ms));
    }
    for (std::size_t c = 0; c < kNumChannels; ++c) {
        if (!std::isfinite(frame.channels[c])) {
            throw std::invalid_argument("frame at t=" + std::to_string(frame.t_ms) + "ms has non-finite channel " +
                                        std::to_string(c + 1));
        }
    }
}

}  // namespace exo
