#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "exo/rng.hpp"
#include "exo/types.hpp"

namespace exo {

using ChannelVector = std::array<double, kNumChannels>;

/// Statistical description of one simulated wearer.  A frame generated for
/// (instruction, phase) is
///
///   baseline + separability * mean(instruction, phase)
///            + coactivation_shift (only while the arm is engaged)
///            + N(0, noise_sd)        per channel, clipped to [-128, 127].
///
/// The per-phase means matter: wearing the device alters the pattern a given
/// intent produces, so e.g. mean(Open, Extended) != mean(Open, Retracted).
struct SubjectProfile {
    std::string name = "custom";
    std::array<std::array<ChannelVector, 4>, 3> mean_activation{};  // [instruction][phase]
    ChannelVector noise_sd{};
    ChannelVector spastic_baseline{};   // involuntary tone, present even at relax
    ChannelVector coactivation_shift{};  // proximal-arm crosstalk during functional use
    double separability = 1.0;
    int reaction_ms = 200;  // lag between hearing a cue and the EMG changing
    std::uint64_t rng_seed = 0;

    ChannelVector& mean(Instruction i, DevicePhase p);
    const ChannelVector& mean(Instruction i, DevicePhase p) const;

    /// Throws std::invalid_argument on non-finite entries or bad scalars.
    void validate() const;
};

/// Clipping range of the simulated armband's signed 8-bit samples.
inline constexpr double kEmgMin = -128.0;
inline constexpr double kEmgMax = 127.0;

/// Draws EMG frames for a cued instruction and the current device phase.
/// Cue changes take effect only after the profile's reaction latency; phase
/// changes act immediately (they are mechanical, not volitional).  Output is
/// deterministic given the profile seed and the call sequence.
class SyntheticSubject {
public:
    explicit SyntheticSubject(const SubjectProfile& profile);

    EmgFrame generate(Instruction cue, DevicePhase phase, std::int64_t t_ms);

    void set_arm_engaged(bool engaged) { arm_engaged_ = engaged; }
    bool arm_engaged() const { return arm_engaged_; }
    const SubjectProfile& profile() const { return profile_; }

private:
    SubjectProfile profile_;
    Rng rng_;
    Instruction cued_ = Instruction::Relax;    // most recent cue heard
    Instruction active_ = Instruction::Relax;  // what the muscles are doing
    std::int64_t cue_t_ms_ = 0;
    bool arm_engaged_ = false;
};

// Stock profiles:
//   separable   - intent patterns far apart relative to noise
//   overlapping - the same patterns scaled down until they blur together
//   coactivating - separable at rest, but functional arm use shifts relax
//                  frames toward the open pattern
SubjectProfile separable_profile();
SubjectProfile overlapping_profile();
SubjectProfile coactivating_profile();

std::map<std::string, SubjectProfile> default_profiles();

/// Lookup by name; throws std::invalid_argument for unknown names.
SubjectProfile profile_by_name(std::string_view name);

}  // namespace exo
