#include "exo/subject.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace exo {

namespace {

constexpr std::size_t kPhases = 4;
constexpr std::size_t kInstructions = 3;

void check_finite(const ChannelVector& v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + " has a non-finite entry");
    }
}

ChannelVector add(const ChannelVector& a, const ChannelVector& b) {
    ChannelVector out{};
    for (std::size_t c = 0; c < kNumChannels; ++c) out[c] = a[c] + b[c];
    return out;
}

// Base intent patterns and the per-phase modulation the device interaction
// adds on top.  The numbers are arbitrary but keep three properties: the
// intents are far apart, every phase variant of one intent stays close to its
// base, and nothing comes near the clipping range at default settings.
constexpr ChannelVector kOpenPattern = {30, 26, 18, 10, 2, 2, 4, 6};     // dorsal extensors
constexpr ChannelVector kClosePattern = {2, 4, 6, 10, 26, 30, 24, 18};   // volar flexors
constexpr ChannelVector kRelaxPattern = {2, 2, 2, 2, 3, 3, 3, 3};

constexpr ChannelVector kPhaseDelta[kPhases] = {
    {0, 0, 0, 0, 0, 0, 0, 0},  // Extended
    {3, 2, 1, 0, 2, 3, 2, 1},  // Retracting
    {5, 4, 2, 1, 4, 6, 4, 2},  // Retracted: stretch response while held open
    {2, 1, 1, 0, 1, 2, 1, 1},  // Extending
};

SubjectProfile base_profile() {
    SubjectProfile p;
    p.spastic_baseline = {12, 10, 8, 6, 8, 10, 12, 14};
    p.noise_sd.fill(3.0);
    const ChannelVector* intents[kInstructions] = {&kOpenPattern, &kRelaxPattern, &kClosePattern};
    for (std::size_t i = 0; i < kInstructions; ++i) {
        for (std::size_t ph = 0; ph < kPhases; ++ph) {
            p.mean_activation[i][ph] = add(*intents[i], kPhaseDelta[ph]);
        }
    }
    return p;
}

}  // namespace

ChannelVector& SubjectProfile::mean(Instruction i, DevicePhase p) {
    return mean_activation[static_cast<std::size_t>(i)][static_cast<std::size_t>(p)];
}

const ChannelVector& SubjectProfile::mean(Instruction i, DevicePhase p) const {
    return mean_activation[static_cast<std::size_t>(i)][static_cast<std::size_t>(p)];
}

void SubjectProfile::validate() const {
    for (const auto& per_instruction : mean_activation) {
        for (const ChannelVector& m : per_instruction) check_finite(m, "mean_activation");
    }
    check_finite(noise_sd, "noise_sd");
    check_finite(spastic_baseline, "spastic_baseline");
    check_finite(coactivation_shift, "coactivation_shift");
    for (double sd : noise_sd) {
        if (sd < 0.0) throw std::invalid_argument("noise_sd must be >= 0");
    }
    if (!std::isfinite(separability) || separability < 0.0) {
        throw std::invalid_argument("separability must be >= 0");
    }
    if (reaction_ms < 0) throw std::invalid_argument("reaction_ms must be >= 0");
}

SyntheticSubject::SyntheticSubject(const SubjectProfile& profile)
    : profile_(profile), rng_(profile.rng_seed) {
    profile_.validate();
    // Sessions start with the subject at rest.
    cue_t_ms_ = std::numeric_limits<std::int64_t>::min() / 2;
}

EmgFrame SyntheticSubject::generate(Instruction cue, DevicePhase phase, std::int64_t t_ms) {
    if (cue != cued_) {
        cued_ = cue;
        cue_t_ms_ = t_ms;
    }
    if (active_ != cued_ && t_ms - cue_t_ms_ >= profile_.reaction_ms) {
        active_ = cued_;
    }

    const ChannelVector& mean = profile_.mean(active_, phase);
    EmgFrame frame;
    frame.t_ms = t_ms;
    for (std::size_t c = 0; c < kNumChannels; ++c) {
        double v = profile_.spastic_baseline[c] + profile_.separability * mean[c];
        if (arm_engaged_) v += profile_.coactivation_shift[c];
        v += rng_.gaussian(0.0, profile_.noise_sd[c]);
        frame.channels[c] = std::clamp(v, kEmgMin, kEmgMax);
    }
    return frame;
}

SubjectProfile separable_profile() {
    SubjectProfile p = base_profile();
    p.name = "separable";
    p.separability = 1.0;
    return p;
}

SubjectProfile overlapping_profile() {
    SubjectProfile p = base_profile();
    p.name = "overlapping";
    p.separability = 0.12;  // shrinks class distance to about the noise floor
    return p;
}

SubjectProfile coactivating_profile() {
    SubjectProfile p = base_profile();
    p.name = "coactivating";
    p.separability = 1.0;
    // Engaged-arm crosstalk pushes every frame toward the open pattern — at
    // relax the classifier input then looks like intent it never was.
    for (std::size_t c = 0; c < kNumChannels; ++c) {
        p.coactivation_shift[c] = kOpenPattern[c] - kRelaxPattern[c];
    }
    return p;
}

std::map<std::string, SubjectProfile> default_profiles() {
    std::map<std::string, SubjectProfile> out;
    out["separable"] = separable_profile();
    out["overlapping"] = overlapping_profile();
    out["coactivating"] = coactivating_profile();
    return out;
}

SubjectProfile profile_by_name(std::string_view name) {
    if (name == "separable") return separable_profile();
    if (name == "overlapping") return overlapping_profile();
    if (name == "coactivating") return coactivating_profile();
    throw std::invalid_argument("unknown subject profile '" + std::string(name) +
                                "' (expected separable, overlapping, or coactivating)");
}

}  // namespace exo
