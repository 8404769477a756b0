#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "exo/device.hpp"
#include "exo/forest.hpp"
#include "exo/pipeline.hpp"
#include "exo/subject.hpp"
#include "exo/trainer.hpp"

namespace exo {

/// Everything a toolchain invocation needs, with working defaults for all of
/// it.  Loadable from a flat sectioned key/value file (see parse_config).
struct RunConfig {
    double sample_rate_hz = 50.0;
    std::uint64_t seed = 1;
    std::string out_dir = "out";

    ForestHyperparams forest;   // rng_seed here is ignored; it is derived from `seed`
    PipelineConfig pipeline;
    DeviceParams device;

    std::string profile = "separable";
    std::optional<double> separability;  // profile overrides
    std::optional<double> noise_sd;
    std::optional<int> reaction_ms;

    std::vector<CueStep> train_schedule = default_training_schedule();
    std::vector<CueStep> test_schedule = default_test_schedule();
    std::vector<ButtonPress> button_schedule = default_button_schedule();

    /// Throws std::invalid_argument on out-of-range values, including a
    /// device period that does not divide the frame period.
    void validate() const;

    /// The configured subject profile with overrides and seed applied.
    SubjectProfile make_profile(std::uint64_t subject_seed) const;
};

// Config file format: '#' comments, [section] headers, key = value lines.
// Sections: [session], [forest], [pipeline], [device], [subject],
// [train_schedule], [test_schedule], [button_schedule].  Schedule sections
// take repeated `cue = <instruction> <duration_ms> [<device_command>]` lines
// (press = <command> <duration_ms> for buttons) plus an optional
// `repeat = N`, and replace the built-in schedule wholesale.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

}  // namespace exo
