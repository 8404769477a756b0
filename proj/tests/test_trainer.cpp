#include <algorithm>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "exo/device.hpp"
#include "exo/rng.hpp"
#include "exo/subject.hpp"
#include "exo/trainer.hpp"

using namespace exo;

namespace {

SubjectSource make_source(SyntheticSubject& subject) {
    return [&subject](Instruction cue, DevicePhase phase, std::int64_t t) {
        return subject.generate(cue, phase, t);
    };
}

SyntheticSubject make_subject(std::uint64_t seed) {
    SubjectProfile profile = separable_profile();
    profile.rng_seed = seed;
    return SyntheticSubject(profile);
}

bool has_label(const std::vector<LabeledSample>& samples, HandState s) {
    return std::any_of(samples.begin(), samples.end(),
                       [s](const LabeledSample& x) { return x.label == s; });
}

}  // namespace

TEST_CASE("labels cover the full instruction/phase grid") {
    const DevicePhase rest[] = {DevicePhase::Extended, DevicePhase::Retracted};
    const DevicePhase transit[] = {DevicePhase::Retracting, DevicePhase::Extending};

    for (DevicePhase p : rest) {
        CHECK(label_for(Instruction::Open, p) == HandState::Open);
        CHECK(label_for(Instruction::Close, p) == HandState::Close);
        CHECK(label_for(Instruction::Relax, p) == HandState::Close);
    }
    for (DevicePhase p : transit) {
        CHECK(label_for(Instruction::Open, p) == HandState::Open);
        CHECK(label_for(Instruction::Close, p) == HandState::Close);
        CHECK(label_for(Instruction::Relax, p) == std::nullopt);
    }
}

TEST_CASE("default 45s protocol yields 2250 frames with both classes") {
    SyntheticSubject subject = make_subject(1);
    ExotendonSim device{DeviceParams{}};
    ProtocolRun run = run_protocol_session(make_source(subject), device, default_training_schedule());

    CHECK(run.session.frames.size() == 2250);
    CHECK(run.session.annotations.size() == 2250);
    CHECK(run.session.frames.front().t_ms == 0);
    CHECK(run.session.frames.back().t_ms == 44980);

    CHECK(has_label(run.samples, HandState::Open));
    CHECK(has_label(run.samples, HandState::Close));
    // The stock protocol parks every relax cue at an end of travel (each cue
    // outlasts the 2.7s stroke), so no frame lands on relax-in-transit and
    // every row stays usable.
    CHECK(run.samples.size() == run.session.frames.size());
    for (const LabeledSample& s : run.samples) {
        REQUIRE(s.label.has_value());
        const bool transit = s.phase == DevicePhase::Retracting || s.phase == DevicePhase::Extending;
        CHECK(!(s.instruction == Instruction::Relax && transit));
    }
}

TEST_CASE("session rows agree with the labeling rule frame by frame") {
    SyntheticSubject subject = make_subject(2);
    ExotendonSim device{DeviceParams{}};
    ProtocolRun run = run_protocol_session(make_source(subject), device, default_training_schedule());

    std::size_t usable = 0;
    for (std::size_t i = 0; i < run.session.frames.size(); ++i) {
        const FrameAnnotation& a = run.session.annotations[i];
        CHECK(a.label == label_for(a.instruction, a.device_state));
        if (a.label) {
            REQUIRE(usable < run.samples.size());
            CHECK(run.samples[usable].frame == run.session.frames[i]);
            CHECK(run.samples[usable].label == a.label);
            ++usable;
        }
    }
    CHECK(usable == run.samples.size());
}

TEST_CASE("a lone relax cue at rest labels everything close") {
    SyntheticSubject subject = make_subject(3);
    ExotendonSim device{DeviceParams{}};
    std::vector<CueStep> schedule = {{Instruction::Relax, 1000, Command::Close}};
    std::vector<LabeledSample> samples = run_protocol(make_source(subject), device, schedule);

    CHECK(samples.size() == 50);
    for (const LabeledSample& s : samples) {
        CHECK(s.label == HandState::Close);
        CHECK(s.phase == DevicePhase::Extended);
    }
}

TEST_CASE("labels flip on the exact frame the device reaches a rest phase") {
    SyntheticSubject subject = make_subject(4);
    ExotendonSim device{DeviceParams{}};
    // Retraction starts 1s in and takes ~2.7s, so the relax cue begins mid
    // stroke: its rows are discarded until the device reports Retracted.
    std::vector<CueStep> schedule = {
        {Instruction::Open, 1000, Command::Open},
        {Instruction::Relax, 4000, Command::Open},
    };
    ProtocolRun run = run_protocol_session(make_source(subject), device, schedule);

    bool seen_retracted = false;
    for (std::size_t i = 0; i < run.session.frames.size(); ++i) {
        const FrameAnnotation& a = run.session.annotations[i];
        if (a.instruction != Instruction::Relax) continue;
        if (a.device_state == DevicePhase::Retracted) seen_retracted = true;
        if (!seen_retracted) {
            CHECK(a.device_state == DevicePhase::Retracting);
            CHECK(!a.label.has_value());
        } else {
            CHECK(a.device_state == DevicePhase::Retracted);
            CHECK(a.label == HandState::Close);
        }
    }
    CHECK(seen_retracted);
}

TEST_CASE("device-less runs label straight from the cue") {
    SUBCASE("alternating open/close cues alternate labels") {
        SyntheticSubject subject = make_subject(5);
        std::vector<CueStep> schedule = {
            {Instruction::Open, 100, Command::Close},
            {Instruction::Close, 100, Command::Close},
            {Instruction::Open, 100, Command::Close},
        };
        std::vector<LabeledSample> samples = run_nofunction_protocol(make_source(subject), schedule);
        REQUIRE(samples.size() == 15);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const HandState want = (i / 5) % 2 == 0 ? HandState::Open : HandState::Close;
            CHECK(samples[i].label == want);
            CHECK(samples[i].phase == DevicePhase::Extended);
        }
    }

    SUBCASE("an all-relax schedule is all close") {
        SyntheticSubject subject = make_subject(6);
        std::vector<CueStep> schedule = {{Instruction::Relax, 400, Command::Close},
                                         {Instruction::Relax, 400, Command::Close}};
        std::vector<LabeledSample> samples = run_nofunction_protocol(make_source(subject), schedule);
        REQUIRE(samples.size() == 40);
        for (const LabeledSample& s : samples) CHECK(s.label == HandState::Close);
    }
}

TEST_CASE("same subject seed reproduces the identical dataset") {
    const std::vector<CueStep> schedule = default_training_schedule();

    SyntheticSubject s1 = make_subject(7);
    ExotendonSim d1{DeviceParams{}};
    ProtocolRun a = run_protocol_session(make_source(s1), d1, schedule);

    SyntheticSubject s2 = make_subject(7);
    ExotendonSim d2{DeviceParams{}};
    ProtocolRun b = run_protocol_session(make_source(s2), d2, schedule);

    CHECK(a.session == b.session);

    SyntheticSubject s3 = make_subject(7);
    SyntheticSubject s4 = make_subject(7);
    CHECK(run_nofunction_session(make_source(s3), schedule).session ==
          run_nofunction_session(make_source(s4), schedule).session);
}

TEST_CASE("bad schedules are rejected") {
    SyntheticSubject subject = make_subject(8);
    ExotendonSim device{DeviceParams{}};

    std::vector<CueStep> empty;
    CHECK_THROWS_AS(run_protocol(make_source(subject), device, empty), std::invalid_argument);
    CHECK_THROWS_AS(run_nofunction_protocol(make_source(subject), empty), std::invalid_argument);

    std::vector<CueStep> zero = {{Instruction::Open, 0, Command::Open}};
    CHECK_THROWS_AS(run_protocol(make_source(subject), device, zero), std::invalid_argument);

    std::vector<CueStep> negative = {{Instruction::Open, -100, Command::Open}};
    CHECK_THROWS_AS(run_protocol(make_source(subject), device, negative), std::invalid_argument);

    std::vector<CueStep> ok = {{Instruction::Open, 100, Command::Open}};
    CHECK_THROWS_AS(run_protocol(make_source(subject), device, ok, 0.0), std::invalid_argument);
}

TEST_CASE("any schedule pairing open with another long cue trains both classes") {
    // Cues are long enough (3s) for a full stroke, so relax cues always end at
    // a rest phase and contribute close labels no matter where they land.
    Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<CueStep> schedule;
        const int n = 3 + static_cast<int>(rng.next_below(5));
        for (int i = 0; i < n; ++i) {
            CueStep cue;
            const auto pick = rng.next_below(3);
            cue.instruction = pick == 0   ? Instruction::Open
                              : pick == 1 ? Instruction::Relax
                                          : Instruction::Close;
            cue.duration_ms = 3000 + static_cast<std::int64_t>(rng.next_below(1000));
            cue.device_command = cue.instruction == Instruction::Open ? Command::Open : Command::Close;
            schedule.push_back(cue);
        }
        schedule[0].instruction = Instruction::Open;
        schedule[0].device_command = Command::Open;
        schedule[1].instruction = rng.next_below(2) == 0 ? Instruction::Relax : Instruction::Close;
        schedule[1].device_command = Command::Close;

        SyntheticSubject subject = make_subject(100 + static_cast<std::uint64_t>(trial));
        ExotendonSim device{DeviceParams{}};
        std::vector<LabeledSample> samples = run_protocol(make_source(subject), device, schedule);
        CHECK(has_label(samples, HandState::Open));
        CHECK(has_label(samples, HandState::Close));
    }
}

TEST_CASE("default schedules have the documented shape") {
    const std::vector<CueStep> cycle = default_training_cycle();
    std::int64_t cycle_ms = 0;
    for (const CueStep& cue : cycle) cycle_ms += cue.duration_ms;
    CHECK(cycle_ms == 22500);

    const std::vector<CueStep> train = default_training_schedule();
    CHECK(train.size() == 2 * cycle.size());

    const std::vector<CueStep> test = default_test_schedule();
    std::int64_t test_ms = 0;
    for (const CueStep& cue : test) test_ms += cue.duration_ms;
    CHECK(test_ms == 60000);
    // Relax/open alternation gives four intent changes to score.
    int changes = 0;
    for (std::size_t i = 1; i < test.size(); ++i)
        changes += test[i].instruction != test[i - 1].instruction;
    CHECK(changes == 4);

    CHECK_THROWS_AS(repeat_schedule(cycle, 0), std::invalid_argument);
}

TEST_CASE("to_training_set keeps labeled frames in order") {
    SyntheticSubject subject = make_subject(9);
    ExotendonSim device{DeviceParams{}};
    std::vector<LabeledSample> samples =
        run_protocol(make_source(subject), device, default_training_schedule());
    TrainingSet set = to_training_set(samples);

    REQUIRE(set.size() == samples.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        CHECK(set[i].first == samples[i].frame);
        CHECK(set[i].second == *samples[i].label);
    }
}
