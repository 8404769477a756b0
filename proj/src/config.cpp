#include "exo/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "exo/csv.hpp"

namespace exo {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_words(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

[[noreturn]] void line_error(std::size_t line_no, const std::string& what) {
    throw std::runtime_error("config line " + std::to_string(line_no) + ": " + what);
}

std::uint64_t parse_u64(std::string_view s) {
    const std::int64_t v = csv::parse_int(s);
    if (v < 0) throw std::invalid_argument("value must be >= 0");
    return static_cast<std::uint64_t>(v);
}

CueStep parse_cue(const std::vector<std::string_view>& words) {
    if (words.size() != 2 && words.size() != 3) {
        throw std::invalid_argument("cue needs '<instruction> <duration_ms> [<device_command>]'");
    }
    CueStep cue;
    cue.instruction = instruction_from_string(words[0]);
    cue.duration_ms = csv::parse_int(words[1]);
    if (words.size() == 3) cue.device_command = command_from_string(words[2]);
    return cue;
}

ButtonPress parse_press(const std::vector<std::string_view>& words) {
    if (words.size() != 2) throw std::invalid_argument("press needs '<command> <duration_ms>'");
    ButtonPress press;
    press.command = command_from_string(words[0]);
    press.duration_ms = csv::parse_int(words[1]);
    return press;
}

}  // namespace

void RunConfig::validate() const {
    if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
        throw std::invalid_argument("sample_rate_hz must be positive");
    }
    forest.validate();
    pipeline.validate();
    device.validate();
    profile_by_name(profile);  // throws on unknown names
    if (separability && (!std::isfinite(*separability) || *separability < 0.0)) {
        throw std::invalid_argument("separability override must be >= 0");
    }
    if (noise_sd && (!std::isfinite(*noise_sd) || *noise_sd < 0.0)) {
        throw std::invalid_argument("noise_sd override must be >= 0");
    }
    if (reaction_ms && *reaction_ms < 0) throw std::invalid_argument("reaction_ms override must be >= 0");

    const double period_ms = 1000.0 / sample_rate_hz;
    const double steps = period_ms / device.dt_ms;
    if (std::abs(steps - std::round(steps)) > 1e-9 || steps < 1.0 - 1e-9) {
        throw std::invalid_argument("device dt_ms must divide the frame period (" +
                                    std::to_string(period_ms) + "ms) evenly");
    }
}

SubjectProfile RunConfig::make_profile(std::uint64_t subject_seed) const {
    SubjectProfile p = profile_by_name(profile);
    if (separability) p.separability = *separability;
    if (noise_sd) p.noise_sd.fill(*noise_sd);
    if (reaction_ms) p.reaction_ms = *reaction_ms;
    p.rng_seed = subject_seed;
    return p;
}

RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    std::string section;
    std::string line;
    std::size_t line_no = 0;

    // Schedule sections replace the defaults entirely, so track what was seen.
    std::vector<CueStep> train_cues, test_cues;
    std::vector<ButtonPress> presses;
    int train_repeat = 1, test_repeat = 1;
    bool saw_train = false, saw_test = false, saw_button = false;

    while (std::getline(in, line)) {
        ++line_no;
        std::string_view s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        if (s.front() == '[') {
            if (s.back() != ']') line_error(line_no, "unterminated section header");
            section = std::string(trim(s.substr(1, s.size() - 2)));
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string_view::npos) line_error(line_no, "expected 'key = value'");
        const std::string key{trim(s.substr(0, eq))};
        const std::string_view value = trim(s.substr(eq + 1));
        if (key.empty() || value.empty()) line_error(line_no, "expected 'key = value'");

        try {
            if (section == "session") {
                if (key == "sample_rate_hz") cfg.sample_rate_hz = csv::parse_double(value);
                else if (key == "seed") cfg.seed = parse_u64(value);
                else if (key == "out_dir") cfg.out_dir = std::string(value);
                else line_error(line_no, "unknown key '" + key + "' in [session]");
            } else if (section == "forest") {
                if (key == "n_trees") cfg.forest.n_trees = static_cast<int>(csv::parse_int(value));
                else if (key == "max_depth") cfg.forest.max_depth = static_cast<int>(csv::parse_int(value));
                else if (key == "features_per_split") cfg.forest.features_per_split = static_cast<int>(csv::parse_int(value));
                else if (key == "min_samples_leaf") cfg.forest.min_samples_leaf = static_cast<int>(csv::parse_int(value));
                else line_error(line_no, "unknown key '" + key + "' in [forest]");
            } else if (section == "pipeline") {
                if (key == "window_ms") cfg.pipeline.window_ms = csv::parse_int(value);
                else if (key == "open_threshold") cfg.pipeline.open_threshold = csv::parse_double(value);
                else if (key == "close_threshold") cfg.pipeline.close_threshold = csv::parse_double(value);
                else if (key == "initial_command") cfg.pipeline.initial_command = command_from_string(value);
                else line_error(line_no, "unknown key '" + key + "' in [pipeline]");
            } else if (section == "device") {
                if (key == "travel_max_mm") cfg.device.travel_max_mm = csv::parse_double(value);
                else if (key == "v_max_mm_s") cfg.device.v_max_mm_s = csv::parse_double(value);
                else if (key == "f_peak_n") cfg.device.f_peak_n = csv::parse_double(value);
                else if (key == "kp") cfg.device.pid.kp = csv::parse_double(value);
                else if (key == "ki") cfg.device.pid.ki = csv::parse_double(value);
                else if (key == "kd") cfg.device.pid.kd = csv::parse_double(value);
                else if (key == "dt_ms") cfg.device.dt_ms = static_cast<int>(csv::parse_int(value));
                else if (key == "hand_stiffness_n_per_mm") cfg.device.hand_stiffness_n_per_mm = csv::parse_double(value);
                else line_error(line_no, "unknown key '" + key + "' in [device]");
            } else if (section == "subject") {
                if (key == "profile") cfg.profile = std::string(value);
                else if (key == "separability") cfg.separability = csv::parse_double(value);
                else if (key == "noise_sd") cfg.noise_sd = csv::parse_double(value);
                else if (key == "reaction_ms") cfg.reaction_ms = static_cast<int>(csv::parse_int(value));
                else line_error(line_no, "unknown key '" + key + "' in [subject]");
            } else if (section == "train_schedule") {
                saw_train = true;
                if (key == "cue") train_cues.push_back(parse_cue(split_words(value)));
                else if (key == "repeat") train_repeat = static_cast<int>(csv::parse_int(value));
                else line_error(line_no, "unknown key '" + key + "' in [train_schedule]");
            } else if (section == "test_schedule") {
                saw_test = true;
                if (key == "cue") test_cues.push_back(parse_cue(split_words(value)));
                else if (key == "repeat") test_repeat = static_cast<int>(csv::parse_int(value));
                else line_error(line_no, "unknown key '" + key + "' in [test_schedule]");
            } else if (section == "button_schedule") {
                saw_button = true;
                if (key == "press") presses.push_back(parse_press(split_words(value)));
                else line_error(line_no, "unknown key '" + key + "' in [button_schedule]");
            } else if (section.empty()) {
                line_error(line_no, "key '" + key + "' appears before any [section]");
            } else {
                line_error(line_no, "unknown section [" + section + "]");
            }
        } catch (const std::runtime_error&) {
            throw;  // already positioned
        } catch (const std::exception& e) {
            line_error(line_no, e.what());
        }
    }

    if (saw_train) {
        if (train_cues.empty()) throw std::runtime_error("[train_schedule] lists no cues");
        cfg.train_schedule = repeat_schedule(train_cues, train_repeat);
    }
    if (saw_test) {
        if (test_cues.empty()) throw std::runtime_error("[test_schedule] lists no cues");
        cfg.test_schedule = repeat_schedule(test_cues, test_repeat);
    }
    if (saw_button) cfg.button_schedule = presses;

    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    return parse_config(in);
}

}  // namespace exo
