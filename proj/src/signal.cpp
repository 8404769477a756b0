#include "exo/signal.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "exo/csv.hpp"

namespace exo {

namespace {

constexpr std::string_view kHeader = "t_ms,e1,e2,e3,e4,e5,e6,e7,e8,instruction,device_state,label";
constexpr std::string_view kRatePrefix = "# sample_rate_hz=";

[[noreturn]] void row_error(std::size_t row, const std::string& what) {
    throw std::runtime_error("session row " + std::to_string(row) + ": " + what);
}

}  // namespace

void SessionRecording::validate() const {
    if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
        throw std::invalid_argument("sample_rate_hz must be a positive finite value");
    }
    if (!annotations.empty() && annotations.size() != frames.size()) {
        throw std::invalid_argument("annotation count (" + std::to_string(annotations.size()) +
                                    ") does not match frame count (" + std::to_string(frames.size()) + ")");
    }
    std::int64_t prev = -1;
    for (const EmgFrame& f : frames) {
        validate_frame(f);
        if (f.t_ms <= prev) {
            throw std::invalid_argument("timestamps must be strictly increasing; " + std::to_string(f.t_ms) +
                                        "ms follows " + std::to_string(prev) + "ms");
        }
        prev = f.t_ms;
    }
}

void write_session(const SessionRecording& rec, std::ostream& out) {
    rec.validate();
    out << kRatePrefix << csv::format_double(rec.sample_rate_hz) << '\n';
    out << kHeader << '\n';
    for (std::size_t i = 0; i < rec.frames.size(); ++i) {
        const EmgFrame& f = rec.frames[i];
        out << f.t_ms;
        for (double v : f.channels) out << ',' << csv::format_double(v);
        if (rec.annotated()) {
            const FrameAnnotation& a = rec.annotations[i];
            out << ',' << to_string(a.instruction) << ',' << to_string(a.device_state) << ',';
            if (a.label) out << to_string(*a.label);
        } else {
            out << ",,,";
        }
        out << '\n';
    }
}

void write_session_file(const SessionRecording& rec, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_session(rec, out);
    out.flush();
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

SessionRecording read_session(std::istream& in) {
    SessionRecording rec;
    std::string line;
    std::size_t row = 0;  // 1-based physical line number, metadata and header included

    if (!std::getline(in, line)) throw std::runtime_error("session file is empty");
    ++row;
    if (line.starts_with(kRatePrefix)) {
        try {
            rec.sample_rate_hz = csv::parse_double(std::string_view(line).substr(kRatePrefix.size()));
        } catch (const std::exception& e) {
            row_error(row, e.what());
        }
        if (!std::getline(in, line)) throw std::runtime_error("session file has no header row");
        ++row;
    }
    if (line != kHeader) {
        row_error(row, "malformed header, expected '" + std::string(kHeader) + "'");
    }

    bool saw_annotation = false;
    std::int64_t prev_t = -1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto fields = csv::split_fields(line);
        if (fields.size() != 12) {
            row_error(row, "expected 12 fields, got " + std::to_string(fields.size()));
        }
        EmgFrame frame;
        try {
            frame.t_ms = csv::parse_int(fields[0]);
            for (std::size_t c = 0; c < kNumChannels; ++c) {
                frame.channels[c] = csv::parse_double(fields[1 + c]);
            }
            validate_frame(frame);
        } catch (const std::exception& e) {
            row_error(row, e.what());
        }
        if (frame.t_ms <= prev_t) {
            row_error(row, "timestamp " + std::to_string(frame.t_ms) + "ms does not increase on previous frame");
        }
        prev_t = frame.t_ms;

        const bool has_annotation = !fields[9].empty() || !fields[10].empty();
        if (rec.frames.empty()) {
            saw_annotation = has_annotation;
        } else if (has_annotation != saw_annotation) {
            row_error(row, "annotations must be present on every row or on none");
        }
        if (has_annotation) {
            FrameAnnotation a;
            try {
                a.instruction = instruction_from_string(fields[9]);
                a.device_state = phase_from_string(fields[10]);
                if (!fields[11].empty()) a.label = hand_state_from_string(fields[11]);
            } catch (const std::exception& e) {
                row_error(row, e.what());
            }
            rec.annotations.push_back(a);
        } else if (!fields[11].empty()) {
            row_error(row, "label present without instruction/device_state");
        }

        rec.frames.push_back(frame);
    }
    rec.validate();
    return rec;
}

SessionRecording read_session_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open session file '" + path + "'");
    return read_session(in);
}

std::optional<ReplayItem> SessionReplay::next() {
    if (done()) return std::nullopt;
    ReplayItem item;
    item.frame = rec_->frames[pos_];
    if (rec_->annotated()) item.annotation = rec_->annotations[pos_];
    ++pos_;
    return item;
}

}  // namespace exo
