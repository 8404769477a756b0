#include "exo/pipeline.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "exo/csv.hpp"

namespace exo {

namespace {

constexpr std::string_view kTraceHeader = "t_ms,p_open,filtered_open,filtered_close,command";

double median_inplace(std::vector<double>& v) {
    const std::size_t n = v.size();
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) return *mid;
    const auto lower = std::max_element(v.begin(), mid);
    return (*lower + *mid) / 2;
}

}  // namespace

void PipelineConfig::validate() const {
    if (window_ms <= 0) throw std::invalid_argument("window_ms must be > 0");
    if (!(open_threshold > 0.5) || !(open_threshold <= 1.0)) {
        throw std::invalid_argument("open_threshold must be in (0.5, 1]");
    }
    if (!(close_threshold > 0.5) || !(close_threshold <= 1.0)) {
        throw std::invalid_argument("close_threshold must be in (0.5, 1]");
    }
}

double median(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("median of an empty list");
    std::vector<double> copy(values.begin(), values.end());
    return median_inplace(copy);
}

Pipeline::Pipeline(const PipelineConfig& cfg) : cfg_(cfg), command_(cfg.initial_command) {
    cfg_.validate();
}

Command Pipeline::push(const ForestModel& model, const EmgFrame& frame) {
    return push_probability(frame.t_ms, classify(model, frame));
}

Command Pipeline::push_probability(std::int64_t t_ms, double p_open) {
    if (!window_.empty() && t_ms < window_.back().first) {
        throw std::invalid_argument("pipeline frame at " + std::to_string(t_ms) +
                                    "ms regresses behind " + std::to_string(window_.back().first) + "ms");
    }
    window_.emplace_back(t_ms, p_open);
    while (window_.front().first < t_ms - cfg_.window_ms) window_.pop_front();

    scratch_.clear();
    for (const auto& [t, p] : window_) scratch_.push_back(p);
    const double filtered_open = median_inplace(scratch_);

    scratch_.clear();
    for (const auto& [t, p] : window_) scratch_.push_back(1.0 - p);
    const double filtered_close = median_inplace(scratch_);

    // Open has priority, then Close; in the dead zone the previous command
    // stands.
    if (filtered_open >= cfg_.open_threshold) {
        command_ = Command::Open;
    } else if (filtered_close >= cfg_.close_threshold) {
        command_ = Command::Close;
    }

    last_ = {t_ms, p_open, filtered_open, filtered_close, command_};
    has_last_ = true;
    return command_;
}

const PipelineStep& Pipeline::last_step() const {
    if (!has_last_) throw std::logic_error("no frame has been pushed yet");
    return last_;
}

std::vector<std::pair<std::int64_t, double>> Pipeline::window_contents() const {
    return {window_.begin(), window_.end()};
}

void write_pipeline_trace(const std::vector<PipelineStep>& steps, std::ostream& out) {
    out << kTraceHeader << '\n';
    for (const PipelineStep& s : steps) {
        out << s.t_ms << ',' << csv::format_double(s.p_open) << ',' << csv::format_double(s.filtered_open)
            << ',' << csv::format_double(s.filtered_close) << ',' << to_string(s.command) << '\n';
    }
}

std::vector<PipelineStep> read_pipeline_trace(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader) {
        throw std::runtime_error("pipeline trace: malformed or missing header");
    }
    std::vector<PipelineStep> steps;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto fields = csv::split_fields(line);
        if (fields.size() != 5) {
            throw std::runtime_error("pipeline trace row " + std::to_string(row) + ": expected 5 fields");
        }
        try {
            PipelineStep s;
            s.t_ms = csv::parse_int(fields[0]);
            s.p_open = csv::parse_double(fields[1]);
            s.filtered_open = csv::parse_double(fields[2]);
            s.filtered_close = csv::parse_double(fields[3]);
            s.command = command_from_string(fields[4]);
            steps.push_back(s);
        } catch (const std::exception& e) {
            throw std::runtime_error("pipeline trace row " + std::to_string(row) + ": " + e.what());
        }
    }
    return steps;
}

}  // namespace exo
