#include "crowd/trajectory_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

namespace crowd {

namespace {

template <typename T>
T parse_number(std::string_view field, std::size_t line, std::string_view column) {
    T value{};
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || field.empty()) {
        throw TrajectoryFormatError(line, "bad " + std::string(column) + " value '" + std::string(field) + "'");
    }
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value)) {
            throw TrajectoryFormatError(line, "non-finite " + std::string(column));
        }
    }
    return value;
}

} // namespace

std::string format_double(double v) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

void write_trajectory_header(std::ostream& out) { out << kTrajectoryHeader << '\n'; }

void write_frame(std::ostream& out, const TrajectoryFrame& frame) {
    const std::string time = format_double(frame.time);
    std::string row;
    for (const auto& r : frame.records) {
        row.clear();
        row += std::to_string(frame.step);
        row += ',';
        row += time;
        row += ',';
        row += std::to_string(r.id);
        row += ',';
        row += to_string(r.kind);
        row += ',';
        row += format_double(r.pos.x);
        row += ',';
        row += format_double(r.pos.y);
        row += ',';
        row += format_double(r.vel.x);
        row += ',';
        row += format_double(r.vel.y);
        row += ',';
        row += to_string(r.phase);
        row += '\n';
        out << row;
    }
}

TrajectoryFormatError::TrajectoryFormatError(std::size_t line, const std::string& message)
    : std::runtime_error("trajectory line " + std::to_string(line) + ": " + message), line_(line) {}

std::vector<TrajectoryFrame> read_trajectory(std::istream& in) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) {
        throw TrajectoryFormatError(1, "missing header");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != kTrajectoryHeader) {
        throw TrajectoryFormatError(1, "header must be '" + std::string(kTrajectoryHeader) + "'");
    }

    std::vector<TrajectoryFrame> frames;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::array<std::string_view, 9> f;
        std::size_t count = 0;
        std::string_view rest(line);
        while (true) {
            const auto comma = rest.find(',');
            if (count == f.size()) {
                throw TrajectoryFormatError(line_no, "too many columns");
            }
            f[count++] = rest.substr(0, comma);
            if (comma == std::string_view::npos) {
                break;
            }
            rest.remove_prefix(comma + 1);
        }
        if (count != f.size()) {
            throw TrajectoryFormatError(line_no, "expected 9 columns");
        }

        const auto step = parse_number<std::int64_t>(f[0], line_no, "step");
        const auto time = parse_number<double>(f[1], line_no, "time");
        FrameRecord r;
        r.id = parse_number<ParticleId>(f[2], line_no, "id");
        if (f[3] == "person") {
            r.kind = ParticleKind::person;
        } else if (f[3] == "fixed") {
            r.kind = ParticleKind::fixed;
        } else {
            throw TrajectoryFormatError(line_no, "bad kind '" + std::string(f[3]) + "'");
        }
        r.pos = {parse_number<double>(f[4], line_no, "x"), parse_number<double>(f[5], line_no, "y")};
        r.vel = {parse_number<double>(f[6], line_no, "vx"), parse_number<double>(f[7], line_no, "vy")};
        if (f[8] == "active") {
            r.phase = Phase::active;
        } else if (f[8] == "arrived") {
            r.phase = Phase::arrived;
        } else {
            throw TrajectoryFormatError(line_no, "bad phase '" + std::string(f[8]) + "'");
        }

        if (frames.empty() || frames.back().step != step) {
            if (!frames.empty() && step < frames.back().step) {
                throw TrajectoryFormatError(line_no, "steps must be non-decreasing");
            }
            frames.push_back({step, time, {}});
        } else if (frames.back().time != time) {
            throw TrajectoryFormatError(line_no, "time differs within one step");
        }
        auto& records = frames.back().records;
        if (!records.empty() && r.id <= records.back().id) {
            throw TrajectoryFormatError(line_no, "ids must be strictly ascending within a step");
        }
        records.push_back(r);
    }
    return frames;
}

} // namespace crowd
