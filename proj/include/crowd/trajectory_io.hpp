#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "crowd/trajectory.hpp"

namespace crowd {

inline constexpr std::string_view kTrajectoryHeader = "step,time,id,kind,x,y,vx,vy,phase";

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

void write_trajectory_header(std::ostream& out);
void write_frame(std::ostream& out, const TrajectoryFrame& frame);

class TrajectoryFormatError : public std::runtime_error {
public:
    TrajectoryFormatError(std::size_t line, const std::string& message);

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Rows are grouped into frames by consecutive step values.
std::vector<TrajectoryFrame> read_trajectory(std::istream& in);

} // namespace crowd
