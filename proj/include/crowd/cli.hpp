#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "crowd/analysis.hpp"

namespace crowd::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kSceneInvalid = 2,
    kIoError = 3,
    kNumericalAbort = 4,
    kMalformedTrajectory = 5,
    kUnknownMetric = 6,
    kFrameOutOfRange = 7,
};

struct RunConfig {
    std::string scene_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> dt;
    std::optional<double> duration;
    bool literal_damping{false};
    unsigned threads{1};
};

struct AnalyzeConfig {
    std::string traj_path;
    std::string metric;
    std::string out_path;
    std::optional<double> cell; // metric-specific default when absent
    double v_jam{kDefaultJamSpeed};
    double r_link{kDefaultJamLink};
    std::optional<Gate> gate;
    double window{10.0};
    std::optional<std::pair<ParticleId, ParticleId>> ids;
};

struct PlotConfig {
    std::string traj_path;
    std::string style; // discs | trails
    std::string out_path;
    std::optional<long long> frame; // last frame when absent
    int trail_window{10};
    std::optional<std::string> scene_path;
};

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_analyze(const AnalyzeConfig& config, std::ostream& out, std::ostream& err);
int cmd_plot(const PlotConfig& config, std::ostream& out, std::ostream& err);

// Full command line (argv[0] is the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace crowd::cli
