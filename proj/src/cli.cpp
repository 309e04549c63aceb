#include "crowd/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "crowd/dynamics.hpp"
#include "crowd/svg.hpp"
#include "crowd/trajectory_io.hpp"

namespace crowd::cli {

namespace {

namespace fs = std::filesystem;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) {
        throw IoError("error reading '" + path + "'");
    }
    return ss.str();
}

// Writes to a sibling temp file and renames over `path` on success; the temp
// file is removed if `body` throws.
template <typename Body>
void write_atomically(const std::string& path, Body&& body) {
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open '" + tmp.string() + "' for writing");
        }
        try {
            body(out);
            out.flush();
            if (!out) {
                throw IoError("error writing '" + tmp.string() + "'");
            }
        } catch (...) {
            out.close();
            std::error_code ec;
            fs::remove(tmp, ec);
            throw;
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot rename '" + tmp.string() + "' to '" + path + "'");
    }
}

std::vector<TrajectoryFrame> load_trajectory(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    return read_trajectory(in);
}

double metric_cell(const AnalyzeConfig& config, double fallback) { return config.cell.value_or(fallback); }

template <typename T>
std::vector<T> split_numbers(const std::string& text) {
    std::vector<T> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::istringstream field(item);
        T v{};
        if (!(field >> v) || !(field >> std::ws).eof()) {
            throw CLI::ValidationError("bad list item '" + item + "'");
        }
        values.push_back(v);
    }
    return values;
}

} // namespace

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    Scene scene;
    try {
        scene = parse_scene_document(read_file(config.scene_path));
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const SceneError& e) {
        err << "error: " << e.what() << '\n';
        return kSceneInvalid;
    }
    if (config.seed) {
        scene.seed = *config.seed;
    }
    if (config.dt) {
        scene.dt = *config.dt;
    }
    if (config.duration) {
        scene.duration = *config.duration;
    }

    StepOptions options;
    options.forces.literal_damping = config.literal_damping;
    options.threads = std::max(1u, config.threads);

    const auto violations = validate_scene(scene, options.forces.amplification);
    if (!violations.empty()) {
        for (const auto& v : violations) {
            err << v.code << ": " << v.message << '\n';
        }
        return kSceneInvalid;
    }

    RunSummary summary;
    try {
        write_atomically(config.out_path, [&](std::ostream& file) {
            write_trajectory_header(file);
            summary = simulate(scene, options, [&](const TrajectoryFrame& f) { write_frame(file, f); });
        });
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const NumericalError& e) {
        err << "numerical abort: " << e.what() << '\n';
        return kNumericalAbort;
    }

    const double rate = summary.wall_seconds > 0.0 ? static_cast<double>(summary.steps) / summary.wall_seconds : 0.0;
    out << "steps=" << summary.steps << " frames=" << summary.frames << " particles_spawned=" << summary.spawned
        << " wall_s=" << summary.wall_seconds << " steps_per_s=" << rate << '\n';
    return kOk;
}

int cmd_analyze(const AnalyzeConfig& config, std::ostream& /*out*/, std::ostream& err) {
    static const std::vector<std::string> metrics = {"density", "jams", "flow", "curl", "avoidance"};
    if (std::find(metrics.begin(), metrics.end(), config.metric) == metrics.end()) {
        err << "error: unknown metric '" << config.metric << "'\n";
        return kUnknownMetric;
    }
    if (config.metric == "flow" && !config.gate) {
        err << "error: metric flow requires --gate x1,y1,x2,y2\n";
        return kUsage;
    }
    if (config.metric == "avoidance" && !config.ids) {
        err << "error: metric avoidance requires --ids a,b\n";
        return kUsage;
    }

    std::vector<TrajectoryFrame> frames;
    try {
        frames = load_trajectory(config.traj_path);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const TrajectoryFormatError& e) {
        err << "error: " << e.what() << '\n';
        return kMalformedTrajectory;
    }

    try {
        write_atomically(config.out_path, [&](std::ostream& file) {
            if (config.metric == "density") {
                const double cell = metric_cell(config, 5.0);
                file << "step,cell_x,cell_y,density\n";
                for (const auto& f : frames) {
                    const DensityGrid grid = density_grid(f, cell);
                    for (const auto& [c, n] : grid.counts) {
                        file << f.step << ',' << c.x << ',' << c.y << ',' << format_double(grid.density(c)) << '\n';
                    }
                }
            } else if (config.metric == "jams") {
                file << "step,cluster_id,size,cx,cy\n";
                for (const auto& f : frames) {
                    const auto clusters = detect_jams(f, config.v_jam, config.r_link);
                    for (std::size_t k = 0; k < clusters.size(); ++k) {
                        file << f.step << ',' << k << ',' << clusters[k].size << ','
                             << format_double(clusters[k].centroid.x) << ',' << format_double(clusters[k].centroid.y)
                             << '\n';
                    }
                }
            } else if (config.metric == "flow") {
                file << "window_start,signed,gross\n";
                for (const auto& w : flow_rate(frames, *config.gate, config.window)) {
                    file << format_double(w.window_start) << ',' << w.signed_count << ',' << w.gross << '\n';
                }
            } else if (config.metric == "curl") {
                const double cell = metric_cell(config, 2.0);
                file << "step,mean_abs_curl\n";
                for (const auto& f : frames) {
                    const CurlField field = curl_field(f, cell);
                    if (field.defined()) {
                        file << f.step << ',' << format_double(field.mean_abs) << '\n';
                    }
                }
            } else {
                const auto [a, b] = *config.ids;
                // Persons spawn over time: start from the first frame holding both.
                auto first = std::find_if(frames.begin(), frames.end(), [&](const TrajectoryFrame& f) {
                    return f.find(a) != nullptr && f.find(b) != nullptr;
                });
                if (first == frames.end()) {
                    throw std::invalid_argument("ids " + std::to_string(a) + " and " + std::to_string(b) +
                                                " never appear together");
                }
                const auto sig = avoidance_signature(std::span(&*first, static_cast<std::size_t>(frames.end() - first)), a, b);
                file << "min_separation,speed_dip,lateral_deviation\n"
                     << format_double(sig.min_separation) << ',' << format_double(sig.speed_dip) << ','
                     << format_double(sig.lateral_deviation) << '\n';
            }
        });
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kMalformedTrajectory;
    }
    return kOk;
}

int cmd_plot(const PlotConfig& config, std::ostream& /*out*/, std::ostream& err) {
    if (config.style != "discs" && config.style != "trails") {
        err << "error: unknown style '" << config.style << "' (expected discs or trails)\n";
        return kUsage;
    }
    if (config.trail_window < 1) {
        err << "error: --trail-window must be >= 1\n";
        return kUsage;
    }

    SvgOptions options;
    std::vector<TrajectoryFrame> frames;
    try {
        if (config.scene_path) {
            const Scene scene = parse_scene_document(read_file(*config.scene_path));
            options.bounds = scene.bounds;
            ParticleId id = 0;
            for (const auto& o : scene.obstacles) {
                for (const auto& p : build_obstacle_particles(o)) {
                    options.fixed_radius[id++] = p.profile.d1;
                }
            }
        }
        frames = load_trajectory(config.traj_path);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const SceneError& e) {
        err << "error: " << e.what() << '\n';
        return kSceneInvalid;
    } catch (const TrajectoryFormatError& e) {
        err << "error: " << e.what() << '\n';
        return kMalformedTrajectory;
    }

    // A header-only file plots as a single empty frame.
    if (frames.empty()) {
        frames.push_back({});
    }
    const long long count = static_cast<long long>(frames.size());
    const long long index = config.frame.value_or(count - 1);
    if (index < 0 || index >= count) {
        err << "error: frame " << index << " out of range [0, " << count << ")\n";
        return kFrameOutOfRange;
    }

    try {
        write_atomically(config.out_path, [&](std::ostream& file) {
            if (config.style == "discs") {
                file << render_discs(frames[static_cast<std::size_t>(index)], options);
            } else {
                const long long first = std::max(0LL, index - config.trail_window + 1);
                file << render_trails(std::span(frames).subspan(static_cast<std::size_t>(first),
                                                                static_cast<std::size_t>(index - first + 1)),
                                      options);
            }
        });
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    }
    return kOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Particle-based crowd simulator: run scenes, analyze and plot trajectories"};
    app.name("crowdsim");
    app.require_subcommand(1);

    RunConfig run;
    auto* run_cmd = app.add_subcommand("run", "Simulate a scene to a trajectory CSV");
    run_cmd->add_option("--scene", run.scene_path, "Scene JSON file")->required();
    run_cmd->add_option("--out", run.out_path, "Trajectory CSV output")->required();
    run_cmd->add_option("--seed", run.seed, "Override simulation.seed");
    run_cmd->add_option("--dt", run.dt, "Override simulation.dt (s)");
    run_cmd->add_option("--duration", run.duration, "Override simulation.duration (s)");
    run_cmd->add_flag("--paper-literal-damping", run.literal_damping,
                      "Damp with the relative-velocity norm instead of the closing speed");
    run_cmd->add_option("--threads", run.threads, "Worker threads for force gathering")->check(CLI::PositiveNumber);

    AnalyzeConfig analyze;
    std::string gate_text;
    std::string ids_text;
    auto* analyze_cmd = app.add_subcommand("analyze", "Compute a metric over a trajectory CSV");
    analyze_cmd->add_option("--traj", analyze.traj_path, "Trajectory CSV")->required();
    analyze_cmd->add_option("--metric", analyze.metric, "density|jams|flow|curl|avoidance")->required();
    analyze_cmd->add_option("--out", analyze.out_path, "Metrics CSV output")->required();
    analyze_cmd->add_option("--cell", analyze.cell, "Cell size (m); density 5, curl 2 by default");
    analyze_cmd->add_option("--v-jam", analyze.v_jam, "Jam speed threshold (m/s)")->capture_default_str();
    analyze_cmd->add_option("--r-link", analyze.r_link, "Jam link distance (m)")->capture_default_str();
    analyze_cmd->add_option("--gate", gate_text, "Flow gate x1,y1,x2,y2");
    analyze_cmd->add_option("--window", analyze.window, "Flow window (s)")->capture_default_str();
    analyze_cmd->add_option("--ids", ids_text, "Avoidance pair a,b");

    PlotConfig plot;
    auto* plot_cmd = app.add_subcommand("plot", "Render a trajectory frame or trails to SVG");
    plot_cmd->add_option("--traj", plot.traj_path, "Trajectory CSV")->required();
    plot_cmd->add_option("--style", plot.style, "discs|trails")->required();
    plot_cmd->add_option("--out", plot.out_path, "SVG output")->required();
    plot_cmd->add_option("--frame", plot.frame, "Frame index (default: last)");
    plot_cmd->add_option("--trail-window", plot.trail_window, "Frames per trail")->capture_default_str();
    plot_cmd->add_option("--scene", plot.scene_path, "Scene JSON for bounds and obstacle radii");

    try {
        std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
        std::reverse(rest.begin(), rest.end());
        app.parse(rest);
        if (*analyze_cmd) {
            if (!gate_text.empty()) {
                const auto g = split_numbers<double>(gate_text);
                if (g.size() != 4) {
                    throw CLI::ValidationError("--gate expects x1,y1,x2,y2");
                }
                analyze.gate = Gate{{g[0], g[1]}, {g[2], g[3]}};
                if (analyze.gate->a == analyze.gate->b) {
                    throw CLI::ValidationError("--gate endpoints must differ");
                }
            }
            if (!ids_text.empty()) {
                const auto ids = split_numbers<ParticleId>(ids_text);
                if (ids.size() != 2) {
                    throw CLI::ValidationError("--ids expects a,b");
                }
                analyze.ids = std::pair{ids[0], ids[1]};
            }
            if (!(analyze.window > 0.0) || !(analyze.v_jam > 0.0) || !(analyze.r_link > 0.0) ||
                (analyze.cell && !(*analyze.cell > 0.0))) {
                throw CLI::ValidationError("--window, --v-jam, --r-link and --cell must be > 0");
            }
        }
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    if (*run_cmd) {
        return cmd_run(run, out, err);
    }
    if (*analyze_cmd) {
        return cmd_analyze(analyze, out, err);
    }
    return cmd_plot(plot, out, err);
}

} // namespace crowd::cli
