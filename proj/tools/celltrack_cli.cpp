#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "celltrack/config.hpp"
#include "celltrack/frame_io.hpp"
#include "celltrack/metrics.hpp"
#include "celltrack/tracker.hpp"

namespace {

using namespace celltrack;

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << text;
    if (!out) throw std::runtime_error("failed writing file: " + path);
}

// Trajectories as colored polylines, one per cell id.
void write_svg_plot(const std::string& path, const std::vector<TrajectoryRow>& rows,
                    int width, int height) {
    static const char* kPalette[] = {"#e6194b", "#3cb44b", "#4363d8", "#f58231",
                                     "#911eb4", "#46f0f0", "#f032e6", "#bcf60c",
                                     "#008080", "#9a6324", "#800000", "#000075"};
    std::map<int, std::vector<const TrajectoryRow*>> by_id;
    for (const TrajectoryRow& r : rows)
        if (r.status != CellStatus::Out) by_id[r.cell_id].push_back(&r);

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width
        << " " << height << "\">\n";
    svg << "<rect width=\"" << width << "\" height=\"" << height
        << "\" fill=\"white\"/>\n";
    for (const auto& [id, points] : by_id) {
        const char* color = kPalette[id % (sizeof kPalette / sizeof *kPalette)];
        svg << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.5\" points=\"";
        char buf[64];
        for (const TrajectoryRow* p : points) {
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", p->x, p->y);
            svg << buf;
        }
        svg << "\"/>\n";
    }
    svg << "</svg>\n";
    write_text_file(path, svg.str());
}

struct SynthArgs {
    std::string out_dir;
    std::string raw_path;
    std::string truth_path;
    std::string config_path;
};

void add_synth(CLI::App& app) {
    auto cmd = app.add_subcommand("synth", "Generate a synthetic sequence and its ground truth");
    auto args = std::make_shared<SynthArgs>();
    auto cfg = std::make_shared<PipelineConfig>();

    cmd->add_option("--out", args->out_dir, "Output frame directory");
    cmd->add_option("--raw", args->raw_path, "Output raw container file");
    cmd->add_option("--truth", args->truth_path, "Output truth file")->required();
    cmd->add_option("--config", args->config_path, "Config file");
    auto o_frames = cmd->add_option("--frames", cfg->synth.frames, "Frame count");
    auto o_cells = cmd->add_option("--cells", cfg->synth.n_cells, "Cell count");
    auto o_seed = cmd->add_option("--seed", cfg->synth.seed, "RNG seed");
    auto o_width = cmd->add_option("--width", cfg->synth.width, "Frame width");
    auto o_height = cmd->add_option("--height", cfg->synth.height, "Frame height");
    auto o_noise = cmd->add_option("--noise", cfg->synth.noise_sigma, "Noise sigma");
    auto o_occl = cmd->add_option("--occlusion-events", cfg->synth.occlusion_events,
                                  "Scripted pairwise meetups");
    auto o_border = cmd->add_option("--border-events", cfg->synth.border_events,
                                    "Scripted border exit/re-entries");
    auto o_smin = cmd->add_option("--speed-min", cfg->synth.speed_min, "Slowest cell");
    auto o_smax = cmd->add_option("--speed-max", cfg->synth.speed_max, "Fastest cell");

    cmd->callback([=]() {
        PipelineConfig base;
        if (!args->config_path.empty()) base = load_config(args->config_path);
        if (*o_frames) base.synth.frames = cfg->synth.frames;
        if (*o_cells) base.synth.n_cells = cfg->synth.n_cells;
        if (*o_seed) base.synth.seed = cfg->synth.seed;
        if (*o_width) base.synth.width = cfg->synth.width;
        if (*o_height) base.synth.height = cfg->synth.height;
        if (*o_noise) base.synth.noise_sigma = cfg->synth.noise_sigma;
        if (*o_occl) base.synth.occlusion_events = cfg->synth.occlusion_events;
        if (*o_border) base.synth.border_events = cfg->synth.border_events;
        if (*o_smin) base.synth.speed_min = cfg->synth.speed_min;
        if (*o_smax) base.synth.speed_max = cfg->synth.speed_max;
        if (args->out_dir.empty() && args->raw_path.empty())
            throw CLI::ValidationError("synth", "need --out or --raw");

        SequenceData data = generate_sequence(base.synth);
        if (!args->out_dir.empty()) write_frame_dir(data.frames, args->out_dir);
        if (!args->raw_path.empty()) write_raw_sequence(data.frames, args->raw_path);
        write_truth(args->truth_path, data.truth);
        std::cout << "wrote " << data.frames.size() << " frames, "
                  << data.truth.entries.size() << " truth rows\n";
    });
}

void add_pairs(CLI::App& app) {
    auto cmd = app.add_subcommand(
        "pairs", "Regenerate a synthetic sequence and emit labeled pair rows");
    auto out_path = std::make_shared<std::string>();
    auto config_path = std::make_shared<std::string>();
    auto gap = std::make_shared<int>(1);
    auto radius = std::make_shared<double>(1e18);
    auto truncate_flag = std::make_shared<bool>(false);
    auto cfg = std::make_shared<PipelineConfig>();

    cmd->add_option("--out", *out_path, "Output pairs file")->required();
    cmd->add_option("--config", *config_path, "Config file");
    cmd->add_option("--gap", *gap, "Frame offset between the paired frames");
    cmd->add_option("--pair-radius", *radius, "Skip pairs with centers farther apart");
    cmd->add_flag("--truncate", *truncate_flag, "Drop the two position entries");
    auto o_frames = cmd->add_option("--frames", cfg->synth.frames, "Frame count");
    auto o_cells = cmd->add_option("--cells", cfg->synth.n_cells, "Cell count");
    auto o_seed = cmd->add_option("--seed", cfg->synth.seed, "RNG seed");
    auto o_width = cmd->add_option("--width", cfg->synth.width, "Frame width");
    auto o_height = cmd->add_option("--height", cfg->synth.height, "Frame height");
    auto o_noise = cmd->add_option("--noise", cfg->synth.noise_sigma, "Noise sigma");
    auto o_occl = cmd->add_option("--occlusion-events", cfg->synth.occlusion_events,
                                  "Scripted pairwise meetups");
    auto o_border = cmd->add_option("--border-events", cfg->synth.border_events,
                                    "Scripted border exit/re-entries");
    auto o_smin = cmd->add_option("--speed-min", cfg->synth.speed_min, "Slowest cell");
    auto o_smax = cmd->add_option("--speed-max", cfg->synth.speed_max, "Fastest cell");

    cmd->callback([=]() {
        PipelineConfig base;
        if (!config_path->empty()) base = load_config(*config_path);
        if (*o_frames) base.synth.frames = cfg->synth.frames;
        if (*o_cells) base.synth.n_cells = cfg->synth.n_cells;
        if (*o_seed) base.synth.seed = cfg->synth.seed;
        if (*o_width) base.synth.width = cfg->synth.width;
        if (*o_height) base.synth.height = cfg->synth.height;
        if (*o_noise) base.synth.noise_sigma = cfg->synth.noise_sigma;
        if (*o_occl) base.synth.occlusion_events = cfg->synth.occlusion_events;
        if (*o_border) base.synth.border_events = cfg->synth.border_events;
        if (*o_smin) base.synth.speed_min = cfg->synth.speed_min;
        if (*o_smax) base.synth.speed_max = cfg->synth.speed_max;

        SequenceData data = generate_sequence(base.synth);
        TrainingSet set = label_pairs(data.frames, data.truth, *gap, base.seg, *radius);
        if (*truncate_flag) set = truncate_pairs(set);
        save_pairs(set, *out_path);
        size_t positives = 0;
        for (const TrainingRow& row : set.rows) positives += row.label;
        std::cout << "wrote " << set.rows.size() << " rows (" << positives
                  << " positive) to " << *out_path << "\n";
    });
}

void add_train(CLI::App& app) {
    auto cmd = app.add_subcommand("train", "Train a match classifier on labeled pairs");
    auto data_path = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    auto report_path = std::make_shared<std::string>();
    auto config_path = std::make_shared<std::string>();
    auto depths = std::make_shared<std::vector<int>>();
    auto runs = std::make_shared<int>(20);
    auto seed = std::make_shared<uint64_t>(1);
    auto cfg = std::make_shared<PipelineConfig>();

    cmd->add_option("--data", *data_path, "Labeled pairs file")->required();
    cmd->add_option("--out", *out_path, "Output model file")->required();
    cmd->add_option("--report", *report_path, "Write the protocol report here");
    cmd->add_option("--config", *config_path, "Config file");
    auto o_depth = cmd->add_option("--depth", cfg->train.max_depth, "Tree depth");
    auto o_sub = cmd->add_option("--subdivisions", cfg->train.subdivisions,
                                 "Threshold candidates per feature");
    auto o_stop = cmd->add_option("--stop-size", cfg->train.stop_size,
                                  "Stop splitting at this subset size");
    auto o_ent = cmd->add_option("--stop-entropy", cfg->train.stop_entropy,
                                 "Stop splitting at this entropy");
    cmd->add_option("--depths", *depths, "Depth sweep for the error report")
        ->delimiter(',');
    cmd->add_option("--runs", *runs, "Independent 70/30 split runs");
    cmd->add_option("--seed", *seed, "RNG seed for the splits");

    cmd->callback([=]() {
        PipelineConfig base;
        if (!config_path->empty()) base = load_config(*config_path);
        if (*o_depth) base.train.max_depth = cfg->train.max_depth;
        if (*o_sub) base.train.subdivisions = cfg->train.subdivisions;
        if (*o_stop) base.train.stop_size = cfg->train.stop_size;
        if (*o_ent) base.train.stop_entropy = cfg->train.stop_entropy;

        TrainingSet set = load_pairs(*data_path);
        if (set.rows.empty()) throw std::runtime_error("empty dataset: " + *data_path);

        std::vector<int> sweep = *depths;
        if (sweep.empty()) sweep = {base.train.max_depth};
        ProtocolResult result =
            evaluate_protocol(set, base.train, sweep, *runs, *seed);
        const std::string text = result.to_text();
        std::cout << text;
        if (!report_path->empty()) write_text_file(*report_path, text);

        DecisionTree tree = train(set, base.train);
        save_model(tree, *out_path);
        std::cout << "model (" << set.dimension() << " features, depth "
                  << base.train.max_depth << ") written to " << *out_path << "\n";
    });
}

void add_track(CLI::App& app) {
    auto cmd = app.add_subcommand("track", "Track cells through a frame sequence");
    auto frames_path = std::make_shared<std::string>();
    auto t1_path = std::make_shared<std::string>();
    auto t2_path = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    auto plot_path = std::make_shared<std::string>();
    auto config_path = std::make_shared<std::string>();
    auto cfg = std::make_shared<PipelineConfig>();

    cmd->add_option("--frames", *frames_path, "Frame directory or raw container")
        ->required();
    cmd->add_option("--t1", *t1_path, "Neighboring-frame model")->required();
    cmd->add_option("--t2", *t2_path, "Re-entry model")->required();
    cmd->add_option("--out", *out_path, "Output trajectory file")->required();
    cmd->add_option("--plot", *plot_path, "Optional SVG trajectory plot");
    cmd->add_option("--config", *config_path, "Config file");
    auto o_thresh = cmd->add_option("--threshold", cfg->seg.threshold,
                                    "Segmentation threshold (-1 for automatic)");
    auto o_area = cmd->add_option("--min-area", cfg->seg.min_area, "Minimum region area");
    auto o_window = cmd->add_option("--bg-window", cfg->seg.bg_window,
                                    "Background median window");
    auto o_d0 = cmd->add_option("--d0", cfg->tracker.d0, "Maximum cell speed");

    cmd->callback([=]() {
        PipelineConfig base;
        if (!config_path->empty()) base = load_config(*config_path);
        if (*o_thresh) base.seg.threshold = cfg->seg.threshold;
        if (*o_area) base.seg.min_area = cfg->seg.min_area;
        if (*o_window) base.seg.bg_window = cfg->seg.bg_window;
        if (*o_d0) base.tracker.d0 = cfg->tracker.d0;

        std::vector<GrayFrame> frames = load_frames(*frames_path);
        if (static_cast<int>(frames.size()) < base.seg.bg_window)
            throw std::runtime_error("need at least " +
                                     std::to_string(base.seg.bg_window) + " frames");
        BackgroundModel bg = compute_background(frames, base.seg.bg_window);

        Tracker tracker(load_model(*t1_path), load_model(*t2_path), base.tracker,
                        frames[0].width, frames[0].height);
        for (const GrayFrame& frame : frames)
            tracker.process_frame(segment_frame(frame, bg, base.seg), frame.index);

        std::vector<TrajectoryRow> rows = tracker.rows();
        write_trajectory(*out_path, rows);
        if (!plot_path->empty())
            write_svg_plot(*plot_path, rows, frames[0].width, frames[0].height);
        std::cout << "tracked " << frames.size() << " frames, "
                  << tracker.cells().size() << " cells, " << rows.size()
                  << " trajectory rows\n";
    });
}

void add_eval(CLI::App& app) {
    auto cmd = app.add_subcommand("eval", "Score a trajectory file against ground truth");
    auto traj_path = std::make_shared<std::string>();
    auto truth_path = std::make_shared<std::string>();
    auto report_path = std::make_shared<std::string>();
    auto config_path = std::make_shared<std::string>();
    auto cfg = std::make_shared<PipelineConfig>();

    cmd->add_option("--trajectories", *traj_path, "Trajectory file")->required();
    cmd->add_option("--truth", *truth_path, "Truth file")->required();
    cmd->add_option("--report", *report_path, "Write the report here");
    cmd->add_option("--config", *config_path, "Config file");
    auto o_radius = cmd->add_option("--match-radius", cfg->eval.match_radius,
                                    "Match distance limit");
    auto o_occl = cmd->add_option("--occlusion-dist", cfg->eval.occlusion_dist,
                                  "Occlusion event distance");

    cmd->callback([=]() {
        PipelineConfig base;
        if (!config_path->empty()) base = load_config(*config_path);
        if (*o_radius) base.eval.match_radius = cfg->eval.match_radius;
        if (*o_occl) base.eval.occlusion_dist = cfg->eval.occlusion_dist;

        EvalReport report = evaluate(read_trajectory(*traj_path),
                                     read_truth(*truth_path), base.eval);
        const std::string text = report.to_text();
        std::cout << text;
        if (!report_path->empty()) write_text_file(*report_path, text);
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"celltrack: segmentation, classifier training, and tracking for "
                 "grayscale cell sequences"};
    app.require_subcommand(0, 1);
    app.add_flag_callback(
        "--dump-config",
        [] {
            std::cout << dump_config(PipelineConfig{});
            throw CLI::Success{};
        },
        "Print the default config and exit");

    add_synth(app);
    add_pairs(app);
    add_train(app);
    add_track(app);
    add_eval(app);

    try {
        app.parse(argc, argv);
        if (app.get_subcommands().empty()) {
            std::cout << app.help();
            return 0;
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
