#include "celltrack/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace celltrack {
namespace {

// One row per key: how to print it and how to assign it.
struct Entry {
    const char* key;
    std::function<std::string(const PipelineConfig&)> get;
    std::function<void(PipelineConfig&, const std::string&)> set;
};

std::string fmt_int(long long v) { return std::to_string(v); }

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

long long parse_int(const std::string& s) {
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw std::invalid_argument("bad integer value: " + s);
    return v;
}

double parse_double(const std::string& s) {
    try {
        size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("bad numeric value: " + s);
    }
}

const std::vector<Entry>& table() {
    static const std::vector<Entry> entries = [] {
        std::vector<Entry> t;
        auto add_int = [&t](const char* key, auto member) {
            t.push_back({key,
                         [member](const PipelineConfig& c) { return fmt_int(member(const_cast<PipelineConfig&>(c))); },
                         [member](PipelineConfig& c, const std::string& v) {
                             member(c) = static_cast<std::remove_reference_t<decltype(member(c))>>(parse_int(v));
                         }});
        };
        auto add_double = [&t](const char* key, auto member) {
            t.push_back({key,
                         [member](const PipelineConfig& c) { return fmt_double(member(const_cast<PipelineConfig&>(c))); },
                         [member](PipelineConfig& c, const std::string& v) { member(c) = parse_double(v); }});
        };

        add_int("seg.threshold", [](PipelineConfig& c) -> int& { return c.seg.threshold; });
        add_int("seg.min_area", [](PipelineConfig& c) -> int& { return c.seg.min_area; });
        add_int("seg.bg_window", [](PipelineConfig& c) -> int& { return c.seg.bg_window; });

        add_int("train.depth", [](PipelineConfig& c) -> int& { return c.train.max_depth; });
        add_int("train.subdivisions", [](PipelineConfig& c) -> int& { return c.train.subdivisions; });
        add_int("train.stop_size", [](PipelineConfig& c) -> int& { return c.train.stop_size; });
        add_double("train.stop_entropy", [](PipelineConfig& c) -> double& { return c.train.stop_entropy; });

        add_double("tracker.alpha1", [](PipelineConfig& c) -> double& { return c.tracker.alpha1; });
        add_double("tracker.alpha2", [](PipelineConfig& c) -> double& { return c.tracker.alpha2; });
        add_double("tracker.alpha3", [](PipelineConfig& c) -> double& { return c.tracker.alpha3; });
        add_double("tracker.lambda1", [](PipelineConfig& c) -> double& { return c.tracker.lambda1; });
        add_double("tracker.lambda2", [](PipelineConfig& c) -> double& { return c.tracker.lambda2; });
        add_double("tracker.d0", [](PipelineConfig& c) -> double& { return c.tracker.d0; });

        add_int("synth.width", [](PipelineConfig& c) -> int& { return c.synth.width; });
        add_int("synth.height", [](PipelineConfig& c) -> int& { return c.synth.height; });
        add_int("synth.frames", [](PipelineConfig& c) -> int& { return c.synth.frames; });
        add_int("synth.cells", [](PipelineConfig& c) -> int& { return c.synth.n_cells; });
        add_double("synth.speed_min", [](PipelineConfig& c) -> double& { return c.synth.speed_min; });
        add_double("synth.speed_max", [](PipelineConfig& c) -> double& { return c.synth.speed_max; });
        add_double("synth.size_min", [](PipelineConfig& c) -> double& { return c.synth.size_min; });
        add_double("synth.size_max", [](PipelineConfig& c) -> double& { return c.synth.size_max; });
        add_double("synth.cell_base", [](PipelineConfig& c) -> double& { return c.synth.intensity.cell_base; });
        add_double("synth.base_jitter", [](PipelineConfig& c) -> double& { return c.synth.intensity.base_jitter; });
        add_double("synth.falloff", [](PipelineConfig& c) -> double& { return c.synth.intensity.falloff; });
        add_double("synth.background", [](PipelineConfig& c) -> double& { return c.synth.background_level; });
        add_double("synth.noise_sigma", [](PipelineConfig& c) -> double& { return c.synth.noise_sigma; });
        add_double("synth.heading_jitter", [](PipelineConfig& c) -> double& { return c.synth.heading_jitter; });
        add_double("synth.occlusion_rate", [](PipelineConfig& c) -> double& { return c.synth.occlusion_rate; });
        add_int("synth.occlusion_events", [](PipelineConfig& c) -> int& { return c.synth.occlusion_events; });
        add_int("synth.border_events", [](PipelineConfig& c) -> int& { return c.synth.border_events; });
        add_int("synth.seed", [](PipelineConfig& c) -> uint64_t& { return c.synth.seed; });

        add_double("eval.match_radius", [](PipelineConfig& c) -> double& { return c.eval.match_radius; });
        add_double("eval.occlusion_dist", [](PipelineConfig& c) -> double& { return c.eval.occlusion_dist; });
        return t;
    }();
    return entries;
}

}  // namespace

std::string dump_config(const PipelineConfig& config) {
    std::ostringstream out;
    for (const Entry& e : table()) out << e.key << " = " << e.get(config) << "\n";
    return out.str();
}

PipelineConfig parse_config(const std::string& text, PipelineConfig base) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    auto trim = [](std::string s) {
        const char* ws = " \t\r";
        const size_t a = s.find_first_not_of(ws);
        if (a == std::string::npos) return std::string();
        return s.substr(a, s.find_last_not_of(ws) - a + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line.substr(0, line.find('#')));
        if (stripped.empty()) continue;
        const size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        bool found = false;
        for (const Entry& e : table()) {
            if (key == e.key) {
                try {
                    e.set(base, value);
                } catch (const std::exception& ex) {
                    throw std::invalid_argument("config line " + std::to_string(line_no) +
                                                " (" + key + "): " + ex.what());
                }
                found = true;
                break;
            }
        }
        if (!found)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": unknown key " + key);
    }
    return base;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), std::move(base));
}

}  // namespace celltrack
