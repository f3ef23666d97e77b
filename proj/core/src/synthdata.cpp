#include "celltrack/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "celltrack/features.hpp"

namespace celltrack {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kWallMargin = 45.0;   // start turning away this close to a wall
constexpr double kMaxTurn = 0.3;       // wall-avoidance turn rate, rad/frame
constexpr int kDwellFrames = 3;        // how long a scripted meetup holds
constexpr int kWaitFrames = 12;        // how long an exited cell stays away

double edge_distance(const Vec2& p, int w, int h) {
    return std::min(std::min(p.x, w - 1.0 - p.x), std::min(p.y, h - 1.0 - p.y));
}

double wrap_angle(double a) {
    while (a > kPi) a -= 2.0 * kPi;
    while (a < -kPi) a += 2.0 * kPi;
    return a;
}

enum class Mode { Free, Approach, Dwell, Leave, Wait, Enter };

struct CellSim {
    Vec2 pos;
    double heading = 0.0;
    double speed = 0.0;
    double semi_major = 0.0;
    double semi_minor = 0.0;
    double base_intensity = 0.0;
    Mode mode = Mode::Free;
    Vec2 target;                   // meetup point or outside waypoint
    int timer = 0;                 // arrival frame (Approach) or end frame (Dwell/Wait)
    double release_heading = 0.0;  // heading to take when a meetup breaks up
};

struct ScriptedEvent {
    enum class Kind { Meet, Border } kind = Kind::Meet;
    int start = 0;
    int cell_a = -1;
    int cell_b = -1;
};

void validate(const SynthConfig& c) {
    if (c.width <= 0 || c.height <= 0)
        throw std::invalid_argument("synth: frame dimensions must be positive");
    if (c.frames <= 0) throw std::invalid_argument("synth: frame count must be positive");
    if (c.n_cells < 0) throw std::invalid_argument("synth: negative cell count");
    if (!(c.speed_min > 0.0) || c.speed_max < c.speed_min)
        throw std::invalid_argument("synth: speed range must satisfy 0 < min <= max");
    if (!(c.size_min > 0.0) || c.size_max < c.size_min)
        throw std::invalid_argument("synth: size range must satisfy 0 < min <= max");
    if (c.noise_sigma < 0.0) throw std::invalid_argument("synth: negative noise sigma");
}

std::vector<ScriptedEvent> plan_events(const SynthConfig& cfg, std::mt19937_64& rng) {
    std::vector<ScriptedEvent> plan;

    int n_meet = cfg.occlusion_events;
    if (n_meet < 0) {
        n_meet = 0;
        if (cfg.occlusion_rate > 0.0 && cfg.n_cells >= 2) {
            std::bernoulli_distribution flip(std::min(1.0, cfg.occlusion_rate));
            const int windows = cfg.frames / 60;
            for (int w = 0; w < windows; ++w)
                for (int p = 0; p + 1 < cfg.n_cells; p += 2)
                    if (flip(rng)) ++n_meet;
        }
    }

    if (n_meet > 0 && cfg.n_cells >= 2 && cfg.frames > 80) {
        const int lo = 30;
        const int hi = cfg.frames - 50;
        const double spacing = (hi - lo) / static_cast<double>(n_meet);
        const int n_pairs = cfg.n_cells / 2;
        for (int e = 0; e < n_meet; ++e) {
            const int a = 2 * (e % n_pairs);
            plan.push_back({ScriptedEvent::Kind::Meet,
                            lo + static_cast<int>(e * spacing), a, a + 1});
        }
    }

    if (cfg.border_events > 0 && cfg.n_cells >= 1 && cfg.frames > 120) {
        const int lo = 60;
        const int hi = cfg.frames - 100;
        const double spacing = (hi - lo) / static_cast<double>(cfg.border_events);
        for (int e = 0; e < cfg.border_events; ++e) {
            const int cell = cfg.n_cells - 1 - (e % cfg.n_cells);
            plan.push_back({ScriptedEvent::Kind::Border,
                            lo + static_cast<int>((e + 0.5) * spacing), cell, -1});
        }
    }

    std::stable_sort(plan.begin(), plan.end(),
                     [](const ScriptedEvent& a, const ScriptedEvent& b) {
                         return a.start < b.start;
                     });
    return plan;
}

void start_meet(std::vector<CellSim>& cells, const ScriptedEvent& ev, int frame,
                const SynthConfig& cfg, std::mt19937_64& rng) {
    CellSim& a = cells[ev.cell_a];
    CellSim& b = cells[ev.cell_b];
    if (a.mode != Mode::Free || b.mode != Mode::Free) return;

    const double margin = std::min(100.0, std::min(cfg.width, cfg.height) / 4.0);
    Vec2 mid = (a.pos + b.pos) * 0.5;
    mid.x = std::clamp(mid.x, margin, cfg.width - 1.0 - margin);
    mid.y = std::clamp(mid.y, margin, cfg.height - 1.0 - margin);

    Vec2 dir = b.pos - a.pos;
    const double len = dir.norm();
    dir = len > 1e-9 ? dir * (1.0 / len) : Vec2{1.0, 0.0};
    const Vec2 park = mid + dir * (0.75 * std::min(a.semi_major, b.semi_major));

    const double far_dist = std::max(distance(a.pos, mid), distance(b.pos, park));
    const int travel =
        std::max(4, static_cast<int>(std::ceil(far_dist / (0.9 * cfg.speed_max))));
    const double psi = std::uniform_real_distribution<double>(0.0, 2.0 * kPi)(rng);

    a.mode = b.mode = Mode::Approach;
    a.target = mid;
    b.target = park;
    a.timer = b.timer = frame + travel;
    a.release_heading = psi;
    b.release_heading = psi + kPi;
}

void start_border(std::vector<CellSim>& cells, const ScriptedEvent& ev,
                  const SynthConfig& cfg) {
    CellSim& c = cells[ev.cell_a];
    if (c.mode != Mode::Free) return;

    const double out = c.semi_major + 40.0;
    const double d_left = c.pos.x;
    const double d_right = cfg.width - 1.0 - c.pos.x;
    const double d_top = c.pos.y;
    const double d_bottom = cfg.height - 1.0 - c.pos.y;
    const double nearest = std::min(std::min(d_left, d_right), std::min(d_top, d_bottom));

    c.target = c.pos;
    if (nearest == d_left) c.target.x = -out;
    else if (nearest == d_right) c.target.x = cfg.width - 1.0 + out;
    else if (nearest == d_top) c.target.y = -out;
    else c.target.y = cfg.height - 1.0 + out;
    c.mode = Mode::Leave;
}

// Advances one cell from frame k-1 to frame k.
void advance(CellSim& c, int k, const SynthConfig& cfg, std::mt19937_64& rng) {
    switch (c.mode) {
        case Mode::Free: {
            if (cfg.heading_jitter > 0.0)
                c.heading += std::uniform_real_distribution<double>(
                    -cfg.heading_jitter, cfg.heading_jitter)(rng);
            const Vec2 step{c.speed * std::cos(c.heading), c.speed * std::sin(c.heading)};
            if (edge_distance(c.pos + step, cfg.width, cfg.height) < kWallMargin) {
                const double want = std::atan2(cfg.height / 2.0 - c.pos.y,
                                               cfg.width / 2.0 - c.pos.x);
                const double diff = wrap_angle(want - c.heading);
                c.heading += edge_distance(c.pos, cfg.width, cfg.height) < 5.0
                                 ? diff
                                 : std::clamp(diff, -kMaxTurn, kMaxTurn);
            }
            c.pos = c.pos + Vec2{c.speed * std::cos(c.heading),
                                 c.speed * std::sin(c.heading)};
            break;
        }
        case Mode::Approach: {
            const int left = c.timer - k + 1;
            const Vec2 delta = c.target - c.pos;
            if (delta.norm() > 1e-9) c.heading = std::atan2(delta.y, delta.x);
            c.pos = left <= 1 ? c.target : c.pos + delta * (1.0 / left);
            if (k >= c.timer) {
                c.mode = Mode::Dwell;
                c.timer = k + kDwellFrames;
            }
            break;
        }
        case Mode::Dwell:
            if (k >= c.timer) {
                c.mode = Mode::Free;
                c.heading = c.release_heading;
            }
            break;
        case Mode::Leave: {
            const Vec2 delta = c.target - c.pos;
            const double d = delta.norm();
            const double step = std::min(d, 0.9 * cfg.speed_max);
            if (d > 1e-9) {
                c.heading = std::atan2(delta.y, delta.x);
                c.pos = c.pos + delta * (step / d);
            }
            if (edge_distance(c.pos, cfg.width, cfg.height) <= -(c.semi_major + 2.0)) {
                c.mode = Mode::Wait;
                c.timer = k + kWaitFrames;
            }
            break;
        }
        case Mode::Wait:
            if (k >= c.timer) {
                const int wall = static_cast<int>(rng() % 4);
                const double t = std::uniform_real_distribution<double>(0.12, 0.88)(rng);
                const double off = c.semi_major + 8.0;
                switch (wall) {
                    case 0:  // left
                        c.pos = {-off, t * (cfg.height - 1)};
                        c.heading = 0.0;
                        break;
                    case 1:  // right
                        c.pos = {cfg.width - 1.0 + off, t * (cfg.height - 1)};
                        c.heading = kPi;
                        break;
                    case 2:  // top
                        c.pos = {t * (cfg.width - 1), -off};
                        c.heading = kPi / 2.0;
                        break;
                    default:  // bottom
                        c.pos = {t * (cfg.width - 1), cfg.height - 1.0 + off};
                        c.heading = -kPi / 2.0;
                        break;
                }
                c.heading += std::uniform_real_distribution<double>(-0.35, 0.35)(rng);
                c.mode = Mode::Enter;
            }
            break;
        case Mode::Enter:
            c.pos = c.pos + Vec2{c.speed * std::cos(c.heading),
                                 c.speed * std::sin(c.heading)};
            if (edge_distance(c.pos, cfg.width, cfg.height) > c.semi_major + 4.0)
                c.mode = Mode::Free;
            break;
    }
}

// Paints one cell into the double-valued frame buffer and records its pixels.
void render_cell(const CellSim& c, std::vector<double>& buf, const SynthConfig& cfg,
                 TruthEntry& entry) {
    const double cos_h = std::cos(c.heading);
    const double sin_h = std::sin(c.heading);
    const int x0 = std::max(0, static_cast<int>(std::floor(c.pos.x - c.semi_major - 1)));
    const int x1 = std::min(cfg.width - 1,
                            static_cast<int>(std::ceil(c.pos.x + c.semi_major + 1)));
    const int y0 = std::max(0, static_cast<int>(std::floor(c.pos.y - c.semi_major - 1)));
    const int y1 = std::min(cfg.height - 1,
                            static_cast<int>(std::ceil(c.pos.y + c.semi_major + 1)));

    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const double dx = x - c.pos.x;
            const double dy = y - c.pos.y;
            const double rx = (dx * cos_h + dy * sin_h) / c.semi_major;
            const double ry = (-dx * sin_h + dy * cos_h) / c.semi_minor;
            const double u = rx * rx + ry * ry;
            if (u > 1.0) continue;
            const double value = cfg.background_level +
                                 (c.base_intensity - cfg.background_level) *
                                     (1.0 - cfg.intensity.falloff * u);
            double& slot = buf[static_cast<size_t>(y) * cfg.width + x];
            slot = std::max(slot, value);
            entry.pixels.emplace_back(x, y);
        }
    }
    entry.visible = !entry.pixels.empty();
}

}  // namespace

SequenceData generate_sequence(const SynthConfig& cfg) {
    validate(cfg);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<CellSim> cells(cfg.n_cells);
    const double margin = std::min(60.0, std::min(cfg.width, cfg.height) / 6.0);
    for (int i = 0; i < cfg.n_cells; ++i) {
        CellSim& c = cells[i];
        const double area = cfg.size_min + (cfg.size_max - cfg.size_min) * unit(rng);
        const double aspect = 1.7 + unit(rng);
        c.semi_major = std::sqrt(area * aspect / kPi);
        c.semi_minor = std::sqrt(area / (aspect * kPi));
        c.speed = cfg.speed_min + (cfg.speed_max - cfg.speed_min) * unit(rng);
        c.heading = 2.0 * kPi * unit(rng);
        c.base_intensity = std::clamp(
            cfg.intensity.cell_base +
                cfg.intensity.base_jitter * (2.0 * unit(rng) - 1.0),
            cfg.background_level + 30.0, 255.0);
        for (int attempt = 0; attempt < 400; ++attempt) {
            c.pos = {margin + (cfg.width - 1 - 2 * margin) * unit(rng),
                     margin + (cfg.height - 1 - 2 * margin) * unit(rng)};
            bool clear = true;
            for (int j = 0; j < i; ++j)
                if (distance(c.pos, cells[j].pos) < 90.0) clear = false;
            if (clear) break;
        }
    }

    std::vector<ScriptedEvent> plan = plan_events(cfg, rng);

    SequenceData out;
    out.frames.reserve(cfg.frames);
    const uint8_t bg = static_cast<uint8_t>(std::lround(
        std::clamp(cfg.background_level, 0.0, 255.0)));
    std::vector<double> buf;
    std::normal_distribution<double> noise(0.0, std::max(cfg.noise_sigma, 1e-12));
    size_t next_event = 0;

    for (int k = 0; k < cfg.frames; ++k) {
        if (k > 0)
            for (CellSim& c : cells) advance(c, k, cfg, rng);

        while (next_event < plan.size() && plan[next_event].start == k) {
            const ScriptedEvent& ev = plan[next_event++];
            if (ev.kind == ScriptedEvent::Kind::Meet)
                start_meet(cells, ev, k, cfg, rng);
            else
                start_border(cells, ev, cfg);
        }

        buf.assign(static_cast<size_t>(cfg.width) * cfg.height, cfg.background_level);
        for (int i = 0; i < cfg.n_cells; ++i) {
            TruthEntry entry;
            entry.frame = k;
            entry.id = i + 1;
            entry.center = cells[i].pos;
            render_cell(cells[i], buf, cfg, entry);
            out.truth.entries.push_back(std::move(entry));
        }

        GrayFrame frame(cfg.width, cfg.height, bg, k);
        for (size_t p = 0; p < buf.size(); ++p) {
            double v = buf[p];
            if (cfg.noise_sigma > 0.0) v += noise(rng);
            frame.pixels[p] = static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
        out.frames.push_back(std::move(frame));
    }
    return out;
}

TrainingSet label_pairs(const std::vector<GrayFrame>& frames,
                        const GroundTruth& truth, int gap,
                        const SegmentationParams& seg_params, double pair_radius) {
    if (gap < 1) throw std::invalid_argument("label_pairs: gap must be >= 1");
    TrainingSet set;
    if (frames.empty()) return set;
    if (truth.entries.empty()) throw std::invalid_argument("label_pairs: no ground truth");

    const int n_frames = static_cast<int>(frames.size());
    const int width = frames[0].width;

    // Truth entries grouped by frame.
    std::vector<std::vector<const TruthEntry*>> per_frame(n_frames);
    for (const TruthEntry& e : truth.entries) {
        if (e.frame < 0 || e.frame >= n_frames)
            throw std::invalid_argument("label_pairs: truth frame out of range");
        per_frame[e.frame].push_back(&e);
    }

    const int window = std::min<int>(seg_params.bg_window, n_frames);
    const BackgroundModel bg = compute_background(frames, window);

    struct FrameData {
        std::vector<Region> regions;
        std::vector<FeatureSet> features;
        std::vector<int> owner;                 // truth id or -1
        std::vector<char> blob;                 // no cell owns a majority
        std::unordered_map<int, int> by_owner;  // truth id -> region index
    };
    std::vector<FrameData> data(n_frames);

    for (int k = 0; k < n_frames; ++k) {
        FrameData& fd = data[k];
        fd.regions = segment_frame(frames[k], bg, seg_params);
        fd.features.reserve(fd.regions.size());
        for (const Region& r : fd.regions) fd.features.push_back(extract_features(r));

        // Pixel ownership: each truth pixel belongs to the closest covering
        // cell, so merged blobs split their votes.
        std::unordered_map<std::int64_t, const TruthEntry*> pixel_owner;
        for (const TruthEntry* e : per_frame[k]) {
            for (const auto& [px, py] : e->pixels) {
                const std::int64_t key = static_cast<std::int64_t>(py) * width + px;
                auto [it, inserted] = pixel_owner.try_emplace(key, e);
                if (!inserted) {
                    const Vec2 p{static_cast<double>(px), static_cast<double>(py)};
                    if (distance(p, e->center) < distance(p, it->second->center))
                        it->second = e;
                }
            }
        }

        fd.owner.assign(fd.regions.size(), -1);
        fd.blob.assign(fd.regions.size(), 0);
        for (size_t r = 0; r < fd.regions.size(); ++r) {
            std::unordered_map<int, int> votes;
            for (const RegionPixel& px : fd.regions[r].pixels) {
                auto it = pixel_owner.find(static_cast<std::int64_t>(px.y) * width + px.x);
                if (it != pixel_owner.end()) ++votes[it->second->id];
            }
            int best_id = -1, best_count = 0;
            for (const auto& [id, count] : votes)
                if (count > best_count || (count == best_count && id < best_id)) {
                    best_id = id;
                    best_count = count;
                }
            // A region counts as a view of a cell only when that cell owns
            // nearly all of it. Regions without even a majority owner are
            // merged blobs, kept as explicit non-matches; the band in between
            // is too ambiguous for either label.
            const int area = fd.regions[r].area();
            if (10 * best_count >= 9 * area) {
                fd.owner[r] = best_id;
                fd.by_owner.try_emplace(best_id, static_cast<int>(r));
            } else if (2 * best_count <= area) {
                fd.blob[r] = 1;
            }
        }
    }

    for (int k = gap; k < n_frames; ++k) {
        const FrameData& prev = data[k - gap];
        const FrameData& cur = data[k];
        for (size_t l = 0; l < prev.regions.size(); ++l) {
            if (prev.owner[l] < 0) continue;
            TrackState state;
            state.features = prev.features[l];
            state.position = prev.features[l].centroid;
            if (k - 2 * gap >= 0) {
                const FrameData& prev2 = data[k - 2 * gap];
                auto it = prev2.by_owner.find(prev.owner[l]);
                if (it != prev2.by_owner.end())
                    state.prev_position = prev2.features[it->second].centroid;
            }
            for (size_t c = 0; c < cur.regions.size(); ++c) {
                if (cur.owner[c] < 0 && !cur.blob[c]) continue;
                if (distance(cur.features[c].centroid, state.position) > pair_radius)
                    continue;
                const DiffVector dv = diff_vector(cur.features[c], state);
                TrainingRow row;
                row.label =
                    cur.owner[c] >= 0 && cur.owner[c] == prev.owner[l] ? 1 : 0;
                if (gap == 1) {
                    row.values.assign(dv.v.begin(), dv.v.end());
                } else {
                    const TruncatedDiffVector tv = truncate(dv);
                    row.values.assign(tv.v.begin(), tv.v.end());
                }
                set.rows.push_back(std::move(row));
            }
        }
    }
    return set;
}

TrainingSet truncate_pairs(const TrainingSet& set) {
    TrainingSet out;
    out.rows.reserve(set.rows.size());
    for (const TrainingRow& row : set.rows) {
        if (row.values.size() != 23)
            throw std::invalid_argument("truncate_pairs: rows must have 23 entries");
        TrainingRow r;
        r.label = row.label;
        r.values.assign(row.values.begin() + 2, row.values.end());
        out.rows.push_back(std::move(r));
    }
    return out;
}

void write_truth(const std::string& path, const GroundTruth& truth) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write truth file: " + path);
    out << "frame,id,x,y,visible\n";
    char line[128];
    for (const TruthEntry& e : truth.entries) {
        std::snprintf(line, sizeof line, "%d,%d,%.6f,%.6f,%d\n", e.frame, e.id,
                      e.center.x, e.center.y, e.visible ? 1 : 0);
        out << line;
    }
    if (!out) throw std::runtime_error("failed writing truth file: " + path);
}

GroundTruth read_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open truth file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "frame,id,x,y,visible")
        throw std::runtime_error("bad truth file header: " + path);

    GroundTruth truth;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        TruthEntry e;
        int visible = 0;
        if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%d", &e.frame, &e.id,
                        &e.center.x, &e.center.y, &visible) != 5)
            throw std::runtime_error("bad truth row at " + path + ":" +
                                     std::to_string(line_no));
        e.visible = visible != 0;
        truth.entries.push_back(std::move(e));
    }
    return truth;
}

}  // namespace celltrack
