#include "celltrack/frame_io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace celltrack {

namespace fs = std::filesystem;

namespace {

constexpr char kRawMagic[8] = {'C', 'T', 'R', 'A', 'W', '0', '0', '1'};

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("raw sequence: truncated header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

// Skips whitespace and '#' comment lines in a PGM header.
int read_pgm_int(std::istream& in) {
    int c = in.get();
    while (c != EOF && (std::isspace(c) || c == '#')) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        }
        c = in.get();
    }
    if (c == EOF || !std::isdigit(c)) throw std::runtime_error("pgm: malformed header");
    int value = 0;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        c = in.get();
    }
    return value;
}

}  // namespace

GrayFrame read_pgm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("pgm: cannot open " + path.string());
    char magic[2];
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '5')
        throw std::runtime_error("pgm: not a binary P5 file: " + path.string());
    int w = read_pgm_int(in);
    int h = read_pgm_int(in);
    int maxval = read_pgm_int(in);
    if (w <= 0 || h <= 0 || maxval != 255)
        throw std::runtime_error("pgm: unsupported geometry or maxval in " + path.string());
    GrayFrame frame(w, h);
    in.read(reinterpret_cast<char*>(frame.pixels.data()),
            static_cast<std::streamsize>(frame.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(frame.pixels.size()))
        throw std::runtime_error("pgm: truncated pixel data in " + path.string());
    return frame;
}

void write_pgm(const GrayFrame& frame, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("pgm: cannot write " + path.string());
    out << "P5\n" << frame.width << " " << frame.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(frame.pixels.data()),
              static_cast<std::streamsize>(frame.pixels.size()));
    if (!out) throw std::runtime_error("pgm: write failed for " + path.string());
}

std::string frame_filename(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%06d.pgm", index);
    return buf;
}

std::vector<GrayFrame> read_frame_dir(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".pgm")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("no .pgm frames in " + dir.string());
    std::vector<GrayFrame> frames;
    frames.reserve(files.size());
    for (const auto& file : files) {
        GrayFrame f = read_pgm(file);
        f.index = static_cast<int>(frames.size());
        if (!frames.empty() && !f.same_shape(frames.front()))
            throw std::runtime_error("frame dimension mismatch at " + file.string());
        frames.push_back(std::move(f));
    }
    return frames;
}

void write_frame_dir(const std::vector<GrayFrame>& frames, const fs::path& dir) {
    fs::create_directories(dir);
    for (std::size_t i = 0; i < frames.size(); ++i)
        write_pgm(frames[i], dir / frame_filename(static_cast<int>(i)));
}

std::vector<GrayFrame> read_raw_sequence(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("raw sequence: cannot open " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kRawMagic, 8) != 0)
        throw std::runtime_error("raw sequence: bad magic in " + path.string());
    std::uint32_t w = read_u32(in);
    std::uint32_t h = read_u32(in);
    std::uint32_t count = read_u32(in);
    if (w == 0 || h == 0) throw std::runtime_error("raw sequence: zero dimensions");
    std::vector<GrayFrame> frames;
    frames.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        GrayFrame f(static_cast<int>(w), static_cast<int>(h), 0, static_cast<int>(i));
        in.read(reinterpret_cast<char*>(f.pixels.data()),
                static_cast<std::streamsize>(f.pixels.size()));
        if (in.gcount() != static_cast<std::streamsize>(f.pixels.size()))
            throw std::runtime_error("raw sequence: truncated frame data");
        frames.push_back(std::move(f));
    }
    return frames;
}

void write_raw_sequence(const std::vector<GrayFrame>& frames, const fs::path& path) {
    if (frames.empty()) throw std::invalid_argument("raw sequence: no frames to write");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("raw sequence: cannot write " + path.string());
    out.write(kRawMagic, 8);
    write_u32(out, static_cast<std::uint32_t>(frames.front().width));
    write_u32(out, static_cast<std::uint32_t>(frames.front().height));
    write_u32(out, static_cast<std::uint32_t>(frames.size()));
    for (const auto& f : frames) {
        if (!f.same_shape(frames.front()))
            throw std::invalid_argument("raw sequence: frame dimension mismatch");
        out.write(reinterpret_cast<const char*>(f.pixels.data()),
                  static_cast<std::streamsize>(f.pixels.size()));
    }
    if (!out) throw std::runtime_error("raw sequence: write failed for " + path.string());
}

std::vector<GrayFrame> load_frames(const fs::path& path) {
    if (fs::is_directory(path)) return read_frame_dir(path);
    return read_raw_sequence(path);
}

}  // namespace celltrack
