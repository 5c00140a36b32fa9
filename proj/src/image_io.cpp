#include "sgnet/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include "sgnet/error.hpp"

namespace sgnet {

namespace {

struct Header {
    std::string magic;
    int64_t width = 0;
    int64_t height = 0;
    int maxval = 0;
    std::optional<std::pair<double, double>> depth_range;
};

void parse_range_comment(const std::string& comment, Header& h) {
    std::istringstream is(comment);
    std::string key;
    double lo = 0.0, hi = 0.0;
    if (is >> key && key == "depth_range" && is >> lo >> hi) h.depth_range = {lo, hi};
}

// Next whitespace-delimited header token, collecting '#' comments along the way.
std::string next_token(std::istream& in, Header& h) {
    std::string tok;
    for (;;) {
        int ch = in.peek();
        if (ch == EOF) break;
        if (ch == '#') {
            std::string comment;
            std::getline(in, comment);
            parse_range_comment(comment.substr(1), h);
            if (!tok.empty()) break;
            continue;
        }
        if (std::isspace(ch)) {
            in.get();
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(in.get()));
    }
    return tok;
}

int64_t parse_int(const std::string& tok, const char* what) {
    int64_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || v <= 0)
        throw FormatError(std::string("netpbm: invalid ") + what + " '" + tok + "'");
    return v;
}

Header read_header(std::istream& in, const char* expected_magic) {
    Header h;
    char magic[2] = {0, 0};
    if (!in.read(magic, 2)) throw FormatError("netpbm: missing magic");
    h.magic.assign(magic, 2);
    if (h.magic != expected_magic)
        throw FormatError("netpbm: bad magic '" + h.magic + "', expected " + expected_magic);
    h.width = parse_int(next_token(in, h), "width");
    h.height = parse_int(next_token(in, h), "height");
    const int64_t maxval = parse_int(next_token(in, h), "maxval");
    if (maxval > 65535) throw FormatError("netpbm: maxval above 65535");
    h.maxval = static_cast<int>(maxval);
    // next_token consumed exactly one whitespace byte after maxval.
    return h;
}

std::vector<uint32_t> read_samples(std::istream& in, const Header& h, int64_t count) {
    const int bytes = h.maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(static_cast<size_t>(count * bytes));
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size()))
        throw FormatError("netpbm: truncated payload (" + std::to_string(in.gcount()) + " of " +
                          std::to_string(raw.size()) + " bytes)");
    std::vector<uint32_t> out(static_cast<size_t>(count));
    for (int64_t i = 0; i < count; ++i) {
        out[i] = bytes == 2 ? (static_cast<uint32_t>(raw[2 * i]) << 8) | raw[2 * i + 1] : raw[i];
        if (out[i] > static_cast<uint32_t>(h.maxval)) throw FormatError("netpbm: sample above maxval");
    }
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    return out;
}

}  // namespace

DepthImage read_depth_pgm(std::istream& in) {
    Header h = read_header(in, "P5");
    if (!h.depth_range) throw FormatError("pgm: missing '#depth_range z_min z_max' comment");
    auto samples = read_samples(in, h, h.width * h.height);
    DepthImage img;
    img.z_min = h.depth_range->first;
    img.z_max = h.depth_range->second;
    img.bits = h.maxval > 255 ? 16 : 8;
    std::vector<double> z(samples.size());
    const double span = img.z_max - img.z_min;
    for (size_t i = 0; i < z.size(); ++i)
        z[i] = img.z_min + span * static_cast<double>(samples[i]) / static_cast<double>(h.maxval);
    img.depth = Tensor::from_data({1, 1, h.height, h.width}, std::move(z));
    return img;
}

DepthImage read_depth_pgm(const std::string& path) {
    auto in = open_in(path);
    return read_depth_pgm(in);
}

void write_depth_pgm(std::ostream& out, const Tensor& depth, double z_min, double z_max, int bits) {
    const Shape& s = depth.shape();
    if (s.n != 1 || s.c != 1) throw ShapeError("pgm: expected a [1,1,H,W] depth map, got " + s.str());
    if (bits != 8 && bits != 16) throw ConfigError("pgm: bits must be 8 or 16");
    if (!(z_max > z_min)) throw ConfigError("pgm: depth range must satisfy z_min < z_max");
    const int maxval = bits == 16 ? 65535 : 255;
    out << "P5\n#depth_range " << format_double(z_min) << ' ' << format_double(z_max) << '\n'
        << s.w << ' ' << s.h << '\n'
        << maxval << '\n';
    std::vector<unsigned char> raw;
    raw.reserve(static_cast<size_t>(s.numel() * (bits / 8)));
    for (double z : depth.data()) {
        const double t = std::clamp((z - z_min) / (z_max - z_min), 0.0, 1.0);
        const auto q = static_cast<uint32_t>(std::lround(t * maxval));
        if (bits == 16) raw.push_back(static_cast<unsigned char>(q >> 8));
        raw.push_back(static_cast<unsigned char>(q & 0xFF));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw Error("pgm: write failed");
}

void write_depth_pgm(const std::string& path, const Tensor& depth, double z_min, double z_max, int bits) {
    auto out = open_out(path);
    write_depth_pgm(out, depth, z_min, z_max, bits);
}

Tensor read_rgb_ppm(std::istream& in) {
    Header h = read_header(in, "P6");
    if (h.maxval > 255) throw FormatError("ppm: only 8-bit RGB is supported");
    const int64_t plane = h.width * h.height;
    auto samples = read_samples(in, h, 3 * plane);
    std::vector<double> rgb(samples.size());
    for (int64_t i = 0; i < plane; ++i)
        for (int k = 0; k < 3; ++k)
            rgb[k * plane + i] = static_cast<double>(samples[3 * i + k]) / static_cast<double>(h.maxval);
    return Tensor::from_data({1, 3, h.height, h.width}, std::move(rgb));
}

Tensor read_rgb_ppm(const std::string& path) {
    auto in = open_in(path);
    return read_rgb_ppm(in);
}

void write_rgb_ppm(std::ostream& out, const Tensor& rgb) {
    const Shape& s = rgb.shape();
    if (s.n != 1 || s.c != 3) throw ShapeError("ppm: expected a [1,3,H,W] image, got " + s.str());
    out << "P6\n" << s.w << ' ' << s.h << "\n255\n";
    const int64_t plane = s.plane();
    auto d = rgb.data();
    std::vector<unsigned char> raw(static_cast<size_t>(3 * plane));
    for (int64_t i = 0; i < plane; ++i)
        for (int k = 0; k < 3; ++k)
            raw[3 * i + k] = static_cast<unsigned char>(std::lround(std::clamp(d[k * plane + i], 0.0, 1.0) * 255.0));
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw Error("ppm: write failed");
}

void write_rgb_ppm(const std::string& path, const Tensor& rgb) {
    auto out = open_out(path);
    write_rgb_ppm(out, rgb);
}

Tensor read_image(const std::string& path) {
    auto in = open_in(path);
    char magic[2] = {0, 0};
    in.read(magic, 2);
    in.seekg(0);
    if (magic[0] == 'P' && magic[1] == '5') return read_depth_pgm(in).depth;
    if (magic[0] == 'P' && magic[1] == '6') return read_rgb_ppm(in);
    throw FormatError("'" + path + "' is neither a binary PGM nor a binary PPM");
}

}  // namespace sgnet
