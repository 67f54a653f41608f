#include "npr/npr.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <limits>

#include "npr/error.hpp"

namespace npr {

void validate_grid(const GridSpec& g) {
    if (g.l != 2 && g.l != 3)
        throw ConfigError("grid size l must be 2 or 3, got " + std::to_string(g.l));
    if (g.pivot == PivotKind::Index && (g.j < 1 || g.j > g.l * g.l))
        throw ConfigError("pivot index " + std::to_string(g.j) + " out of range 1.." +
                          std::to_string(g.l * g.l));
}

std::string pivot_to_string(const GridSpec& g) {
    switch (g.pivot) {
        case PivotKind::Index: return "index:" + std::to_string(g.j);
        case PivotKind::Avg: return "avg";
        case PivotKind::Max: return "max";
    }
    return "?";
}

GridSpec grid_from_strings(int l, const std::string& pivot) {
    GridSpec g;
    g.l = l;
    if (pivot == "avg") {
        g.pivot = PivotKind::Avg;
    } else if (pivot == "max") {
        g.pivot = PivotKind::Max;
    } else if (pivot.rfind("index:", 0) == 0) {
        g.pivot = PivotKind::Index;
        try {
            g.j = std::stoi(pivot.substr(6));
        } catch (const std::exception&) {
            throw ConfigError("bad pivot spec '" + pivot + "'");
        }
    } else {
        throw ConfigError("bad pivot spec '" + pivot + "' (want index:J, avg or max)");
    }
    validate_grid(g);
    return g;
}

NprMap extract_npr(const ImageTensor& image, const GridSpec& grid) {
    validate_grid(grid);
    if (image.height <= 0 || image.width <= 0 || image.data.empty())
        throw ConfigError("extract_npr: empty image");
    if (image.channels != 1 && image.channels != 3)
        throw ConfigError("extract_npr: channels must be 1 or 3, got " +
                          std::to_string(image.channels));

    const int l = grid.l;
    const int ch = image.channels;
    const int out_h = image.height - image.height % l;
    const int out_w = image.width - image.width % l;
    if (out_h == 0 || out_w == 0)
        throw ConfigError("extract_npr: image smaller than one grid");
    const int off_y = (image.height - out_h) / 2;
    const int off_x = (image.width - out_w) / 2;

    NprMap out;
    out.height = out_h;
    out.width = out_w;
    out.channels = ch;
    out.grid = grid;
    out.data.assign(static_cast<size_t>(out_h) * out_w * ch, 0.0f);

    const int n = l * l;
    double w[9];
    for (int c = 0; c < ch; ++c) {
        for (int gy = 0; gy < out_h; gy += l) {
            for (int gx = 0; gx < out_w; gx += l) {
                for (int i = 0; i < n; ++i)
                    w[i] = image.at(off_y + gy + i / l, off_x + gx + i % l, c);
                switch (grid.pivot) {
                    case PivotKind::Index: {
                        const double p = w[grid.j - 1];
                        for (int i = 0; i < n; ++i)
                            out.at(gy + i / l, gx + i % l, c) = static_cast<float>(w[i] - p);
                        break;
                    }
                    case PivotKind::Avg: {
                        // (n*w_i - sum)/n keeps differences exact for pixel
                        // values on a dyadic grid, so shift/scale identities
                        // hold bit-for-bit.
                        double sum = 0.0;
                        for (int i = 0; i < n; ++i) sum += w[i];
                        for (int i = 0; i < n; ++i)
                            out.at(gy + i / l, gx + i % l, c) =
                                static_cast<float>((n * w[i] - sum) / n);
                        break;
                    }
                    case PivotKind::Max: {
                        double p = w[0];
                        for (int i = 1; i < n; ++i) p = std::max(p, w[i]);
                        for (int i = 0; i < n; ++i)
                            out.at(gy + i / l, gx + i % l, c) = static_cast<float>(w[i] - p);
                        break;
                    }
                }
            }
        }
    }
    return out;
}

ImageTensor npr_heatmap(const NprMap& map, int channel) {
    if (channel < 0 || channel >= map.channels)
        throw ConfigError("npr_heatmap: channel " + std::to_string(channel) +
                          " out of range for " + std::to_string(map.channels) + " channels");
    ImageTensor out(map.height, map.width, 1);
    float lo = std::numeric_limits<float>::max();
    float hi = std::numeric_limits<float>::lowest();
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            float a = std::fabs(map.at(y, x, channel));
            lo = std::min(lo, a);
            hi = std::max(hi, a);
        }
    }
    const float span = hi - lo;
    if (span <= 0.0f) return out;  // constant magnitude, including all-zero
    for (int y = 0; y < map.height; ++y)
        for (int x = 0; x < map.width; ++x)
            out.at(y, x, 0) = (std::fabs(map.at(y, x, channel)) - lo) / span;
    return out;
}

NprMap npr_difference(const NprMap& a, const NprMap& b) {
    if (!a.same_shape(b)) throw ConfigError("npr_difference: shape mismatch");
    if (!(a.grid == b.grid)) throw ConfigError("npr_difference: grid mismatch");
    NprMap out = a;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = a.data[i] - b.data[i];
    return out;
}

namespace {

constexpr char kMagic[4] = {'N', 'P', 'R', '1'};
constexpr uint8_t kPivotAvg = 254;
constexpr uint8_t kPivotMax = 255;

void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

}  // namespace

void write_npr_file(const std::string& path, const NprMap& map) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for write: " + path);
    os.write(kMagic, 4);
    put_u32(os, static_cast<uint32_t>(map.height));
    put_u32(os, static_cast<uint32_t>(map.width));
    put_u32(os, static_cast<uint32_t>(map.channels));
    uint8_t l = static_cast<uint8_t>(map.grid.l);
    uint8_t code = map.grid.pivot == PivotKind::Avg   ? kPivotAvg
                   : map.grid.pivot == PivotKind::Max ? kPivotMax
                                                      : static_cast<uint8_t>(map.grid.j);
    os.write(reinterpret_cast<const char*>(&l), 1);
    os.write(reinterpret_cast<const char*>(&code), 1);
    static_assert(sizeof(float) == 4);
    // f32 payload is little-endian on every platform we target
    os.write(reinterpret_cast<const char*>(map.data.data()),
             static_cast<std::streamsize>(map.data.size() * sizeof(float)));
    if (!os) throw IoError("short write: " + path);
}

NprMap read_npr_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw ConfigError("not an NPR1 file: " + path);
    NprMap map;
    map.height = static_cast<int>(get_u32(is));
    map.width = static_cast<int>(get_u32(is));
    map.channels = static_cast<int>(get_u32(is));
    uint8_t l = 0, code = 0;
    is.read(reinterpret_cast<char*>(&l), 1);
    is.read(reinterpret_cast<char*>(&code), 1);
    if (!is) throw ConfigError("truncated NPR1 header: " + path);
    map.grid.l = l;
    if (code == kPivotAvg) {
        map.grid.pivot = PivotKind::Avg;
    } else if (code == kPivotMax) {
        map.grid.pivot = PivotKind::Max;
    } else {
        map.grid.pivot = PivotKind::Index;
        map.grid.j = code;
    }
    validate_grid(map.grid);
    if (map.height <= 0 || map.width <= 0 || (map.channels != 1 && map.channels != 3) ||
        map.height % map.grid.l != 0 || map.width % map.grid.l != 0)
        throw ConfigError("bad NPR1 dimensions: " + path);
    size_t count = static_cast<size_t>(map.height) * map.width * map.channels;
    map.data.resize(count);
    is.read(reinterpret_cast<char*>(map.data.data()),
            static_cast<std::streamsize>(count * sizeof(float)));
    if (!is) throw ConfigError("truncated NPR1 payload: " + path);
    return map;
}

}  // namespace npr
