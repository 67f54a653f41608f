#pragma once

#include <string>

#include "npr/image.hpp"

namespace npr {

// Pivot choice inside each l x l grid: a fixed member (1-based, row-major),
// the grid mean, or the grid max.
enum class PivotKind : uint8_t { Index, Avg, Max };

struct GridSpec {
    int l = 2;
    PivotKind pivot = PivotKind::Index;
    int j = 1;  // only meaningful for PivotKind::Index, 1-based

    static GridSpec index(int l, int j) { return GridSpec{l, PivotKind::Index, j}; }
    static GridSpec avg(int l) { return GridSpec{l, PivotKind::Avg, 0}; }
    static GridSpec max(int l) { return GridSpec{l, PivotKind::Max, 0}; }

    bool operator==(const GridSpec& o) const {
        if (l != o.l || pivot != o.pivot) return false;
        return pivot != PivotKind::Index || j == o.j;
    }
};

void validate_grid(const GridSpec& g);

// "index:1", "avg", "max"
std::string pivot_to_string(const GridSpec& g);
GridSpec grid_from_strings(int l, const std::string& pivot);

// Per-grid pixel differences; same layout as ImageTensor but values in [-1,1].
struct NprMap {
    int height = 0;
    int width = 0;
    int channels = 0;
    GridSpec grid;
    std::vector<float> data;

    float& at(int y, int x, int c) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    float at(int y, int x, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    bool same_shape(const NprMap& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }
};

// Partitions the image into non-overlapping, top-left-aligned l x l grids per
// channel and subtracts the grid pivot from every member. Inputs whose sides
// are not divisible by l are center-cropped first.
NprMap extract_npr(const ImageTensor& image, const GridSpec& grid);

// |value|, min-max normalized over the chosen channel. Constant input maps to
// all zeros.
ImageTensor npr_heatmap(const NprMap& map, int channel);

// Element-wise a - b; shapes and grids must match.
NprMap npr_difference(const NprMap& a, const NprMap& b);

// NPR1 container: magic "NPR1", LE u32 height/width/channels, u8 l, u8 pivot
// code (j for index pivots, 254 avg, 255 max), then f32 values row-major
// channel-last.
void write_npr_file(const std::string& path, const NprMap& map);
NprMap read_npr_file(const std::string& path);

}  // namespace npr
