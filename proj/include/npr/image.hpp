#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "npr/error.hpp"

namespace npr {

// H x W x C image, float32 in [0,1], row-major, channel-last.
struct ImageTensor {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<float> data;

    ImageTensor() = default;
    ImageTensor(int h, int w, int c) : height(h), width(w), channels(c) {
        if (h <= 0 || w <= 0 || (c != 1 && c != 3))
            throw ConfigError("ImageTensor: bad dimensions " + std::to_string(h) + "x" +
                              std::to_string(w) + "x" + std::to_string(c));
        data.assign(static_cast<size_t>(h) * w * c, 0.0f);
    }

    size_t size() const { return data.size(); }

    float& at(int y, int x, int c) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    float at(int y, int x, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }

    bool same_shape(const ImageTensor& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }
};

inline void validate_unit_range(const ImageTensor& img, const char* what) {
    for (float v : img.data) {
        if (!std::isfinite(v) || v < 0.0f || v > 1.0f)
            throw NumericError(std::string(what) + ": value outside [0,1]");
    }
}

inline float clamp01(float v) { return v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v); }

// Snap to the 8-bit grid the PNG writer uses, so in-memory pixels match what
// a reader of the stored file would see.
inline ImageTensor quantize8(const ImageTensor& img) {
    ImageTensor out = img;
    for (float& v : out.data) {
        int q = static_cast<int>(std::lround(clamp01(v) * 255.0f));
        v = static_cast<float>(q) / 255.0f;
    }
    return out;
}

inline ImageTensor gray_to_rgb(const ImageTensor& img) {
    if (img.channels == 3) return img;
    ImageTensor out(img.height, img.width, 3);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.at(y, x, 0);
    return out;
}

}  // namespace npr
