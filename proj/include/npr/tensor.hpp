#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "npr/error.hpp"
#include "npr/image.hpp"

namespace npr {

// (batch, channels, height, width), row-major.
template <typename T>
struct Tensor4 {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<T> v;

    Tensor4() = default;
    Tensor4(int n_, int c_, int h_, int w_) : n(n_), c(c_), h(h_), w(w_) {
        if (n_ < 0 || c_ < 0 || h_ < 0 || w_ < 0) throw ConfigError("Tensor4: negative dim");
        v.assign(static_cast<size_t>(n_) * c_ * h_ * w_, T(0));
    }

    size_t size() const { return v.size(); }

    T* plane(int in, int ic) {
        return v.data() + (static_cast<size_t>(in) * c + ic) * h * w;
    }
    const T* plane(int in, int ic) const {
        return v.data() + (static_cast<size_t>(in) * c + ic) * h * w;
    }

    T& at(int in, int ic, int iy, int ix) {
        return v[((static_cast<size_t>(in) * c + ic) * h + iy) * w + ix];
    }
    T at(int in, int ic, int iy, int ix) const {
        return v[((static_cast<size_t>(in) * c + ic) * h + iy) * w + ix];
    }

    bool same_shape(const Tensor4& o) const {
        return n == o.n && c == o.c && h == o.h && w == o.w;
    }

    bool all_finite() const {
        for (T x : v)
            if (!std::isfinite(static_cast<double>(x))) return false;
        return true;
    }

    template <typename U>
    Tensor4<U> cast() const {
        Tensor4<U> out(n, c, h, w);
        for (size_t i = 0; i < v.size(); ++i) out.v[i] = static_cast<U>(v[i]);
        return out;
    }
};

// HWC image -> 1xCxHxW tensor
template <typename T = float>
Tensor4<T> image_to_chw(const ImageTensor& img) {
    Tensor4<T> t(1, img.channels, img.height, img.width);
    for (int c = 0; c < img.channels; ++c)
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) t.at(0, c, y, x) = static_cast<T>(img.at(y, x, c));
    return t;
}

template <typename T>
ImageTensor chw_to_image(const Tensor4<T>& t) {
    if (t.n != 1) throw ConfigError("chw_to_image: batch must be 1");
    ImageTensor img(t.h, t.w, t.c);
    for (int c = 0; c < t.c; ++c)
        for (int y = 0; y < t.h; ++y)
            for (int x = 0; x < t.w; ++x) img.at(y, x, c) = static_cast<float>(t.at(0, c, y, x));
    return img;
}

}  // namespace npr
