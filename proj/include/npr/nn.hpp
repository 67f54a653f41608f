#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "npr/parallel.hpp"
#include "npr/rng.hpp"
#include "npr/tensor.hpp"

namespace npr::nn {

inline int floor_div(int a, int b) {
    int q = a / b, r = a % b;
    return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}
inline int ceil_div(int a, int b) { return -floor_div(-a, b); }

template <typename T>
struct ConvLayer {
    Tensor4<T> w;  // (out_c, in_c, k, k)
    std::vector<T> b;
    int stride = 1;
    int pad = 1;

    ConvLayer() = default;
    ConvLayer(int out_c, int in_c, int k, int stride_, int pad_)
        : w(out_c, in_c, k, k), b(out_c, T(0)), stride(stride_), pad(pad_) {}

    int out_channels() const { return w.n; }
    int in_channels() const { return w.c; }
    int kernel() const { return w.h; }

    template <typename U>
    ConvLayer<U> cast() const {
        ConvLayer<U> o;
        o.w = w.template cast<U>();
        o.b.assign(b.begin(), b.end());
        o.stride = stride;
        o.pad = pad;
        return o;
    }
};

inline int conv_out_size(int in, int k, int stride, int pad) {
    return (in + 2 * pad - k) / stride + 1;
}

// Cross-correlation with zero padding. Parallelises over (batch, out_channel);
// each output element is accumulated in one fixed order, so results do not
// depend on the worker count. The 3-tap stride-1 kernel is fused per row to
// keep the stencil SIMD-friendly without any floating-point reassociation.
template <typename T>
Tensor4<T> conv2d_forward(const Tensor4<T>& x, const ConvLayer<T>& layer, int jobs = 1) {
    const int k = layer.kernel();
    if (k % 2 == 0) throw ConfigError("conv2d: kernel size must be odd");
    if (x.c != layer.in_channels())
        throw ConfigError("conv2d: input has " + std::to_string(x.c) + " channels, layer wants " +
                          std::to_string(layer.in_channels()));
    const int s = layer.stride, p = layer.pad;
    const int oh = conv_out_size(x.h, k, s, p);
    const int ow = conv_out_size(x.w, k, s, p);
    if (oh <= 0 || ow <= 0) throw ConfigError("conv2d: output would be empty");

    Tensor4<T> out(x.n, layer.out_channels(), oh, ow);
    const int oc_n = layer.out_channels();
    const bool fast3 = (s == 1 && k == 3);
    const int core_lo = std::max(0, p);
    const int core_hi = std::min(ow - 1, x.w - 3 + p);  // all three taps in range

    parallel_for(static_cast<size_t>(x.n) * oc_n, jobs, [&](size_t task) {
        const int in = static_cast<int>(task) / oc_n;
        const int oc = static_cast<int>(task) % oc_n;
        std::vector<T> row(ow);
        T* out_plane = out.plane(in, oc);
        for (int oy = 0; oy < oh; ++oy) {
            std::fill(row.begin(), row.end(), layer.b[oc]);
            for (int ic = 0; ic < x.c; ++ic) {
                const T* x_plane = x.plane(in, ic);
                for (int ky = 0; ky < k; ++ky) {
                    const int iy = oy * s + ky - p;
                    if (iy < 0 || iy >= x.h) continue;
                    const T* x_row = x_plane + static_cast<size_t>(iy) * x.w;
                    if (fast3) {
                        const T w0 = layer.w.at(oc, ic, ky, 0);
                        const T w1 = layer.w.at(oc, ic, ky, 1);
                        const T w2 = layer.w.at(oc, ic, ky, 2);
                        const T* src = x_row - p;
                        T* __restrict r = row.data();
                        for (int ox = core_lo; ox <= core_hi; ++ox)
                            r[ox] += w0 * src[ox] + w1 * src[ox + 1] + w2 * src[ox + 2];
                        for (int kx = 0; kx < 3; ++kx) {  // edge columns
                            const T wv = layer.w.at(oc, ic, ky, kx);
                            const int lo = std::max(0, p - kx);
                            const int hi = std::min(ow - 1, x.w - 1 + p - kx);
                            for (int ox = lo; ox < core_lo && ox <= hi; ++ox)
                                r[ox] += wv * x_row[ox + kx - p];
                            for (int ox = std::max({lo, core_lo, core_hi + 1}); ox <= hi; ++ox)
                                r[ox] += wv * x_row[ox + kx - p];
                        }
                    } else {
                        for (int kx = 0; kx < k; ++kx) {
                            const T wv = layer.w.at(oc, ic, ky, kx);
                            const int lo = std::max(0, ceil_div(p - kx, s));
                            const int hi = std::min(ow - 1, floor_div(x.w - 1 + p - kx, s));
                            for (int ox = lo; ox <= hi; ++ox)
                                row[ox] += wv * x_row[ox * s + kx - p];
                        }
                    }
                }
            }
            std::copy(row.begin(), row.end(), out_plane + static_cast<size_t>(oy) * ow);
        }
    });
    return out;
}

// Gradients of a scalar loss w.r.t. layer parameters and, optionally, input.
// Weight and bias gradients accumulate in double.
template <typename T>
void conv2d_backward(const Tensor4<T>& x, const ConvLayer<T>& layer, const Tensor4<T>& grad_out,
                     ConvLayer<T>* grad_layer, Tensor4<T>* grad_x, int jobs = 1) {
    const int k = layer.kernel(), s = layer.stride, p = layer.pad;
    const int oh = grad_out.h, ow = grad_out.w;
    const int oc_n = layer.out_channels();

    if (grad_layer) {
        *grad_layer = ConvLayer<T>(oc_n, layer.in_channels(), k, s, p);
        // Per-row products accumulate into 8 independent lanes (mapped onto
        // SIMD by the compiler) that are combined in a fixed order, then the
        // row totals accumulate in double.
        constexpr int kLanes = 8;
        parallel_for(static_cast<size_t>(oc_n), jobs, [&](size_t occ) {
            const int oc = static_cast<int>(occ);
            double bias_acc = 0.0;
            std::vector<double> wacc(static_cast<size_t>(x.c) * k * k, 0.0);
            for (int in = 0; in < x.n; ++in) {
                const T* go_plane = grad_out.plane(in, oc);
                const size_t plane_sz = static_cast<size_t>(oh) * ow;
                for (size_t i = 0; i < plane_sz; ++i) bias_acc += static_cast<double>(go_plane[i]);
                for (int ic = 0; ic < x.c; ++ic) {
                    const T* x_plane = x.plane(in, ic);
                    for (int ky = 0; ky < k; ++ky) {
                        const int oy_lo = std::max(0, ceil_div(p - ky, s));
                        const int oy_hi = std::min(oh - 1, floor_div(x.h - 1 + p - ky, s));
                        for (int kx = 0; kx < k; ++kx) {
                            const int ox_lo = std::max(0, ceil_div(p - kx, s));
                            const int ox_hi = std::min(ow - 1, floor_div(x.w - 1 + p - kx, s));
                            double acc = 0.0;
                            for (int oy = oy_lo; oy <= oy_hi; ++oy) {
                                const int iy = oy * s + ky - p;
                                const T* go_row = go_plane + static_cast<size_t>(oy) * ow;
                                const T* x_row = x_plane + static_cast<size_t>(iy) * x.w;
                                T lanes[kLanes] = {};
                                int ox = ox_lo;
                                if (s == 1) {
                                    const T* src = x_row + kx - p;
                                    for (; ox + kLanes <= ox_hi + 1; ox += kLanes)
                                        for (int j = 0; j < kLanes; ++j)
                                            lanes[j] += go_row[ox + j] * src[ox + j];
                                    T rem = T(0);
                                    for (; ox <= ox_hi; ++ox) rem += go_row[ox] * src[ox];
                                    T row_sum = rem;
                                    for (int j = 0; j < kLanes; ++j) row_sum += lanes[j];
                                    acc += static_cast<double>(row_sum);
                                } else {
                                    for (; ox + kLanes <= ox_hi + 1; ox += kLanes)
                                        for (int j = 0; j < kLanes; ++j)
                                            lanes[j] += go_row[ox + j] *
                                                        x_row[(ox + j) * s + kx - p];
                                    T rem = T(0);
                                    for (; ox <= ox_hi; ++ox)
                                        rem += go_row[ox] * x_row[ox * s + kx - p];
                                    T row_sum = rem;
                                    for (int j = 0; j < kLanes; ++j) row_sum += lanes[j];
                                    acc += static_cast<double>(row_sum);
                                }
                            }
                            wacc[(static_cast<size_t>(ic) * k + ky) * k + kx] += acc;
                        }
                    }
                }
            }
            grad_layer->b[oc] = static_cast<T>(bias_acc);
            for (int ic = 0; ic < x.c; ++ic)
                for (int ky = 0; ky < k; ++ky)
                    for (int kx = 0; kx < k; ++kx)
                        grad_layer->w.at(oc, ic, ky, kx) = static_cast<T>(
                            wacc[(static_cast<size_t>(ic) * k + ky) * k + kx]);
        });
    }

    if (grad_x) {
        *grad_x = Tensor4<T>(x.n, x.c, x.h, x.w);
        const bool fast3 = (s == 1 && k == 3);
        // gather form for the stride-1 3-tap case: every input cell collects
        // its three contributions in one pass
        const int gx_core_lo = std::max(0, k - 1 - p);
        const int gx_core_hi = std::min(x.w - 1, ow - 1 + 0 - p);
        parallel_for(static_cast<size_t>(x.n), jobs, [&](size_t inn) {
            const int in = static_cast<int>(inn);
            for (int oc = 0; oc < oc_n; ++oc) {
                const T* go_plane = grad_out.plane(in, oc);
                for (int ic = 0; ic < x.c; ++ic) {
                    T* gx_plane = grad_x->plane(in, ic);
                    for (int ky = 0; ky < k; ++ky) {
                        const int oy_lo = std::max(0, ceil_div(p - ky, s));
                        const int oy_hi = std::min(oh - 1, floor_div(x.h - 1 + p - ky, s));
                        if (fast3) {
                            const T w0 = layer.w.at(oc, ic, ky, 0);
                            const T w1 = layer.w.at(oc, ic, ky, 1);
                            const T w2 = layer.w.at(oc, ic, ky, 2);
                            for (int oy = oy_lo; oy <= oy_hi; ++oy) {
                                const int iy = oy * s + ky - p;
                                const T* go_row = go_plane + static_cast<size_t>(oy) * ow;
                                T* __restrict gx_row = gx_plane + static_cast<size_t>(iy) * x.w;
                                const T* g = go_row + p;  // ox = ix + p - kx
                                for (int ix = gx_core_lo; ix <= gx_core_hi; ++ix)
                                    gx_row[ix] +=
                                        w0 * g[ix] + w1 * g[ix - 1] + w2 * g[ix - 2];
                                for (int kx = 0; kx < 3; ++kx) {  // edge columns
                                    const T wv = layer.w.at(oc, ic, ky, kx);
                                    const int lo = std::max(0, kx - p);
                                    const int hi = std::min(x.w - 1, ow - 1 + kx - p);
                                    for (int ix = lo; ix < gx_core_lo && ix <= hi; ++ix)
                                        gx_row[ix] += wv * go_row[ix + p - kx];
                                    for (int ix = std::max({lo, gx_core_lo, gx_core_hi + 1});
                                         ix <= hi; ++ix)
                                        gx_row[ix] += wv * go_row[ix + p - kx];
                                }
                            }
                        } else {
                            for (int kx = 0; kx < k; ++kx) {
                                const T wv = layer.w.at(oc, ic, ky, kx);
                                const int ox_lo = std::max(0, ceil_div(p - kx, s));
                                const int ox_hi = std::min(ow - 1, floor_div(x.w - 1 + p - kx, s));
                                for (int oy = oy_lo; oy <= oy_hi; ++oy) {
                                    const int iy = oy * s + ky - p;
                                    const T* go_row = go_plane + static_cast<size_t>(oy) * ow;
                                    T* gx_row = gx_plane + static_cast<size_t>(iy) * x.w;
                                    for (int ox = ox_lo; ox <= ox_hi; ++ox)
                                        gx_row[ox * s + kx - p] += wv * go_row[ox];
                                }
                            }
                        }
                    }
                }
            }
        });
    }
}

template <typename T>
Tensor4<T> relu(const Tensor4<T>& x) {
    Tensor4<T> out = x;
    for (T& v : out.v) v = v > T(0) ? v : T(0);
    return out;
}

template <typename T>
Tensor4<T> leaky_relu(const Tensor4<T>& x, T slope) {
    Tensor4<T> out = x;
    for (T& v : out.v) v = v > T(0) ? v : slope * v;
    return out;
}

// grad masked by the sign of the pre-activation
template <typename T>
Tensor4<T> relu_backward(const Tensor4<T>& pre, const Tensor4<T>& grad) {
    Tensor4<T> out = grad;
    for (size_t i = 0; i < out.v.size(); ++i)
        if (!(pre.v[i] > T(0))) out.v[i] = T(0);
    return out;
}

struct ParamRef {
    const char* name;
    float* data;
    size_t len;
};

template <typename T>
struct ParamRefT {
    const char* name;
    T* data;
    size_t len;
};

// Fixed architecture: stem conv 3->16, one residual block at 16, stride-2
// conv 16->32, one residual block at 32, global average pool, affine 32->1.
template <typename T>
struct DetectorModel {
    static constexpr int kStemChannels = 16;
    static constexpr int kDeepChannels = 32;

    ConvLayer<T> stem{kStemChannels, 3, 3, 1, 1};
    ConvLayer<T> r1a{kStemChannels, kStemChannels, 3, 1, 1};
    ConvLayer<T> r1b{kStemChannels, kStemChannels, 3, 1, 1};
    ConvLayer<T> down{kDeepChannels, kStemChannels, 3, 2, 1};
    ConvLayer<T> r2a{kDeepChannels, kDeepChannels, 3, 1, 1};
    ConvLayer<T> r2b{kDeepChannels, kDeepChannels, 3, 1, 1};
    std::vector<T> head_w = std::vector<T>(kDeepChannels, T(0));
    T head_b = T(0);

    // Conv weights uniform in +-1/sqrt(fan-in); biases and the affine head
    // start at zero so the initial output probability is exactly 0.5.
    static DetectorModel seeded(uint64_t seed) {
        DetectorModel m;
        Rng rng(seed);
        auto fill = [&rng](ConvLayer<T>& l) {
            double bound = 1.0 / std::sqrt(static_cast<double>(l.in_channels()) * l.kernel() *
                                           l.kernel());
            for (T& v : l.w.v) v = static_cast<T>(rng.uniform_sym() * bound);
        };
        fill(m.stem);
        fill(m.r1a);
        fill(m.r1b);
        fill(m.down);
        fill(m.r2a);
        fill(m.r2b);
        return m;
    }

    std::vector<ParamRefT<T>> params() {
        return {
            {"stem.w", m_w(stem), stem.w.size()},   {"stem.b", stem.b.data(), stem.b.size()},
            {"r1a.w", m_w(r1a), r1a.w.size()},      {"r1a.b", r1a.b.data(), r1a.b.size()},
            {"r1b.w", m_w(r1b), r1b.w.size()},      {"r1b.b", r1b.b.data(), r1b.b.size()},
            {"down.w", m_w(down), down.w.size()},   {"down.b", down.b.data(), down.b.size()},
            {"r2a.w", m_w(r2a), r2a.w.size()},      {"r2a.b", r2a.b.data(), r2a.b.size()},
            {"r2b.w", m_w(r2b), r2b.w.size()},      {"r2b.b", r2b.b.data(), r2b.b.size()},
            {"head.w", head_w.data(), head_w.size()}, {"head.b", &head_b, 1},
        };
    }

    size_t param_count() {
        size_t total = 0;
        for (const auto& p : params()) total += p.len;
        return total;
    }

    template <typename U>
    DetectorModel<U> cast() const {
        DetectorModel<U> o;
        o.stem = stem.template cast<U>();
        o.r1a = r1a.template cast<U>();
        o.r1b = r1b.template cast<U>();
        o.down = down.template cast<U>();
        o.r2a = r2a.template cast<U>();
        o.r2b = r2b.template cast<U>();
        o.head_w.assign(head_w.begin(), head_w.end());
        o.head_b = static_cast<U>(head_b);
        return o;
    }

private:
    static T* m_w(ConvLayer<T>& l) { return l.w.v.data(); }
};

template <typename T>
struct Trace {
    Tensor4<T> z0, a0, z1a, a1a, z1s, a1, zd, ad, z2a, a2a, z2s, a2;
    std::vector<T> gap;  // n x kDeepChannels
    std::vector<T> logits;
};

template <typename T>
void check_finite(const Tensor4<T>& t, const char* where) {
    if (!t.all_finite()) throw NumericError(std::string("non-finite activation in ") + where);
}

template <typename T>
std::vector<T> detector_forward(const DetectorModel<T>& m, const Tensor4<T>& x, Trace<T>* tr,
                                int jobs = 1) {
    if (x.c != 3) throw ConfigError("detector_forward: input must have 3 channels");
    Trace<T> local;
    Trace<T>& t = tr ? *tr : local;

    t.z0 = conv2d_forward(x, m.stem, jobs);
    check_finite(t.z0, "stem");
    t.a0 = relu(t.z0);

    t.z1a = conv2d_forward(t.a0, m.r1a, jobs);
    check_finite(t.z1a, "r1a");
    t.a1a = relu(t.z1a);
    t.z1s = conv2d_forward(t.a1a, m.r1b, jobs);
    check_finite(t.z1s, "r1b");
    for (size_t i = 0; i < t.z1s.v.size(); ++i) t.z1s.v[i] += t.a0.v[i];
    t.a1 = relu(t.z1s);

    t.zd = conv2d_forward(t.a1, m.down, jobs);
    check_finite(t.zd, "down");
    t.ad = relu(t.zd);

    t.z2a = conv2d_forward(t.ad, m.r2a, jobs);
    check_finite(t.z2a, "r2a");
    t.a2a = relu(t.z2a);
    t.z2s = conv2d_forward(t.a2a, m.r2b, jobs);
    check_finite(t.z2s, "r2b");
    for (size_t i = 0; i < t.z2s.v.size(); ++i) t.z2s.v[i] += t.ad.v[i];
    t.a2 = relu(t.z2s);

    const int n = t.a2.n, c = t.a2.c;
    const size_t hw = static_cast<size_t>(t.a2.h) * t.a2.w;
    t.gap.assign(static_cast<size_t>(n) * c, T(0));
    for (int in = 0; in < n; ++in)
        for (int ic = 0; ic < c; ++ic) {
            const T* plane = t.a2.plane(in, ic);
            double acc = 0.0;
            for (size_t i = 0; i < hw; ++i) acc += static_cast<double>(plane[i]);
            t.gap[static_cast<size_t>(in) * c + ic] = static_cast<T>(acc / static_cast<double>(hw));
        }

    t.logits.assign(n, T(0));
    for (int in = 0; in < n; ++in) {
        double acc = static_cast<double>(m.head_b);
        for (int ic = 0; ic < c; ++ic)
            acc += static_cast<double>(m.head_w[ic]) *
                   static_cast<double>(t.gap[static_cast<size_t>(in) * c + ic]);
        if (!std::isfinite(acc)) throw NumericError("non-finite logit");
        t.logits[in] = static_cast<T>(acc);
    }
    return t.logits;
}

template <typename T>
DetectorModel<T> detector_backward(const DetectorModel<T>& m, const Trace<T>& t,
                                   const Tensor4<T>& x, const std::vector<T>& dlogits,
                                   int jobs = 1) {
    DetectorModel<T> g;  // zero-initialized gradients, same layout as the model
    const int n = t.a2.n, c = t.a2.c;
    const size_t hw = static_cast<size_t>(t.a2.h) * t.a2.w;

    // affine head
    for (int ic = 0; ic < c; ++ic) {
        double acc = 0.0;
        for (int in = 0; in < n; ++in)
            acc += static_cast<double>(dlogits[in]) *
                   static_cast<double>(t.gap[static_cast<size_t>(in) * c + ic]);
        g.head_w[ic] = static_cast<T>(acc);
    }
    {
        double acc = 0.0;
        for (int in = 0; in < n; ++in) acc += static_cast<double>(dlogits[in]);
        g.head_b = static_cast<T>(acc);
    }

    // pool: every position shares the per-(n,c) gradient
    Tensor4<T> da2(t.a2.n, t.a2.c, t.a2.h, t.a2.w);
    for (int in = 0; in < n; ++in)
        for (int ic = 0; ic < c; ++ic) {
            const T v = static_cast<T>(static_cast<double>(dlogits[in]) *
                                       static_cast<double>(m.head_w[ic]) /
                                       static_cast<double>(hw));
            T* plane = da2.plane(in, ic);
            for (size_t i = 0; i < hw; ++i) plane[i] = v;
        }

    Tensor4<T> dz2s = relu_backward(t.z2s, da2);
    Tensor4<T> da2a;
    conv2d_backward(t.a2a, m.r2b, dz2s, &g.r2b, &da2a, jobs);
    Tensor4<T> dz2a = relu_backward(t.z2a, da2a);
    Tensor4<T> dad;
    conv2d_backward(t.ad, m.r2a, dz2a, &g.r2a, &dad, jobs);
    for (size_t i = 0; i < dad.v.size(); ++i) dad.v[i] += dz2s.v[i];  // skip path

    Tensor4<T> dzd = relu_backward(t.zd, dad);
    Tensor4<T> da1;
    conv2d_backward(t.a1, m.down, dzd, &g.down, &da1, jobs);

    Tensor4<T> dz1s = relu_backward(t.z1s, da1);
    Tensor4<T> da1a;
    conv2d_backward(t.a1a, m.r1b, dz1s, &g.r1b, &da1a, jobs);
    Tensor4<T> dz1a = relu_backward(t.z1a, da1a);
    Tensor4<T> da0;
    conv2d_backward(t.a0, m.r1a, dz1a, &g.r1a, &da0, jobs);
    for (size_t i = 0; i < da0.v.size(); ++i) da0.v[i] += dz1s.v[i];  // skip path

    Tensor4<T> dz0 = relu_backward(t.z0, da0);
    conv2d_backward(x, m.stem, dz0, &g.stem, static_cast<Tensor4<T>*>(nullptr), jobs);
    return g;
}

inline double sigmoid(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

template <typename T>
struct BceResult {
    double loss;
    std::vector<T> dlogits;
};

// Numerically stable binary cross entropy on logits, averaged over the batch.
template <typename T>
BceResult<T> bce_with_logits(const std::vector<T>& logits, const std::vector<int>& labels) {
    if (logits.size() != labels.size() || logits.empty())
        throw ConfigError("bce: size mismatch or empty batch");
    const double inv_n = 1.0 / static_cast<double>(logits.size());
    double loss = 0.0;
    BceResult<T> out;
    out.dlogits.assign(logits.size(), T(0));
    for (size_t i = 0; i < logits.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1)
            throw ConfigError("bce: label must be 0 or 1, got " + std::to_string(labels[i]));
        const double z = static_cast<double>(logits[i]);
        const double y = static_cast<double>(labels[i]);
        loss += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::fabs(z)));
        out.dlogits[i] = static_cast<T>((sigmoid(z) - y) * inv_n);
    }
    out.loss = loss * inv_n;
    if (!std::isfinite(out.loss)) throw NumericError("non-finite loss");
    return out;
}

// Bias-corrected Adam. Moments are kept in double; parameter storage stays T.
template <typename T>
struct AdamState {
    int64_t t = 0;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::vector<double> m, v;
};

template <typename T>
void adam_update_span(T* p, const T* g, double* m, double* v, size_t len, int64_t t, double lr,
                      double beta1, double beta2, double eps) {
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (size_t i = 0; i < len; ++i) {
        const double gi = static_cast<double>(g[i]);
        m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
        v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
        const double mhat = m[i] / c1;
        const double vhat = v[i] / c2;
        p[i] = static_cast<T>(static_cast<double>(p[i]) - lr * mhat / (std::sqrt(vhat) + eps));
    }
}

template <typename T>
void adam_step(DetectorModel<T>& model, DetectorModel<T>& grads, AdamState<T>& st, double lr) {
    auto ps = model.params();
    auto gs = grads.params();
    size_t total = 0;
    for (const auto& p : ps) total += p.len;
    if (st.m.empty()) {
        st.m.assign(total, 0.0);
        st.v.assign(total, 0.0);
    }
    if (st.m.size() != total) throw ConfigError("adam: moment/parameter shape mismatch");
    st.t += 1;
    size_t off = 0;
    for (size_t pi = 0; pi < ps.size(); ++pi) {
        if (ps[pi].len != gs[pi].len) throw ConfigError("adam: gradient shape mismatch");
        adam_update_span(ps[pi].data, gs[pi].data, st.m.data() + off, st.v.data() + off,
                         ps[pi].len, st.t, lr, st.beta1, st.beta2, st.eps);
        off += ps[pi].len;
    }
}

struct Batch {
    Tensor4<float> x;
    std::vector<int> y;
};

struct TrainConfig {
    int batch_size = 32;
    int epochs = 10;
    uint64_t seed = 1337;
    double lr = 2e-4;
    int checkpoint_every = 0;  // 0 = never
    double val_fraction = 0.2;
    int jobs = 1;
};

void validate_train_config(const TrainConfig& cfg);

struct EpochStats {
    int epoch;
    double train_loss;
    double val_acc;
    double val_ap;
};

struct TrainResult {
    DetectorModel<float> best_model;
    int best_epoch = -1;
    double best_val_acc = 0.0;
    std::vector<EpochStats> history;
};

using EpochBatchFn = std::function<std::vector<Batch>(int epoch)>;
using EpochCallback = std::function<void(const EpochStats&, const DetectorModel<float>&)>;

// Seeded init, Adam updates, per-epoch validation; returns the checkpoint
// with the best validation accuracy (earliest epoch wins ties).
TrainResult train(const TrainConfig& cfg, const EpochBatchFn& epoch_batches,
                  const std::vector<Batch>& val_batches, const EpochCallback& on_epoch = {});

// probability scores for a set of batches, in order
std::vector<float> score_batches(const DetectorModel<float>& model,
                                 const std::vector<Batch>& batches, int jobs);

// Checkpoint container: magic "NPRM", a descriptor line, then named f32
// parameter blobs.
void save_checkpoint(const std::string& path, DetectorModel<float>& model,
                     const std::string& descriptor);
struct Checkpoint {
    DetectorModel<float> model;
    std::string descriptor;
};
Checkpoint load_checkpoint(const std::string& path);

void write_history_csv(const std::string& path, const std::vector<EpochStats>& history);

}  // namespace npr::nn
