#include "npr/synthgen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "npr/error.hpp"
#include "npr/io.hpp"
#include "npr/parallel.hpp"
#include "npr/rng.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace npr::synth {

std::string upsample_to_string(UpsampleKind k) {
    return k == UpsampleKind::Nearest ? "nearest" : "bilinear";
}

UpsampleKind upsample_from_string(const std::string& s) {
    if (s == "nearest") return UpsampleKind::Nearest;
    if (s == "bilinear") return UpsampleKind::Bilinear;
    throw ConfigError("unknown upsample kind '" + s + "' (want nearest or bilinear)");
}

Decoder make_decoder(const DecoderSpec& spec) {
    if (spec.depth < 1 || spec.depth > 3)
        throw ConfigError("decoder depth must be in [1,3], got " + std::to_string(spec.depth));
    if (spec.channels_hidden < 4 || spec.channels_hidden > 16)
        throw ConfigError("decoder hidden channels must be in [4,16], got " +
                          std::to_string(spec.channels_hidden));
    Decoder d;
    d.spec = spec;
    Rng rng(spec.seed);
    auto fill = [&rng](nn::ConvLayer<float>& l) {
        const double bound =
            1.0 / std::sqrt(static_cast<double>(l.in_channels()) * l.kernel() * l.kernel());
        for (float& v : l.w.v) v = static_cast<float>(rng.uniform_sym() * bound);
    };
    for (int i = 0; i < spec.depth; ++i) {
        int in_c = i == 0 ? 3 : spec.channels_hidden;
        d.stages.emplace_back(spec.channels_hidden, in_c, 3, 1, 1);
        fill(d.stages.back());
    }
    d.head = nn::ConvLayer<float>(3, spec.channels_hidden, 3, 1, 1);
    fill(d.head);
    return d;
}

Decoder make_decoder(uint64_t seed, UpsampleKind upsample, int depth, int channels_hidden) {
    return make_decoder(DecoderSpec{seed, upsample, depth, channels_hidden});
}

Tensor4<float> upsample2x(const Tensor4<float>& x, UpsampleKind kind) {
    Tensor4<float> out(x.n, x.c, x.h * 2, x.w * 2);
    if (kind == UpsampleKind::Nearest) {
        for (int n = 0; n < x.n; ++n)
            for (int c = 0; c < x.c; ++c) {
                const float* src = x.plane(n, c);
                float* dst = out.plane(n, c);
                for (int y = 0; y < out.h; ++y)
                    for (int xx = 0; xx < out.w; ++xx)
                        dst[static_cast<size_t>(y) * out.w + xx] =
                            src[static_cast<size_t>(y / 2) * x.w + xx / 2];
            }
        return out;
    }
    // half-pixel-centre bilinear: output o samples the source at o/2 - 0.25
    auto axis = [](int out_len, int in_len, std::vector<int>& i0, std::vector<int>& i1,
                   std::vector<float>& t) {
        i0.resize(out_len);
        i1.resize(out_len);
        t.resize(out_len);
        for (int o = 0; o < out_len; ++o) {
            float src = 0.5f * o - 0.25f;
            float f = std::floor(src);
            int lo = static_cast<int>(f);
            t[o] = src - f;
            i0[o] = std::clamp(lo, 0, in_len - 1);
            i1[o] = std::clamp(lo + 1, 0, in_len - 1);
        }
    };
    std::vector<int> y0, y1, x0, x1;
    std::vector<float> ty, tx;
    axis(out.h, x.h, y0, y1, ty);
    axis(out.w, x.w, x0, x1, tx);
    for (int n = 0; n < x.n; ++n)
        for (int c = 0; c < x.c; ++c) {
            const float* src = x.plane(n, c);
            float* dst = out.plane(n, c);
            for (int y = 0; y < out.h; ++y) {
                const float* r0 = src + static_cast<size_t>(y0[y]) * x.w;
                const float* r1 = src + static_cast<size_t>(y1[y]) * x.w;
                const float wy = ty[y];
                for (int xx = 0; xx < out.w; ++xx) {
                    const float a = r0[x0[xx]] + (r0[x1[xx]] - r0[x0[xx]]) * tx[xx];
                    const float b = r1[x0[xx]] + (r1[x1[xx]] - r1[x0[xx]]) * tx[xx];
                    dst[static_cast<size_t>(y) * out.w + xx] = a + (b - a) * wy;
                }
            }
        }
    return out;
}

Tensor4<float> box_downsample(const ImageTensor& img, int factor) {
    if (factor < 1 || img.height % factor != 0 || img.width % factor != 0)
        throw ConfigError("box_downsample: dims " + std::to_string(img.height) + "x" +
                          std::to_string(img.width) + " not divisible by " +
                          std::to_string(factor));
    Tensor4<float> out(1, img.channels, img.height / factor, img.width / factor);
    const double inv = 1.0 / (static_cast<double>(factor) * factor);
    for (int c = 0; c < img.channels; ++c)
        for (int y = 0; y < out.h; ++y)
            for (int x = 0; x < out.w; ++x) {
                double acc = 0.0;
                for (int dy = 0; dy < factor; ++dy)
                    for (int dx = 0; dx < factor; ++dx)
                        acc += img.at(y * factor + dy, x * factor + dx, c);
                out.at(0, c, y, x) = static_cast<float>(acc * inv);
            }
    return out;
}

ImageTensor generate_fake(const ImageTensor& source, const Decoder& decoder) {
    if (source.channels != 3) throw ConfigError("generate_fake: source must have 3 channels");
    const int factor = 1 << decoder.spec.depth;
    if (source.height % factor != 0 || source.width % factor != 0)
        throw ConfigError("generate_fake: dims must be divisible by " + std::to_string(factor));

    Tensor4<float> cur = box_downsample(source, factor);
    for (const auto& stage : decoder.stages) {
        cur = upsample2x(cur, decoder.spec.upsample);
        cur = nn::conv2d_forward(cur, stage);
        cur = nn::leaky_relu(cur, 0.2f);
    }
    cur = nn::conv2d_forward(cur, decoder.head);
    for (float& v : cur.v) v = clamp01(v);
    return chw_to_image(cur);
}

namespace {

float value_noise(uint64_t key, int cell, int y, int x) {
    const int gy = y / cell, gx = x / cell;
    const float fy = static_cast<float>(y % cell) / static_cast<float>(cell);
    const float fx = static_cast<float>(x % cell) / static_cast<float>(cell);
    const float uy = fy * fy * (3.0f - 2.0f * fy);
    const float ux = fx * fx * (3.0f - 2.0f * fx);
    auto corner = [&](int cy, int cx) {
        return static_cast<float>(u01(derive_seed(key, static_cast<uint64_t>(cy),
                                                  static_cast<uint64_t>(cx))));
    };
    const float c00 = corner(gy, gx), c01 = corner(gy, gx + 1);
    const float c10 = corner(gy + 1, gx), c11 = corner(gy + 1, gx + 1);
    const float top = c00 + (c01 - c00) * ux;
    const float bot = c10 + (c11 - c10) * ux;
    return top + (bot - top) * uy;
}

constexpr uint64_t kNoiseTag = 0x9051u;  // per-pixel noise stream
constexpr uint64_t kOctaveTag = 0x0c7au;

}  // namespace

ImageTensor procedural_real(uint64_t seed, int height, int width) {
    if (height < 32 || width < 32)
        throw ConfigError("procedural_real: dims must be at least 32, got " +
                          std::to_string(height) + "x" + std::to_string(width));
    ImageTensor img(height, width, 3);
    const int cells[4] = {32, 16, 8, 4};
    const float amps[4] = {1.0f, 0.5f, 0.25f, 0.125f};
    const float amp_sum = 1.875f;
    for (int c = 0; c < 3; ++c) {
        uint64_t octave_keys[4];
        for (int o = 0; o < 4; ++o)
            octave_keys[o] = derive_seed(seed, kOctaveTag, static_cast<uint64_t>(o * 8 + c));
        const uint64_t noise_key = derive_seed(seed, kNoiseTag, static_cast<uint64_t>(c));
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                float v = 0.0f;
                for (int o = 0; o < 4; ++o)
                    v += amps[o] * value_noise(octave_keys[o], cells[o], y, x);
                v /= amp_sum;
                const float u = static_cast<float>(
                    u01(derive_seed(noise_key, static_cast<uint64_t>(y),
                                    static_cast<uint64_t>(x))));
                v += (u - 0.5f) * 0.1f;
                img.at(y, x, c) = clamp01(v);
            }
    }
    return img;
}

namespace {

json spec_to_json(const SourceSpec& s, const CorpusConfig& cfg) {
    return json{{"source_name", s.name},
                {"seed", s.seed},
                {"decoder",
                 {{"seed", s.decoder.seed},
                  {"upsample_kind", upsample_to_string(s.decoder.upsample)},
                  {"depth", s.decoder.depth},
                  {"channels_hidden", s.decoder.channels_hidden}}},
                {"count", s.count},
                {"image_size", cfg.image_size},
                {"real_source", cfg.real_source}};
}

std::vector<std::string> list_real_files(const std::string& dir) {
    std::vector<std::string> files;
    if (!fs::is_directory(dir)) throw IoError("real image directory not found: " + dir);
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::string ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char ch) { return std::tolower(ch); });
        if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ConfigError("real image directory is empty: " + dir);
    return files;
}

ImageTensor center_fit(const ImageTensor& img, int size);

}  // namespace

CorpusSummary build_corpus(const CorpusConfig& config) {
    if (config.sources.empty()) throw ConfigError("corpus config names no sources");
    if (config.image_size < 32) throw ConfigError("image_size must be at least 32");
    for (const auto& s : config.sources) {
        if (s.name.empty() || s.name.find('/') != std::string::npos)
            throw ConfigError("bad source name '" + s.name + "'");
        if (s.count < 1) throw ConfigError("source '" + s.name + "' has count < 1");
        const int factor = 1 << s.decoder.depth;
        if (config.image_size % factor != 0)
            throw ConfigError("image_size " + std::to_string(config.image_size) +
                              " not divisible by decoder scale " + std::to_string(factor));
        make_decoder(s.decoder);  // validates ranges
    }
    for (size_t i = 0; i < config.sources.size(); ++i)
        for (size_t j = i + 1; j < config.sources.size(); ++j)
            if (config.sources[i].name == config.sources[j].name)
                throw ConfigError("duplicate source name '" + config.sources[i].name + "'");

    std::vector<std::string> real_files;
    if (config.real_source != "procedural") real_files = list_real_files(config.real_source);

    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + config.out_dir);

    CorpusSummary summary;
    for (const auto& s : config.sources) {
        if (!real_files.empty() && static_cast<size_t>(s.count) > real_files.size())
            throw ConfigError("source '" + s.name + "' wants " + std::to_string(s.count) +
                              " reals but " + config.real_source + " holds only " +
                              std::to_string(real_files.size()));
        const fs::path src_dir = fs::path(config.out_dir) / s.name;
        fs::create_directories(src_dir / "0_real", ec);
        fs::create_directories(src_dir / "1_fake", ec);
        if (ec) throw IoError("cannot create directories under " + src_dir.string());

        Decoder decoder = make_decoder(s.decoder);
        parallel_for(static_cast<size_t>(s.count), config.jobs, [&](size_t i) {
            ImageTensor real;
            if (real_files.empty()) {
                real = quantize8(procedural_real(derive_seed(s.seed, i), config.image_size,
                                                 config.image_size));
            } else {
                real = quantize8(center_fit(read_image(real_files[i]), config.image_size));
            }
            char name[64];
            std::snprintf(name, sizeof(name), "real_%05zu.png", i);
            write_png8((src_dir / "0_real" / name).string(), real);
            ImageTensor fake = quantize8(generate_fake(real, decoder));
            std::snprintf(name, sizeof(name), "fake_%05zu.png", i);
            write_png8((src_dir / "1_fake" / name).string(), fake);
        });
        summary.images_written += 2 * s.count;
    }

    const std::string manifest = (fs::path(config.out_dir) / "manifest.json").string();
    write_manifest(manifest, config);
    summary.manifest_path = manifest;
    return summary;
}

namespace {

// shorter-side nearest resize (when needed) followed by a center crop
ImageTensor center_fit(const ImageTensor& input, int size) {
    ImageTensor img = gray_to_rgb(input);
    if (img.height < size || img.width < size) {
        const int short_side = std::min(img.height, img.width);
        const int nh = std::max(size, img.height * size / short_side);
        const int nw = std::max(size, img.width * size / short_side);
        ImageTensor scaled(nh, nw, img.channels);
        for (int y = 0; y < nh; ++y)
            for (int x = 0; x < nw; ++x) {
                int sy = std::min(img.height - 1, y * img.height / nh);
                int sx = std::min(img.width - 1, x * img.width / nw);
                for (int c = 0; c < img.channels; ++c)
                    scaled.at(y, x, c) = img.at(sy, sx, c);
            }
        img = std::move(scaled);
    }
    const int oy = (img.height - size) / 2;
    const int ox = (img.width - size) / 2;
    ImageTensor out(size, size, 3);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.at(oy + y, ox + x, c);
    return out;
}

}  // namespace

void write_manifest(const std::string& path, const CorpusConfig& config) {
    json entries = json::array();
    for (const auto& s : config.sources) entries.push_back(spec_to_json(s, config));
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open for write: " + path);
    os << entries.dump(2) << "\n";
}

CorpusConfig read_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path);
    json entries;
    try {
        is >> entries;
    } catch (const json::exception& e) {
        throw ConfigError("bad manifest " + path + ": " + e.what());
    }
    if (!entries.is_array() || entries.empty())
        throw ConfigError("manifest must be a non-empty array: " + path);
    CorpusConfig cfg;
    try {
        cfg.image_size = entries[0].at("image_size").get<int>();
        cfg.real_source = entries[0].at("real_source").get<std::string>();
        for (const auto& e : entries) {
            SourceSpec s;
            s.name = e.at("source_name").get<std::string>();
            s.seed = e.at("seed").get<uint64_t>();
            s.count = e.at("count").get<int>();
            const auto& d = e.at("decoder");
            s.decoder.seed = d.at("seed").get<uint64_t>();
            s.decoder.upsample = upsample_from_string(d.at("upsample_kind").get<std::string>());
            s.decoder.depth = d.at("depth").get<int>();
            s.decoder.channels_hidden = d.at("channels_hidden").get<int>();
            cfg.sources.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw ConfigError("bad manifest " + path + ": " + e.what());
    }
    return cfg;
}

}  // namespace npr::synth
