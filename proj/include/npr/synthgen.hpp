#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "npr/image.hpp"
#include "npr/nn.hpp"
#include "npr/tensor.hpp"

namespace npr::synth {

enum class UpsampleKind { Nearest, Bilinear };

std::string upsample_to_string(UpsampleKind k);
UpsampleKind upsample_from_string(const std::string& s);

// Seeded description of a toy generator tail: depth stages of
// (2x upsample, 3x3 conv, leaky rectifier 0.2), then a 3x3 conv to RGB and a
// clamp to [0,1].
struct DecoderSpec {
    uint64_t seed = 0;
    UpsampleKind upsample = UpsampleKind::Nearest;
    int depth = 1;             // 1..3 stages, each doubles resolution
    int channels_hidden = 8;   // 4..16
};

struct Decoder {
    DecoderSpec spec;
    std::vector<nn::ConvLayer<float>> stages;
    nn::ConvLayer<float> head;
};

// Weights are uniform in +-1/sqrt(fan-in), drawn from a stream seeded by
// spec.seed alone; the spec fully determines every weight byte.
Decoder make_decoder(const DecoderSpec& spec);
Decoder make_decoder(uint64_t seed, UpsampleKind upsample, int depth, int channels_hidden);

Tensor4<float> upsample2x(const Tensor4<float>& x, UpsampleKind kind);
Tensor4<float> box_downsample(const ImageTensor& img, int factor);

// Box-downsamples the source by 2^depth and runs it through the decoder
// stages; output has the source dimensions.
ImageTensor generate_fake(const ImageTensor& source, const Decoder& decoder);

// Multi-octave value noise (4 octaves, amplitude halving) plus per-pixel
// uniform noise of amplitude 0.05. The noise floor keeps real textures free
// of up-sampling correlations.
ImageTensor procedural_real(uint64_t seed, int height, int width);

struct SourceSpec {
    std::string name;
    uint64_t seed = 0;  // drives the per-image real textures
    DecoderSpec decoder;
    int count = 0;  // real/fake pairs
};

struct CorpusConfig {
    std::string out_dir;
    std::vector<SourceSpec> sources;
    int image_size = 128;
    std::string real_source = "procedural";  // or a directory of real images
    int jobs = 1;
};

struct CorpusSummary {
    int images_written = 0;
    std::string manifest_path;
};

// Writes <out>/<source>/{0_real,1_fake}/*.png plus manifest.json. Fakes are
// generated from the paired (already 8-bit-quantized) reals, so results do
// not depend on whether reals came from disk or the procedural generator.
CorpusSummary build_corpus(const CorpusConfig& config);

void write_manifest(const std::string& path, const CorpusConfig& config);
CorpusConfig read_manifest(const std::string& path);

}  // namespace npr::synth
