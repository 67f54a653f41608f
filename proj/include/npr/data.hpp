#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "npr/image.hpp"
#include "npr/nn.hpp"
#include "npr/npr.hpp"

namespace npr {

struct Sample {
    std::string path;
    int label = 0;  // 0 real, 1 fake
    std::string source;
};

struct SourceCount {
    std::string source;
    int n_real = 0;
    int n_fake = 0;
};

struct LoadReport {
    std::vector<SourceCount> per_source;
    std::vector<std::string> warnings;
};

// Scans <root>/<source>/{0_real,1_fake}/ for PNG/JPEG files in lexicographic
// order. Unknown directories are ignored; files failing a magic-byte sniff
// are skipped with a warning. In strict mode a source missing either class is
// an error; otherwise it is reported and kept partial.
std::vector<Sample> load_dataset(const std::string& root, LoadReport* report = nullptr,
                                 bool strict = true);

enum class CropMode { Center, Random };

struct PreprocessResult {
    ImageTensor image;
    bool upscaled = false;  // set when a nearest-neighbor upscale was unavoidable
};

// Promotes grayscale to RGB, resizes (nearest, shorter side) only when the
// image is smaller than the crop, then crops to crop x crop.
PreprocessResult preprocess(const ImageTensor& img, int crop, CropMode mode, uint64_t seed = 0,
                            bool allow_upscale = true);

struct DatasetSplit {
    std::vector<Sample> train;
    std::vector<Sample> val;
    uint64_t seed = 0;
};

// Stratified by label; a pure function of the lexicographically sorted sample
// list, the seed and the fraction.
DatasetSplit split_dataset(const std::vector<Sample>& samples, double val_fraction,
                           uint64_t seed);

void write_split_manifest(const std::string& path, const DatasetSplit& split,
                          double val_fraction);

enum class Representation { Npr, Pixel };

std::string representation_to_string(Representation r);
Representation representation_from_string(const std::string& s);

// Classifier-side input gain for the NPR representation. Grid differences of
// [0,1] pixels rarely exceed 1/8, so this brings features to a unit-ish range
// without touching the extraction semantics.
inline constexpr float kNprFeatureGain = 32.0f;

struct PipelineSpec {
    GridSpec grid;
    Representation rep = Representation::Npr;
    int crop = 128;
    CropMode crop_mode = CropMode::Center;
    int batch_size = 32;
    uint64_t seed = 1337;
    bool shuffle = true;  // scoring paths keep the stable lexicographic order
    int jobs = 1;
};

// Decodes each sample once, then serves deterministic per-epoch batches:
// shuffle order depends on (seed, epoch) only, crops on (seed, epoch, index).
class BatchStream {
public:
    BatchStream(std::vector<Sample> samples, const PipelineSpec& spec);

    std::vector<nn::Batch> epoch(int epoch_index) const;
    size_t sample_count() const { return samples_.size(); }

private:
    std::vector<Sample> samples_;
    PipelineSpec spec_;
    std::vector<ImageTensor> decoded_;
};

// One-shot form of the above.
std::vector<nn::Batch> make_batches(const std::vector<Sample>& samples, const GridSpec& grid,
                                    int batch_size, uint64_t seed, int epoch,
                                    Representation rep = Representation::Npr, int crop = 128,
                                    CropMode mode = CropMode::Center, int jobs = 1);

}  // namespace npr
