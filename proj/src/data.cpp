#include "npr/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "npr/error.hpp"
#include "npr/io.hpp"
#include "npr/parallel.hpp"
#include "npr/rng.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace npr {

namespace {

constexpr uint64_t kShuffleTag = 0x5875ffULL;
constexpr uint64_t kCropTag = 0xc909ULL;

bool has_image_extension(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char ch) { return std::tolower(ch); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<std::string> sorted_image_files(const fs::path& dir, LoadReport* report) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file() || !has_image_extension(e.path())) continue;
        const std::string path = e.path().string();
        if (!has_png_magic(path) && !has_jpeg_magic(path)) {
            if (report) report->warnings.push_back("skipping undecodable file " + path);
            continue;
        }
        if (report && has_jpeg_magic(path))
            report->warnings.push_back("JPEG input " + path +
                                       ": lossy compression attenuates pixel-difference artifacts");
        files.push_back(path);
    }
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace

std::vector<Sample> load_dataset(const std::string& root, LoadReport* report, bool strict) {
    if (!fs::is_directory(root)) throw IoError("dataset root not found: " + root);
    std::vector<std::string> source_dirs;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory()) source_dirs.push_back(e.path().filename().string());
    std::sort(source_dirs.begin(), source_dirs.end());

    std::vector<Sample> samples;
    for (const auto& name : source_dirs) {
        const fs::path src = fs::path(root) / name;
        const fs::path real_dir = src / "0_real";
        const fs::path fake_dir = src / "1_fake";
        const bool has_real = fs::is_directory(real_dir);
        const bool has_fake = fs::is_directory(fake_dir);
        if (!has_real && !has_fake) continue;  // unknown subtree

        SourceCount count;
        count.source = name;
        for (int label = 0; label <= 1; ++label) {
            const fs::path& dir = label == 0 ? real_dir : fake_dir;
            if (!fs::is_directory(dir)) continue;
            auto files = sorted_image_files(dir, report);
            for (auto& f : files) samples.push_back(Sample{std::move(f), label, name});
            (label == 0 ? count.n_real : count.n_fake) = static_cast<int>(files.size());
        }
        if (strict && (count.n_real == 0 || count.n_fake == 0))
            throw ConfigError("source '" + name + "' has an empty class directory: " +
                              (count.n_real == 0 ? "0_real" : "1_fake"));
        if (report) report->per_source.push_back(count);
    }
    if (samples.empty()) throw ConfigError("no samples found under " + root);
    return samples;
}

PreprocessResult preprocess(const ImageTensor& input, int crop, CropMode mode, uint64_t seed,
                            bool allow_upscale) {
    if (crop < 1) throw ConfigError("preprocess: crop must be positive");
    PreprocessResult res;
    ImageTensor img = gray_to_rgb(input);

    if (img.height < crop || img.width < crop) {
        if (!allow_upscale)
            throw ConfigError("image " + std::to_string(img.height) + "x" +
                              std::to_string(img.width) + " smaller than crop " +
                              std::to_string(crop) + " and resizing is disabled");
        const int short_side = std::min(img.height, img.width);
        const int nh = std::max(crop, img.height * crop / short_side);
        const int nw = std::max(crop, img.width * crop / short_side);
        ImageTensor scaled(nh, nw, 3);
        for (int y = 0; y < nh; ++y)
            for (int x = 0; x < nw; ++x) {
                const int sy = std::min(img.height - 1, y * img.height / nh);
                const int sx = std::min(img.width - 1, x * img.width / nw);
                for (int c = 0; c < 3; ++c) scaled.at(y, x, c) = img.at(sy, sx, c);
            }
        img = std::move(scaled);
        res.upscaled = true;
    }

    int oy, ox;
    if (mode == CropMode::Center) {
        oy = (img.height - crop) / 2;
        ox = (img.width - crop) / 2;
    } else {
        Rng rng(seed);
        oy = static_cast<int>(rng.below(static_cast<uint64_t>(img.height - crop + 1)));
        ox = static_cast<int>(rng.below(static_cast<uint64_t>(img.width - crop + 1)));
    }

    res.image = ImageTensor(crop, crop, 3);
    for (int y = 0; y < crop; ++y)
        for (int x = 0; x < crop; ++x)
            for (int c = 0; c < 3; ++c) res.image.at(y, x, c) = img.at(oy + y, ox + x, c);
    return res;
}

DatasetSplit split_dataset(const std::vector<Sample>& samples, double val_fraction,
                           uint64_t seed) {
    if (!(val_fraction > 0.0 && val_fraction < 1.0))
        throw ConfigError("validation fraction must be in (0,1)");
    std::vector<Sample> sorted = samples;
    std::sort(sorted.begin(), sorted.end(),
              [](const Sample& a, const Sample& b) { return a.path < b.path; });

    DatasetSplit split;
    split.seed = seed;
    for (int label = 0; label <= 1; ++label) {
        std::vector<size_t> idx;
        for (size_t i = 0; i < sorted.size(); ++i)
            if (sorted[i].label == label) idx.push_back(i);
        if (idx.empty()) continue;
        Rng rng(derive_seed(seed, static_cast<uint64_t>(label)));
        rng.shuffle(idx);
        size_t n_val = static_cast<size_t>(std::lround(val_fraction * static_cast<double>(idx.size())));
        if (idx.size() >= 2) n_val = std::clamp<size_t>(n_val, 1, idx.size() - 1);
        for (size_t k = 0; k < idx.size(); ++k)
            (k < n_val ? split.val : split.train).push_back(sorted[idx[k]]);
    }
    auto by_path = [](const Sample& a, const Sample& b) { return a.path < b.path; };
    std::sort(split.train.begin(), split.train.end(), by_path);
    std::sort(split.val.begin(), split.val.end(), by_path);
    return split;
}

void write_split_manifest(const std::string& path, const DatasetSplit& split,
                          double val_fraction) {
    json j;
    j["seed"] = split.seed;
    j["val_fraction"] = val_fraction;
    j["train"] = json::array();
    j["val"] = json::array();
    for (const auto& s : split.train) j["train"].push_back(s.path);
    for (const auto& s : split.val) j["val"].push_back(s.path);
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open for write: " + path);
    os << j.dump(2) << "\n";
}

std::string representation_to_string(Representation r) {
    return r == Representation::Npr ? "npr" : "pixel";
}

Representation representation_from_string(const std::string& s) {
    if (s == "npr") return Representation::Npr;
    if (s == "pixel") return Representation::Pixel;
    throw ConfigError("unknown representation '" + s + "' (want npr or pixel)");
}

BatchStream::BatchStream(std::vector<Sample> samples, const PipelineSpec& spec)
    : samples_(std::move(samples)), spec_(spec) {
    if (samples_.empty()) throw ConfigError("batch stream needs at least one sample");
    validate_grid(spec_.grid);
    if (spec_.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (spec_.rep == Representation::Npr && spec_.crop % spec_.grid.l != 0)
        throw ConfigError("crop " + std::to_string(spec_.crop) + " not divisible by grid size " +
                          std::to_string(spec_.grid.l));
    decoded_.resize(samples_.size());
    parallel_for(samples_.size(), spec_.jobs, [&](size_t i) {
        try {
            decoded_[i] = read_image(samples_[i].path);
        } catch (const std::exception& e) {
            throw IoError(samples_[i].path + ": " + e.what());
        }
    });
}

std::vector<nn::Batch> BatchStream::epoch(int epoch_index) const {
    std::vector<size_t> order(samples_.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (spec_.shuffle) {
        Rng rng(derive_seed(spec_.seed, kShuffleTag, static_cast<uint64_t>(epoch_index)));
        rng.shuffle(order);
    }

    // features in shuffled order, extracted in parallel into fixed slots
    const int c = 3;
    const int fh = spec_.crop;
    const int fw = spec_.crop;
    std::vector<std::vector<float>> features(order.size());
    std::vector<int> labels(order.size());
    parallel_for(order.size(), spec_.jobs, [&](size_t k) {
        const size_t i = order[k];
        uint64_t crop_seed =
            derive_seed(spec_.seed, kCropTag,
                        static_cast<uint64_t>(epoch_index) * 0x10000ULL + static_cast<uint64_t>(i));
        PreprocessResult pre;
        try {
            pre = preprocess(decoded_[i], spec_.crop, spec_.crop_mode, crop_seed);
        } catch (const std::exception& e) {
            throw ConfigError(samples_[i].path + ": " + e.what());
        }
        std::vector<float> feat(static_cast<size_t>(c) * fh * fw);
        if (spec_.rep == Representation::Npr) {
            NprMap map = extract_npr(pre.image, spec_.grid);
            for (int cc = 0; cc < c; ++cc)
                for (int y = 0; y < fh; ++y)
                    for (int x = 0; x < fw; ++x)
                        feat[(static_cast<size_t>(cc) * fh + y) * fw + x] =
                            kNprFeatureGain * map.at(y, x, cc);
        } else {
            for (int cc = 0; cc < c; ++cc)
                for (int y = 0; y < fh; ++y)
                    for (int x = 0; x < fw; ++x)
                        feat[(static_cast<size_t>(cc) * fh + y) * fw + x] = pre.image.at(y, x, cc);
        }
        features[k] = std::move(feat);
        labels[k] = samples_[i].label;
    });

    std::vector<nn::Batch> batches;
    for (size_t start = 0; start < order.size(); start += spec_.batch_size) {
        const size_t end = std::min(order.size(), start + spec_.batch_size);
        nn::Batch b;
        b.x = Tensor4<float>(static_cast<int>(end - start), c, fh, fw);
        const size_t feat_len = static_cast<size_t>(c) * fh * fw;
        for (size_t k = start; k < end; ++k) {
            std::copy(features[k].begin(), features[k].end(),
                      b.x.v.begin() + (k - start) * feat_len);
            b.y.push_back(labels[k]);
        }
        batches.push_back(std::move(b));
    }
    return batches;
}

std::vector<nn::Batch> make_batches(const std::vector<Sample>& samples, const GridSpec& grid,
                                    int batch_size, uint64_t seed, int epoch, Representation rep,
                                    int crop, CropMode mode, int jobs) {
    PipelineSpec spec;
    spec.grid = grid;
    spec.rep = rep;
    spec.crop = crop;
    spec.crop_mode = mode;
    spec.batch_size = batch_size;
    spec.seed = seed;
    spec.jobs = jobs;
    return BatchStream(samples, spec).epoch(epoch);
}

}  // namespace npr
