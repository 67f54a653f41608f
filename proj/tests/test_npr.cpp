#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "npr/npr.hpp"
#include "npr/rng.hpp"

using namespace npr;

namespace {

// Naive per-pixel reference: for every output position, re-gather its grid
// members and recompute the pivot from scratch. No shared code with the
// library loop structure.
float oracle_npr_at(const ImageTensor& img, const GridSpec& g, int y, int x, int c, int off_y,
                    int off_x) {
    const int l = g.l;
    const int gy = (y / l) * l;
    const int gx = (x / l) * l;
    double members[9];
    for (int i = 0; i < l * l; ++i)
        members[i] = img.at(off_y + gy + i / l, off_x + gx + i % l, c);
    const double w = img.at(off_y + y, off_x + x, c);
    if (g.pivot == PivotKind::Index) return static_cast<float>(w - members[g.j - 1]);
    if (g.pivot == PivotKind::Max) {
        double m = members[0];
        for (int i = 1; i < l * l; ++i)
            if (members[i] > m) m = members[i];
        return static_cast<float>(w - m);
    }
    double sum = 0.0;
    for (int i = 0; i < l * l; ++i) sum += members[i];
    const int n = l * l;
    return static_cast<float>((n * w - sum) / n);
}

NprMap oracle_extract(const ImageTensor& img, const GridSpec& g) {
    NprMap out;
    out.grid = g;
    out.channels = img.channels;
    out.height = img.height - img.height % g.l;
    out.width = img.width - img.width % g.l;
    out.data.assign(static_cast<size_t>(out.height) * out.width * out.channels, 0.0f);
    const int off_y = (img.height - out.height) / 2;
    const int off_x = (img.width - out.width) / 2;
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            for (int c = 0; c < out.channels; ++c)
                out.at(y, x, c) = oracle_npr_at(img, g, y, x, c, off_y, off_x);
    return out;
}

ImageTensor random_image(Rng& rng, int h, int w, int c, bool on_8bit_grid = false) {
    ImageTensor img(h, w, c);
    for (float& v : img.data) {
        if (on_8bit_grid)
            v = static_cast<float>(rng.below(257)) / 256.0f;
        else
            v = static_cast<float>(rng.uniform01());
    }
    return img;
}

std::vector<GridSpec> all_grids() {
    std::vector<GridSpec> grids;
    for (int l : {2, 3}) {
        for (int j = 1; j <= l * l; ++j) grids.push_back(GridSpec::index(l, j));
        grids.push_back(GridSpec::avg(l));
        grids.push_back(GridSpec::max(l));
    }
    return grids;
}

ImageTensor nearest_upsample2(const ImageTensor& src) {
    ImageTensor out(src.height * 2, src.width * 2, src.channels);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            for (int c = 0; c < src.channels; ++c) out.at(y, x, c) = src.at(y / 2, x / 2, c);
    return out;
}

}  // namespace

TEST_CASE("2x2 example with index pivot 1") {
    ImageTensor img(2, 2, 1);
    img.at(0, 0, 0) = 0.25f;
    img.at(0, 1, 0) = 0.5f;
    img.at(1, 0, 0) = 0.75f;
    img.at(1, 1, 0) = 1.0f;
    NprMap map = extract_npr(img, GridSpec::index(2, 1));
    CHECK(map.at(0, 0, 0) == 0.0f);
    CHECK(map.at(0, 1, 0) == 0.25f);
    CHECK(map.at(1, 0, 0) == 0.5f);
    CHECK(map.at(1, 1, 0) == 0.75f);
}

TEST_CASE("constant image gives all-zero map for every grid") {
    ImageTensor img(6, 6, 3);
    for (float& v : img.data) v = 0.37f;
    for (const auto& g : all_grids()) {
        NprMap map = extract_npr(img, g);
        for (float v : map.data) CHECK(v == 0.0f);
    }
}

TEST_CASE("4x4 seeded image matches the scalar oracle") {
    Rng rng(42);
    ImageTensor img = random_image(rng, 4, 4, 1);
    GridSpec g = GridSpec::index(2, 2);
    NprMap got = extract_npr(img, g);
    NprMap want = oracle_extract(img, g);
    REQUIRE(got.data.size() == want.data.size());
    for (size_t i = 0; i < got.data.size(); ++i) CHECK(got.data[i] == want.data[i]);
}

TEST_CASE("oracle equivalence on random images, all grids, exact") {
    Rng rng(7);
    int images = 0;
    while (images < 120) {
        int h = 2 + static_cast<int>(rng.below(16));
        int w = 2 + static_cast<int>(rng.below(16));
        int c = rng.below(2) ? 3 : 1;
        ImageTensor img = random_image(rng, h, w, c);
        for (const auto& g : all_grids()) {
            if (h < g.l || w < g.l) continue;
            NprMap got = extract_npr(img, g);
            NprMap want = oracle_extract(img, g);
            REQUIRE(got.height == want.height);
            REQUIRE(got.width == want.width);
            bool equal = true;
            for (size_t i = 0; i < got.data.size(); ++i)
                if (got.data[i] != want.data[i]) equal = false;
            CHECK(equal);
        }
        ++images;
    }
}

TEST_CASE("center crop on non-divisible dimensions") {
    Rng rng(3);
    ImageTensor img = random_image(rng, 7, 5, 1);
    NprMap map = extract_npr(img, GridSpec::index(2, 1));
    CHECK(map.height == 6);
    CHECK(map.width == 4);
    // crop offset (0,0) truncation: 7->6 means rows 0..5, 5->4 means cols 0..3
    NprMap want = oracle_extract(img, GridSpec::index(2, 1));
    for (size_t i = 0; i < map.data.size(); ++i) CHECK(map.data[i] == want.data[i]);
}

TEST_CASE("shift invariance is exact on 8-bit-grid pixels") {
    Rng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        ImageTensor img = random_image(rng, 12, 12, 3, true);
        for (float& v : img.data) v *= 0.5f;  // leave headroom for the shift
        const float shift = static_cast<float>(rng.below(65)) / 256.0f;
        ImageTensor shifted = img;
        for (float& v : shifted.data) v += shift;
        for (const auto& g : all_grids()) {
            NprMap a = extract_npr(img, g);
            NprMap b = extract_npr(shifted, g);
            for (size_t i = 0; i < a.data.size(); ++i) CHECK(a.data[i] == b.data[i]);
        }
    }
}

TEST_CASE("scale equivariance is exact for power-of-two scales") {
    Rng rng(13);
    for (float scale : {0.5f, 0.25f, 0.125f}) {
        ImageTensor img = random_image(rng, 9, 9, 3);
        ImageTensor scaled = img;
        for (float& v : scaled.data) v *= scale;
        for (const auto& g : all_grids()) {
            NprMap a = extract_npr(scaled, g);
            NprMap b = extract_npr(img, g);
            for (size_t i = 0; i < a.data.size(); ++i) CHECK(a.data[i] == scale * b.data[i]);
        }
    }
}

TEST_CASE("exact 2x nearest upsampling leaves zero relationships") {
    Rng rng(17);
    ImageTensor low = random_image(rng, 8, 8, 3);
    ImageTensor up = nearest_upsample2(low);
    for (const auto& g : all_grids()) {
        if (g.l != 2) continue;
        NprMap map = extract_npr(up, g);
        for (float v : map.data) CHECK(v == 0.0f);
    }
}

TEST_CASE("pivot position is exactly zero for index pivots") {
    Rng rng(19);
    ImageTensor img = random_image(rng, 12, 12, 3);
    for (int l : {2, 3}) {
        for (int j = 1; j <= l * l; ++j) {
            NprMap map = extract_npr(img, GridSpec::index(l, j));
            const int py = (j - 1) / l, px = (j - 1) % l;
            for (int gy = 0; gy < map.height; gy += l)
                for (int gx = 0; gx < map.width; gx += l)
                    for (int c = 0; c < 3; ++c) CHECK(map.at(gy + py, gx + px, c) == 0.0f);
        }
    }
}

TEST_CASE("avg pivot: grid sums vanish") {
    Rng rng(23);
    ImageTensor img = random_image(rng, 12, 12, 3);
    for (int l : {2, 3}) {
        NprMap map = extract_npr(img, GridSpec::avg(l));
        for (int gy = 0; gy < map.height; gy += l)
            for (int gx = 0; gx < map.width; gx += l)
                for (int c = 0; c < 3; ++c) {
                    double sum = 0.0;
                    for (int i = 0; i < l * l; ++i) sum += map.at(gy + i / l, gx + i % l, c);
                    CHECK(std::fabs(sum) <= 1e-6);
                }
    }
}

TEST_CASE("max pivot: nothing positive, one exact zero per grid") {
    Rng rng(29);
    ImageTensor img = random_image(rng, 12, 12, 3);
    for (int l : {2, 3}) {
        NprMap map = extract_npr(img, GridSpec::max(l));
        for (int gy = 0; gy < map.height; gy += l)
            for (int gx = 0; gx < map.width; gx += l)
                for (int c = 0; c < 3; ++c) {
                    bool has_zero = false;
                    for (int i = 0; i < l * l; ++i) {
                        float v = map.at(gy + i / l, gx + i % l, c);
                        CHECK(v <= 0.0f);
                        if (v == 0.0f) has_zero = true;
                    }
                    CHECK(has_zero);
                }
    }
}

TEST_CASE("rejected configurations") {
    ImageTensor img(4, 4, 1);
    CHECK_THROWS_AS(extract_npr(img, GridSpec::index(4, 1)), ConfigError);
    CHECK_THROWS_AS(extract_npr(img, GridSpec::index(2, 5)), ConfigError);
    CHECK_THROWS_AS(extract_npr(img, GridSpec::index(2, 0)), ConfigError);
    ImageTensor bad;  // bypasses the constructor checks
    bad.height = 4;
    bad.width = 4;
    bad.channels = 2;
    bad.data.assign(32, 0.0f);
    CHECK_THROWS_AS(extract_npr(bad, GridSpec::index(2, 1)), ConfigError);
    ImageTensor empty;
    CHECK_THROWS_AS(extract_npr(empty, GridSpec::index(2, 1)), ConfigError);
    CHECK_THROWS_AS(ImageTensor(4, 4, 2), ConfigError);
}

TEST_CASE("heatmap basics") {
    NprMap map;
    map.height = 2;
    map.width = 2;
    map.channels = 1;
    map.grid = GridSpec::index(2, 1);
    map.data = {0.0f, 0.0f, 0.0f, 0.0f};

    ImageTensor zero = npr_heatmap(map, 0);
    for (float v : zero.data) CHECK(v == 0.0f);

    map.data = {-0.5f, 0.0f, 0.25f, 0.0f};
    ImageTensor hm = npr_heatmap(map, 0);
    CHECK(hm.data[0] == 1.0f);
    CHECK(hm.data[1] == 0.0f);
    CHECK(hm.data[2] == 0.5f);

    CHECK_THROWS_AS(npr_heatmap(map, 1), ConfigError);
}

TEST_CASE("heatmap of extracted map matches composed oracle") {
    Rng rng(42);
    ImageTensor img = random_image(rng, 4, 4, 1);
    GridSpec g = GridSpec::index(2, 2);
    ImageTensor got = npr_heatmap(extract_npr(img, g), 0);

    NprMap want_map = oracle_extract(img, g);
    float lo = 1e30f, hi = -1e30f;
    for (float v : want_map.data) {
        lo = std::min(lo, std::fabs(v));
        hi = std::max(hi, std::fabs(v));
    }
    for (size_t i = 0; i < got.data.size(); ++i) {
        float want = hi > lo ? (std::fabs(want_map.data[i]) - lo) / (hi - lo) : 0.0f;
        CHECK(got.data[i] == doctest::Approx(want).epsilon(1e-6));
    }
}

TEST_CASE("difference: self, zero and nearest-upsample reconstruction") {
    Rng rng(31);
    ImageTensor img = random_image(rng, 8, 8, 3);
    GridSpec g = GridSpec::index(2, 1);
    NprMap x = extract_npr(img, g);

    NprMap self = npr_difference(x, x);
    for (float v : self.data) CHECK(v == 0.0f);

    NprMap zero = x;
    std::fill(zero.data.begin(), zero.data.end(), 0.0f);
    NprMap ident = npr_difference(x, zero);
    for (size_t i = 0; i < x.data.size(); ++i) CHECK(ident.data[i] == x.data[i]);

    // a 2x nearest-upsampled reconstruction has zero NPR, so the difference
    // equals the original image's NPR exactly
    ImageTensor low(4, 4, 3);
    for (int y = 0; y < 4; ++y)
        for (int xx = 0; xx < 4; ++xx)
            for (int c = 0; c < 3; ++c) low.at(y, xx, c) = img.at(2 * y, 2 * xx, c);
    NprMap recon = extract_npr(nearest_upsample2(low), g);
    NprMap diff = npr_difference(x, recon);
    for (size_t i = 0; i < x.data.size(); ++i) CHECK(diff.data[i] == x.data[i]);

    NprMap other_grid = extract_npr(img, GridSpec::index(2, 2));
    CHECK_THROWS_AS(npr_difference(x, other_grid), ConfigError);
    NprMap small = extract_npr(random_image(rng, 4, 4, 3), g);
    CHECK_THROWS_AS(npr_difference(x, small), ConfigError);
}

TEST_CASE("NPR1 file round-trip is bit-exact") {
    Rng rng(37);
    ImageTensor img = random_image(rng, 6, 6, 3);
    auto dir = std::filesystem::temp_directory_path() / "npr_test_files";
    std::filesystem::create_directories(dir);
    for (const auto& g : all_grids()) {
        NprMap map = extract_npr(img, g);
        auto path = (dir / "map.npr").string();
        write_npr_file(path, map);
        NprMap back = read_npr_file(path);
        CHECK(back.height == map.height);
        CHECK(back.width == map.width);
        CHECK(back.channels == map.channels);
        CHECK(back.grid == map.grid);
        REQUIRE(back.data.size() == map.data.size());
        for (size_t i = 0; i < map.data.size(); ++i) CHECK(back.data[i] == map.data[i]);
    }
    // corrupt magic is rejected
    auto bad_path = (dir / "bad.npr").string();
    {
        std::FILE* f = std::fopen(bad_path.c_str(), "wb");
        std::fwrite("NOPE", 1, 4, f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(read_npr_file(bad_path), ConfigError);
    std::filesystem::remove_all(dir);
}
