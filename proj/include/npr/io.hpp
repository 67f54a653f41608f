#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "npr/image.hpp"

namespace npr {

bool has_png_magic(const std::string& path);
bool has_jpeg_magic(const std::string& path);

// Decodes PNG or JPEG to float32 [0,1]. Grayscale stays single-channel,
// palette/RGB/RGBA become RGB (alpha dropped), 16-bit PNG is reduced to 8.
ImageTensor read_image(const std::string& path);

// 8-bit PNG, grayscale for 1 channel, RGB for 3. Values are clamped and
// rounded; identical tensors always produce identical files.
void write_png8(const std::string& path, const ImageTensor& img);

std::vector<unsigned char> read_file_bytes(const std::string& path);

// Stable content fingerprint used in reports.
uint64_t fnv1a64(const unsigned char* data, size_t len);
std::string file_hash_hex(const std::string& path);

}  // namespace npr
