#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tactex/common/image.hpp"

namespace tactex::png {

/// 8-bit PNG; 1 channel -> grayscale, 3 channels -> RGB.
std::vector<std::uint8_t> encode8(const Image<std::uint8_t>& image);
/// 16-bit grayscale PNG (big-endian samples as the format requires).
std::vector<std::uint8_t> encode16(const Image<std::uint16_t>& image);

void write8(const std::filesystem::path& path, const Image<std::uint8_t>& image);
void write16(const std::filesystem::path& path, const Image<std::uint16_t>& image);

/// Reads an 8-bit grayscale or RGB PNG.
Image<std::uint8_t> read8(const std::filesystem::path& path);
Image<std::uint16_t> read16(const std::filesystem::path& path);

}  // namespace tactex::png
