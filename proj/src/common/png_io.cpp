#include "tactex/common/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>

namespace tactex::png {
namespace {

struct WriteState {
  std::vector<std::uint8_t>* out;
};

void write_callback(png_structp png_ptr, png_bytep data, png_size_t length) {
  auto* state = static_cast<WriteState*>(png_get_io_ptr(png_ptr));
  state->out->insert(state->out->end(), data, data + length);
}

void flush_callback(png_structp) {}

std::vector<std::uint8_t> encode_rows(int width, int height, int bit_depth, int color_type,
                                      const std::vector<png_bytep>& rows) {
  png_structp png_ptr = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png_ptr == nullptr) throw std::runtime_error("png: cannot create write struct");
  png_infop info_ptr = png_create_info_struct(png_ptr);
  if (info_ptr == nullptr) {
    png_destroy_write_struct(&png_ptr, nullptr);
    throw std::runtime_error("png: cannot create info struct");
  }
  std::vector<std::uint8_t> out;
  WriteState state{&out};
  if (setjmp(png_jmpbuf(png_ptr))) {
    png_destroy_write_struct(&png_ptr, &info_ptr);
    throw std::runtime_error("png: encode failed");
  }
  png_set_write_fn(png_ptr, &state, write_callback, flush_callback);
  png_set_IHDR(png_ptr, info_ptr, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png_ptr, info_ptr);
  png_write_image(png_ptr, const_cast<png_bytepp>(rows.data()));
  png_write_end(png_ptr, nullptr);
  png_destroy_write_struct(&png_ptr, &info_ptr);
  return out;
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("png: cannot open " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

struct Decoded {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint8_t> raw;
};

Decoded decode_file(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
  if (!file) throw std::runtime_error("png: cannot open " + path.string());
  png_structp png_ptr = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png_ptr == nullptr) throw std::runtime_error("png: cannot create read struct");
  png_infop info_ptr = png_create_info_struct(png_ptr);
  if (info_ptr == nullptr) {
    png_destroy_read_struct(&png_ptr, nullptr, nullptr);
    throw std::runtime_error("png: cannot create info struct");
  }
  Decoded d;
  if (setjmp(png_jmpbuf(png_ptr))) {
    png_destroy_read_struct(&png_ptr, &info_ptr, nullptr);
    throw std::runtime_error("png: decode failed for " + path.string());
  }
  png_init_io(png_ptr, file.get());
  png_read_info(png_ptr, info_ptr);
  d.width = static_cast<int>(png_get_image_width(png_ptr, info_ptr));
  d.height = static_cast<int>(png_get_image_height(png_ptr, info_ptr));
  d.bit_depth = png_get_bit_depth(png_ptr, info_ptr);
  const int color_type = png_get_color_type(png_ptr, info_ptr);
  if (color_type == PNG_COLOR_TYPE_GRAY) {
    d.channels = 1;
  } else if (color_type == PNG_COLOR_TYPE_RGB) {
    d.channels = 3;
  } else {
    png_destroy_read_struct(&png_ptr, &info_ptr, nullptr);
    throw std::runtime_error("png: unsupported color type in " + path.string());
  }
  if (d.bit_depth == 16) png_set_swap(png_ptr);
  png_read_update_info(png_ptr, info_ptr);
  const std::size_t row_bytes = png_get_rowbytes(png_ptr, info_ptr);
  d.raw.resize(row_bytes * d.height);
  std::vector<png_bytep> rows(d.height);
  for (int y = 0; y < d.height; ++y) rows[y] = d.raw.data() + row_bytes * y;
  png_read_image(png_ptr, rows.data());
  png_read_end(png_ptr, nullptr);
  png_destroy_read_struct(&png_ptr, &info_ptr, nullptr);
  return d;
}

}  // namespace

std::vector<std::uint8_t> encode8(const Image<std::uint8_t>& image) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw std::invalid_argument("png: 8-bit images must have 1 or 3 channels");
  }
  std::vector<png_bytep> rows(image.height());
  const std::size_t stride = static_cast<std::size_t>(image.width()) * image.channels();
  auto* base = const_cast<std::uint8_t*>(image.data().data());
  for (int y = 0; y < image.height(); ++y) rows[y] = base + stride * y;
  return encode_rows(image.width(), image.height(), 8,
                     image.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, rows);
}

std::vector<std::uint8_t> encode16(const Image<std::uint16_t>& image) {
  if (image.channels() != 1) throw std::invalid_argument("png: 16-bit images must be grayscale");
  std::vector<std::uint8_t> be(image.pixel_count() * 2);
  auto src = image.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    be[2 * i] = static_cast<std::uint8_t>(src[i] >> 8);
    be[2 * i + 1] = static_cast<std::uint8_t>(src[i] & 0xff);
  }
  std::vector<png_bytep> rows(image.height());
  for (int y = 0; y < image.height(); ++y) rows[y] = be.data() + static_cast<std::size_t>(y) * image.width() * 2;
  return encode_rows(image.width(), image.height(), 16, PNG_COLOR_TYPE_GRAY, rows);
}

void write8(const std::filesystem::path& path, const Image<std::uint8_t>& image) {
  write_file(path, encode8(image));
}

void write16(const std::filesystem::path& path, const Image<std::uint16_t>& image) {
  write_file(path, encode16(image));
}

Image<std::uint8_t> read8(const std::filesystem::path& path) {
  Decoded d = decode_file(path);
  if (d.bit_depth != 8) throw std::runtime_error("png: expected 8-bit samples in " + path.string());
  Image<std::uint8_t> img(d.width, d.height, d.channels);
  std::copy(d.raw.begin(), d.raw.end(), img.data().begin());
  return img;
}

Image<std::uint16_t> read16(const std::filesystem::path& path) {
  Decoded d = decode_file(path);
  if (d.bit_depth != 16 || d.channels != 1) {
    throw std::runtime_error("png: expected 16-bit grayscale in " + path.string());
  }
  Image<std::uint16_t> img(d.width, d.height, 1);
  std::memcpy(img.data().data(), d.raw.data(), d.raw.size());
  return img;
}

}  // namespace tactex::png
