#include "pforge/image_io.hpp"

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

namespace pforge::io {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

enum class Format { png, jpeg };

Format sniff(std::FILE* f, const std::filesystem::path& path) {
  unsigned char sig[8] = {};
  const auto n = std::fread(sig, 1, sizeof(sig), f);
  std::rewind(f);
  if (n == 8 && png_sig_cmp(sig, 0, 8) == 0) return Format::png;
  if (n >= 3 && sig[0] == 0xFF && sig[1] == 0xD8 && sig[2] == 0xFF) return Format::jpeg;
  throw IoError("unsupported image format: " + path.string());
}

/// Decoded pixels before channel conversion.
struct Decoded {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 (gray), 2 (gray+alpha), 3 (rgb), 4 (rgba)
  std::vector<std::uint8_t> data;
};

Decoded decode_png(std::FILE* f, const std::filesystem::path& path, bool header_only) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng init failed");
  }
  Decoded out;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("corrupt PNG: " + path.string());
  }
  png_init_io(png, f);
  png_read_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  if (header_only) {
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
  }
  const auto color = png_get_color_type(png, info);
  const auto depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_read_update_info(png, info);
  out.channels = png_get_channels(png, info);
  const auto stride = png_get_rowbytes(png, info);
  out.data.resize(stride * out.height);
  rows.resize(out.height);
  for (int y = 0; y < out.height; ++y) rows[y] = out.data.data() + stride * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  std::longjmp(err->jump, 1);
}

Decoded decode_jpeg(std::FILE* f, const std::filesystem::path& path, bool header_only) {
  jpeg_decompress_struct cinfo;
  JpegError err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_error_exit;
  Decoded out;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw IoError("corrupt JPEG: " + path.string());
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, f);
  jpeg_read_header(&cinfo, TRUE);
  out.width = static_cast<int>(cinfo.image_width);
  out.height = static_cast<int>(cinfo.image_height);
  if (header_only) {
    jpeg_destroy_decompress(&cinfo);
    return out;
  }
  cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out.channels = static_cast<int>(cinfo.output_components);
  const std::size_t stride = static_cast<std::size_t>(out.width) * out.channels;
  out.data.resize(stride * out.height);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.data.data() + stride * cinfo.output_scanline;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return out;
}

Decoded decode(const std::filesystem::path& path, bool header_only = false) {
  auto f = open_file(path, "rb");
  return sniff(f.get(), path) == Format::png ? decode_png(f.get(), path, header_only)
                                             : decode_jpeg(f.get(), path, header_only);
}

template <int C>
Image<C> convert(const Decoded& d) {
  Image<C> out(d.width, d.height);
  auto dst = out.bytes();
  const std::size_t n = out.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* s = d.data.data() + i * d.channels;
    std::uint8_t r, g, b, a;
    switch (d.channels) {
      case 1: r = g = b = s[0]; a = 255; break;
      case 2: r = g = b = s[0]; a = s[1]; break;
      case 3: r = s[0]; g = s[1]; b = s[2]; a = 255; break;
      default: r = s[0]; g = s[1]; b = s[2]; a = s[3]; break;
    }
    std::uint8_t* p = dst.data() + i * C;
    if constexpr (C == 1) {
      // Gray sources keep their value; colour sources use Rec.601 luma.
      p[0] = d.channels <= 2 ? r : round_to_u8(0.299 * r + 0.587 * g + 0.114 * b);
    } else {
      p[0] = r;
      p[1] = g;
      p[2] = b;
      if constexpr (C == 4) p[3] = a;
    }
  }
  return out;
}

void encode_png(const std::filesystem::path& path, int width, int height, int color_type,
                int channels, std::span<const std::uint8_t> data) {
  if (width <= 0 || height <= 0) throw IoError("cannot write empty image: " + path.string());
  auto f = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng init failed");
  }
  std::vector<png_bytep> rows(height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG write failed: " + path.string());
  }
  png_init_io(png, f.get());
  png_set_compression_level(png, 6);
  png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_SUB | PNG_FILTER_UP | PNG_FILTER_PAETH);
  png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  for (int y = 0; y < height; ++y)
    rows[y] = const_cast<png_bytep>(data.data() + stride * y);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(f.get()) != 0) throw IoError("PNG write failed: " + path.string());
}

}  // namespace

RgbImage read_rgb(const std::filesystem::path& path) { return convert<3>(decode(path)); }
RgbaImage read_rgba(const std::filesystem::path& path) { return convert<4>(decode(path)); }
GrayImage read_gray(const std::filesystem::path& path) { return convert<1>(decode(path)); }

Size read_size(const std::filesystem::path& path) {
  const auto d = decode(path, true);
  return {d.width, d.height};
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
  encode_png(path, image.width(), image.height(), PNG_COLOR_TYPE_RGB, 3, image.bytes());
}

void write_png(const std::filesystem::path& path, const RgbaImage& image) {
  encode_png(path, image.width(), image.height(), PNG_COLOR_TYPE_RGB_ALPHA, 4, image.bytes());
}

void write_png(const std::filesystem::path& path, const GrayImage& image) {
  encode_png(path, image.width(), image.height(), PNG_COLOR_TYPE_GRAY, 1, image.bytes());
}

}  // namespace pforge::io
