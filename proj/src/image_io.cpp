#include "mcwnnm/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <png.h>

namespace mcwnnm {

namespace fs = std::filesystem;

unsigned char quantize(double v) {
  return static_cast<unsigned char>(std::clamp(std::round(v), 0.0, kPeak));
}

namespace {

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string ppm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

int parse_positive(const std::string& tok, const char* what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used == tok.size() && v > 0) return v;
  } catch (const std::exception&) {
  }
  throw std::runtime_error(std::string("PPM: invalid ") + what + " '" + tok + "'");
}

ImagePlanes from_interleaved(const std::vector<unsigned char>& bytes, int width, int height) {
  ImagePlanes img(width, height);
  for (int r = 0; r < height; ++r) {
    for (int k = 0; k < width; ++k) {
      const std::size_t base = (static_cast<std::size_t>(r) * width + k) * 3;
      for (int c = 0; c < kChannels; ++c) img.at(c, r, k) = bytes[base + c];
    }
  }
  return img;
}

std::vector<unsigned char> to_interleaved(const ImagePlanes& img) {
  std::vector<unsigned char> bytes(img.pixel_count() * 3);
  for (int r = 0; r < img.height(); ++r) {
    for (int k = 0; k < img.width(); ++k) {
      const std::size_t base = (static_cast<std::size_t>(r) * img.width() + k) * 3;
      for (int c = 0; c < kChannels; ++c) bytes[base + c] = quantize(img.at(c, r, k));
    }
  }
  return bytes;
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw std::runtime_error("cannot open " + path.string());
  return f;
}

[[noreturn]] void png_fail(png_structp, png_const_charp msg) {
  throw std::runtime_error(std::string("PNG: ") + msg);
}

void png_warn(png_structp, png_const_charp) {}

}  // namespace

ImagePlanes read_ppm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::string magic = ppm_token(in);
  if (magic != "P6") {
    throw std::runtime_error("unsupported PNM format '" + magic + "' (only binary P6 is read)");
  }
  const int width = parse_positive(ppm_token(in), "width");
  const int height = parse_positive(ppm_token(in), "height");
  const int maxval = parse_positive(ppm_token(in), "maxval");
  if (maxval != 255) {
    throw std::runtime_error("unsupported PPM maxval " + std::to_string(maxval) +
                             " (only 8-bit, maxval 255)");
  }
  std::vector<unsigned char> bytes(static_cast<std::size_t>(width) * height * 3);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw std::runtime_error("PPM: truncated pixel data in " + path.string());
  }
  return from_interleaved(bytes, width, height);
}

void write_ppm(const ImagePlanes& img, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
  const auto bytes = to_interleaved(img);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

ImagePlanes read_png(const fs::path& path) {
  FilePtr f = open_file(path, "rb");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw std::runtime_error("not a PNG file: " + path.string());
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_read_struct(p, i, nullptr); }
  } guard{&png, &info};

  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (depth == 16) {
    throw std::runtime_error("unsupported PNG bit depth 16 (only 8-bit images are accepted)");
  }
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_set_gray_to_rgb(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  if (png_get_rowbytes(png, info) != static_cast<std::size_t>(width) * 3) {
    throw std::runtime_error("unsupported PNG pixel layout");
  }
  std::vector<unsigned char> bytes(static_cast<std::size_t>(width) * height * 3);
  std::vector<png_bytep> rows(height);
  for (int r = 0; r < height; ++r) rows[r] = bytes.data() + static_cast<std::size_t>(r) * width * 3;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  return from_interleaved(bytes, width, height);
}

void write_png(const ImagePlanes& img, const fs::path& path) {
  FilePtr f = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_write_struct(p, i); }
  } guard{&png, &info};

  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
               static_cast<png_uint_32>(img.height()), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  auto bytes = to_interleaved(img);
  for (int r = 0; r < img.height(); ++r) {
    png_write_row(png, bytes.data() + static_cast<std::size_t>(r) * img.width() * 3);
  }
  png_write_end(png, nullptr);
}

ImagePlanes image_read(const fs::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".ppm" || ext == ".pnm") return read_ppm(path);
  if (ext == ".png") return read_png(path);
  throw std::runtime_error("unsupported image format '" + ext + "' (use .ppm or .png)");
}

void image_write(const ImagePlanes& img, const fs::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".ppm" || ext == ".pnm") return write_ppm(img, path);
  if (ext == ".png") return write_png(img, path);
  throw std::runtime_error("unsupported image format '" + ext + "' (use .ppm or .png)");
}

}  // namespace mcwnnm
