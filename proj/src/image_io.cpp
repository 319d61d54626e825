#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "formeclust/error.hpp"
#include "formeclust/profiling.hpp"

namespace formeclust {

namespace {

bool has_png_signature(const std::string& bytes) {
  static constexpr unsigned char sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  return bytes.size() >= 8 && std::memcmp(bytes.data(), sig, 8) == 0;
}

TitleImage decode_png(const std::string& bytes, const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw IoError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(image));
  // Transparent pixels composite onto white paper.
  png_color background{255, 255, 255};
  if (!png_image_finish_read(&image, &background, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IoError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  const int w = static_cast<int>(image.width);
  const int h = static_cast<int>(image.height);
  if (w == 0 || h == 0) throw IoError("zero-dimension image " + path.string());
  TitleImage img(h, w);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const int r = buffer[3 * i];
    const int g = buffer[3 * i + 1];
    const int b = buffer[3 * i + 2];
    const int luma = (299 * r + 587 * g + 114 * b + 500) / 1000;
    img.pixels[i] = static_cast<double>(255 - luma) / 255.0;
  }
  return img;
}

TitleImage decode_pgm(const std::string& bytes, const std::filesystem::path& path) {
  std::size_t pos = 2;
  auto skip_space_and_comments = [&] {
    while (pos < bytes.size()) {
      if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  };
  auto read_number = [&]() -> long {
    skip_space_and_comments();
    long v = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > 1'000'000'000) throw IoError("PGM header value out of range in " + path.string());
      ++pos;
      any = true;
    }
    if (!any) throw IoError("malformed PGM header in " + path.string());
    return v;
  };
  const bool binary = bytes[1] == '5';
  const long w = read_number();
  const long h = read_number();
  const long maxval = read_number();
  if (w <= 0 || h <= 0) throw IoError("zero-dimension image " + path.string());
  if (maxval <= 0 || maxval > 65535) throw IoError("bad PGM maxval in " + path.string());
  TitleImage img(static_cast<int>(h), static_cast<int>(w));
  const std::size_t n = img.pixels.size();
  if (binary) {
    ++pos;  // single whitespace byte after maxval
    const std::size_t bpp = maxval > 255 ? 2 : 1;
    if (bytes.size() < pos + n * bpp) throw IoError("truncated PGM " + path.string());
    for (std::size_t i = 0; i < n; ++i) {
      long v = static_cast<unsigned char>(bytes[pos + i * bpp]);
      if (bpp == 2) v = (v << 8) | static_cast<unsigned char>(bytes[pos + i * bpp + 1]);
      img.pixels[i] = static_cast<double>(maxval - std::min(v, maxval)) / static_cast<double>(maxval);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const long v = read_number();
      img.pixels[i] = static_cast<double>(maxval - std::min(v, maxval)) / static_cast<double>(maxval);
    }
  }
  return img;
}

}  // namespace

TitleImage load_title_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  if (has_png_signature(bytes)) return decode_png(bytes, path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '2' || bytes[1] == '5')) return decode_pgm(bytes, path);
  throw IoError("unsupported image format " + path.string());
}

void save_title_png(const TitleImage& img, const std::filesystem::path& path) {
  if (img.width <= 0 || img.height <= 0) throw IoError("cannot write empty image " + path.string());
  std::vector<unsigned char> gray(img.pixels.size());
  for (std::size_t i = 0; i < gray.size(); ++i) {
    const double ink = std::clamp(img.pixels[i], 0.0, 1.0);
    gray[i] = static_cast<unsigned char>(std::lround(255.0 - 255.0 * ink));
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(image, size, 0, gray.data(), 0, nullptr)) {
    throw IoError("cannot encode PNG " + path.string() + ": " + image.message);
  }
  std::vector<unsigned char> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, gray.data(), 0, nullptr)) {
    throw IoError("cannot encode PNG " + path.string() + ": " + image.message);
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + tmp.string());
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(size));
    if (!f) throw IoError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace formeclust
