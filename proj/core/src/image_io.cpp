// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#include "gs360/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

namespace gs360 {

namespace {

struct FileCloser {
  void operator()(FILE *f) const {
    if (f)
      std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

bool host_is_little_endian() {
  const uint16_t probe = 1;
  return *reinterpret_cast<const uint8_t *>(&probe) == 1;
}

void swap_floats(float *data, size_t n) {
  auto *bytes = reinterpret_cast<uint8_t *>(data);
  for (size_t i = 0; i < n; ++i)
    std::swap(bytes[4 * i], bytes[4 * i + 3]), std::swap(bytes[4 * i + 1], bytes[4 * i + 2]);
}

// Reads one whitespace-delimited PFM header token.
std::string next_token(FILE *f) {
  std::string tok;
  int c;
  while ((c = std::fgetc(f)) != EOF && std::isspace(c)) {
  }
  while (c != EOF && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
    c = std::fgetc(f);
  }
  return tok;
}

} // namespace

void write_pfm(const std::string &path, const Image &img) {
  if (img.channels() != 1 && img.channels() != 3)
    throw std::invalid_argument("write_pfm: image must have 1 or 3 channels");
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f)
    throw IoError("cannot write PFM: " + path);
  const int w = img.width(), h = img.height(), c = img.channels();
  std::fprintf(f.get(), "%s\n%d %d\n-1.0\n", c == 3 ? "PF" : "Pf", w, h);
  std::vector<float> row(static_cast<size_t>(w) * c);
  for (int v = h - 1; v >= 0; --v) { // bottom row first
    for (int u = 0; u < w; ++u)
      for (int k = 0; k < c; ++k)
        row[static_cast<size_t>(u) * c + k] = static_cast<float>(img.at(u, v, k));
    if (!host_is_little_endian())
      swap_floats(row.data(), row.size());
    if (std::fwrite(row.data(), sizeof(float), row.size(), f.get()) != row.size())
      throw IoError("short write on PFM: " + path);
  }
}

Image read_pfm(const std::string &path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f)
    throw IoError("cannot open PFM: " + path);
  std::string magic = next_token(f.get());
  int channels;
  if (magic == "PF")
    channels = 3;
  else if (magic == "Pf")
    channels = 1;
  else
    throw IoError("not a PFM file: " + path);
  int w = 0, h = 0;
  double scale = 0.0;
  try {
    w = std::stoi(next_token(f.get()));
    h = std::stoi(next_token(f.get()));
    scale = std::stod(next_token(f.get()));
  } catch (const std::exception &) {
    throw IoError("malformed PFM header: " + path);
  }
  if (w < 1 || h < 1 || scale == 0.0)
    throw IoError("malformed PFM header: " + path);
  const bool file_little = scale < 0.0;
  Image img(w, h, channels);
  std::vector<float> row(static_cast<size_t>(w) * channels);
  for (int v = h - 1; v >= 0; --v) {
    if (std::fread(row.data(), sizeof(float), row.size(), f.get()) != row.size())
      throw IoError("truncated PFM data: " + path);
    if (file_little != host_is_little_endian())
      swap_floats(row.data(), row.size());
    for (int u = 0; u < w; ++u)
      for (int k = 0; k < channels; ++k)
        img.at(u, v, k) = row[static_cast<size_t>(u) * channels + k];
  }
  return img;
}

void write_png8(const std::string &path, const Image &img) {
  if (img.channels() != 3)
    throw std::invalid_argument("write_png8: image must have 3 channels");
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f)
    throw IoError("cannot write PNG: " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng write failed: " + path);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, img.width(), img.height(), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_byte> row(static_cast<size_t>(img.width()) * 3);
  for (int v = 0; v < img.height(); ++v) {
    for (int u = 0; u < img.width(); ++u)
      for (int k = 0; k < 3; ++k) {
        double x = std::clamp(img.at(u, v, k), 0.0, 1.0);
        row[static_cast<size_t>(u) * 3 + k] =
            static_cast<png_byte>(std::lround(x * 255.0));
      }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image read_png8(const std::string &path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f)
    throw IoError("cannot open PNG: " + path);
  png_byte header[8];
  if (std::fread(header, 1, 8, f.get()) != 8 || png_sig_cmp(header, 0, 8))
    throw IoError("not a PNG file: " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng read failed: " + path);
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  // Normalize everything to 8-bit RGB.
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  Image img(w, h, 3);
  std::vector<png_byte> row(static_cast<size_t>(w) * 3);
  for (int v = 0; v < h; ++v) {
    png_read_row(png, row.data(), nullptr);
    for (int u = 0; u < w; ++u)
      for (int k = 0; k < 3; ++k)
        img.at(u, v, k) = row[static_cast<size_t>(u) * 3 + k] / 255.0;
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

Image read_image(const std::string &path) {
  auto dot = path.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  for (auto &c : ext)
    c = static_cast<char>(std::tolower(c));
  if (ext == ".pfm")
    return read_pfm(path);
  if (ext == ".png")
    return read_png8(path);
  throw IoError("unsupported image extension (want .pfm or .png): " + path);
}

} // namespace gs360
