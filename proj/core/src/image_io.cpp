#include "synthcity/image_io.hpp"

#include <cstring>
#include <vector>

#include <png.h>

#include "synthcity/errors.hpp"

namespace synthcity {

namespace {

std::vector<uint8_t> flip_rows(const uint8_t* src, int width, int height,
                               int channels) {
  std::vector<uint8_t> out(static_cast<size_t>(width) * height * channels);
  size_t stride = static_cast<size_t>(width) * channels;
  for (int j = 0; j < height; ++j)
    std::memcpy(out.data() + static_cast<size_t>(j) * stride,
                src + static_cast<size_t>(height - 1 - j) * stride, stride);
  return out;
}

}  // namespace

void write_png(const std::string& path, const Image& img) {
  if (img.channels != 1 && img.channels != 3)
    throw Error(Errc::io_error, "png writer handles 1 or 3 channels");
  if (img.width <= 0 || img.height <= 0)
    throw Error(Errc::io_error, "png writer needs a non-empty image");

  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width);
  png.height = static_cast<png_uint_32>(img.height);
  png.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;

  std::vector<uint8_t> rows =
      flip_rows(img.pixels.data(), img.width, img.height, img.channels);
  if (!png_image_write_to_file(&png, path.c_str(), 0, rows.data(), 0,
                               nullptr))
    throw Error(Errc::io_error,
                "cannot write '" + path + "': " + png.message);
}

Image read_png(const std::string& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str()))
    throw Error(Errc::io_error, "cannot read '" + path + "': " + png.message);

  int channels = PNG_IMAGE_PIXEL_CHANNELS(png.format) >= 3 ? 3 : 1;
  png.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;

  std::vector<uint8_t> rows(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, rows.data(), 0, nullptr))
    throw Error(Errc::io_error, "cannot read '" + path + "': " + png.message);

  Image img(static_cast<int>(png.width), static_cast<int>(png.height),
            channels);
  img.pixels = flip_rows(rows.data(), img.width, img.height, channels);
  return img;
}

}  // namespace synthcity
