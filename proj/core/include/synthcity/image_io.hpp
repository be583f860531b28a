#ifndef SYNTHCITY_IMAGE_IO_HPP
#define SYNTHCITY_IMAGE_IO_HPP

#include <string>

#include "synthcity/render.hpp"

namespace synthcity {

/// Write a 1- or 3-channel 8-bit image as PNG. Buffer rows follow world
/// northing (row 0 southernmost); the file is written north-up, so
/// write_png and read_png are inverses. Throws Error(io_error).
void write_png(const std::string& path, const Image& img);

/// Read a PNG written by write_png (or any 8-bit gray/rgb PNG) back into
/// the buffer row convention. Throws Error(io_error).
Image read_png(const std::string& path);

}  // namespace synthcity

#endif  // SYNTHCITY_IMAGE_IO_HPP
