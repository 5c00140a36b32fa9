#pragma once

#include <iosfwd>
#include <string>

#include "sgnet/tensor.hpp"

namespace sgnet {

/// Depth map decoded from a binary PGM. Raw samples map linearly from [0, maxval] onto
/// [z_min, z_max] meters, with the range carried in a "#depth_range z_min z_max" comment.
struct DepthImage {
    Tensor depth;  // [1,1,H,W]
    double z_min = 0.0;
    double z_max = 1.0;
    int bits = 16;
};

DepthImage read_depth_pgm(std::istream& in);
DepthImage read_depth_pgm(const std::string& path);
// Values outside [z_min, z_max] are clamped. bits is 8 or 16 (big-endian samples).
void write_depth_pgm(std::ostream& out, const Tensor& depth, double z_min, double z_max, int bits = 16);
void write_depth_pgm(const std::string& path, const Tensor& depth, double z_min, double z_max,
                     int bits = 16);

// 8-bit binary PPM <-> [1,3,H,W] tensor in [0,1].
Tensor read_rgb_ppm(std::istream& in);
Tensor read_rgb_ppm(const std::string& path);
void write_rgb_ppm(std::ostream& out, const Tensor& rgb);
void write_rgb_ppm(const std::string& path, const Tensor& rgb);

// Dispatches on the magic: P5 -> depth, P6 -> RGB.
Tensor read_image(const std::string& path);

}  // namespace sgnet
