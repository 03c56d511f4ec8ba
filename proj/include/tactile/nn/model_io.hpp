#pragma once

// "TNM1" model files. All integers and floats little-endian.
//
//   magic "TNM1", u32 version
//   architecture: u32 cameras, u32 image size, u32 stages, u32 widths...,
//                 u32 fc units, u32 feature width, f64 dropout, u8 FC activation,
//                 u32 nx, u32 ny, u64 seed, u32 bins, u32 bin ids...
//   u32 layer count, then per layer:
//     u8 kind, u8 frozen, u32 n, u32 descriptor[n],
//     u32 tensors, per tensor: u32 rank, u32 dims..., f32 data
//   (parameters first, then buffers such as batch-norm running stats)

#include <iosfwd>
#include <string>

#include "tactile/nn/network.hpp"

namespace tactile::nn {

inline constexpr std::uint32_t kModelVersion = 1;

void save_model(std::ostream& out, const Network<float>& net);
/// Throws ValidationError on a malformed or truncated file.
Network<float> load_model(std::istream& in);

void save_model(const std::string& path, const Network<float>& net);
Network<float> load_model(const std::string& path);

}  // namespace tactile::nn
