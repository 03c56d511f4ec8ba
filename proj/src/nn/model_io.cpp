#include "tactile/nn/model_io.hpp"

#include <fstream>

#include "tactile/binary_io.hpp"

namespace tactile::nn {

using namespace tactile::io;

namespace {

void put_tensor(std::ostream& out, const Tensor<float>& t) {
  put_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (auto d : t.shape) put_u32(out, static_cast<std::uint32_t>(d));
  for (float v : t.data) put_f32(out, v);
}

void get_tensor(std::istream& in, Tensor<float>& t, std::size_t layer) {
  const std::uint32_t rank = get_u32(in);
  std::vector<std::size_t> shape(checked_count(rank, 8, "rank"));
  for (auto& d : shape) d = get_u32(in);
  if (shape != t.shape)
    throw ValidationError("layer " + std::to_string(layer) + ": stored tensor " + shape_string(shape) +
                          " does not match " + shape_string(t.shape));
  for (float& v : t.data) v = get_f32(in);
}

}  // namespace

void save_model(std::ostream& out, const Network<float>& net) {
  const Architecture& a = net.architecture();
  put_magic(out, "TNM1");
  put_u32(out, kModelVersion);
  put_u32(out, a.camera_count);
  put_u32(out, a.image_size);
  put_u32(out, static_cast<std::uint32_t>(a.conv_channels.size()));
  for (auto c : a.conv_channels) put_u32(out, c);
  put_u32(out, a.fc_units);
  put_u32(out, a.feature_width);
  put_f64(out, a.dropout);
  put_u8(out, static_cast<std::uint8_t>(a.fc_activation));
  put_u32(out, a.grid.nx);
  put_u32(out, a.grid.ny);
  put_u64(out, net.seed());
  put_u32(out, static_cast<std::uint32_t>(a.output_bins.size()));
  for (auto b : a.output_bins) put_u32(out, b);

  put_u32(out, static_cast<std::uint32_t>(net.layers().size()));
  for (const auto& l : net.layers()) {
    put_u8(out, static_cast<std::uint8_t>(l->kind()));
    put_u8(out, l->frozen ? 1 : 0);
    const auto desc = l->descriptor();
    put_u32(out, static_cast<std::uint32_t>(desc.size()));
    for (auto d : desc) put_u32(out, d);
    const auto params = l->parameters();
    const auto bufs = l->buffers();
    put_u32(out, static_cast<std::uint32_t>(params.size() + bufs.size()));
    for (auto* p : params) put_tensor(out, p->value);
    for (auto* b : bufs) put_tensor(out, *b);
  }
  if (!out) throw ValidationError("failed to write model");
}

Network<float> load_model(std::istream& in) {
  expect_magic(in, "TNM1", "model");
  const std::uint32_t version = get_u32(in);
  if (version != kModelVersion) throw ValidationError("unsupported model version " + std::to_string(version));
  Architecture a;
  a.camera_count = get_u32(in);
  a.image_size = get_u32(in);
  a.conv_channels.resize(checked_count(get_u32(in), 16, "conv stage"));
  for (auto& c : a.conv_channels) c = get_u32(in);
  a.fc_units = get_u32(in);
  a.feature_width = get_u32(in);
  a.dropout = get_f64(in);
  const std::uint8_t act = get_u8(in);
  if (act > 2) throw ValidationError("unknown FC activation");
  a.fc_activation = static_cast<Activation>(act);
  a.grid.nx = get_u32(in);
  a.grid.ny = get_u32(in);
  const std::uint64_t seed = get_u64(in);
  a.output_bins.resize(checked_count(get_u32(in), 1u << 20, "output bin"));
  for (auto& b : a.output_bins) b = get_u32(in);

  Network<float> net(a, seed);
  const std::uint32_t count = get_u32(in);
  if (count != net.layers().size())
    throw ValidationError("model has " + std::to_string(count) + " layers, architecture implies " +
                          std::to_string(net.layers().size()));
  for (std::size_t i = 0; i < count; ++i) {
    Layer<float>& l = *net.layers()[i];
    const auto kind = get_u8(in);
    if (kind != static_cast<std::uint8_t>(l.kind()))
      throw ValidationError("layer " + std::to_string(i) + ": unexpected layer kind");
    l.frozen = get_u8(in) != 0;
    const auto ndesc = checked_count(get_u32(in), 16, "descriptor");
    std::vector<std::uint32_t> desc(ndesc);
    for (auto& d : desc) d = get_u32(in);
    if (desc != l.descriptor()) throw ValidationError("layer " + std::to_string(i) + ": descriptor mismatch");
    const auto params = l.parameters();
    const auto bufs = l.buffers();
    if (get_u32(in) != params.size() + bufs.size())
      throw ValidationError("layer " + std::to_string(i) + ": tensor count mismatch");
    for (auto* p : params) get_tensor(in, p->value, i);
    for (auto* b : bufs) get_tensor(in, *b, i);
  }
  return net;
}

void save_model(const std::string& path, const Network<float>& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  save_model(out, net);
}

Network<float> load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  return load_model(in);
}

}  // namespace tactile::nn
