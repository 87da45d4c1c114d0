#include "eventcube/sae/arch.hpp"

#include <json.hpp>

#include "eventcube/error.hpp"

namespace eventcube::sae {

using nlohmann::json;

LayerSpec LayerSpec::dense(std::uint32_t units) {
  LayerSpec l;
  l.kind = Kind::Dense;
  l.units = units;
  return l;
}

LayerSpec LayerSpec::conv2d(std::uint32_t filters, std::uint32_t kernel_h, std::uint32_t kernel_w,
                            std::uint32_t stride) {
  LayerSpec l;
  l.kind = Kind::Conv2d;
  l.filters = filters;
  l.kernel_h = kernel_h;
  l.kernel_w = kernel_w;
  l.stride = stride;
  return l;
}

LayerSpec LayerSpec::flatten() {
  LayerSpec l;
  l.kind = Kind::Flatten;
  return l;
}

std::uint32_t ArchSpec::bottleneck_dim() const {
  if (layers.empty() || layers.back().kind != LayerSpec::Kind::Dense) return 0;
  return layers.back().units;
}

std::size_t ArchSpec::input_size() const {
  std::size_t n = input_dims.empty() ? 0 : 1;
  for (auto d : input_dims) n *= d;
  return n;
}

ArchSpec ArchSpec::dense_cube() {
  ArchSpec a;
  a.input_dims = {24, 16, 16};
  a.layers = {LayerSpec::flatten(), LayerSpec::dense(1536), LayerSpec::dense(384), LayerSpec::dense(92),
              LayerSpec::dense(24)};
  return a;
}

ArchSpec ArchSpec::conv_map() {
  ArchSpec a;
  a.input_dims = {24, 16};
  a.layers = {LayerSpec::conv2d(32, 3, 3, 1), LayerSpec::conv2d(32, 2, 2, 2), LayerSpec::conv2d(16, 3, 3, 1),
              LayerSpec::conv2d(16, 2, 2, 2), LayerSpec::flatten(),         LayerSpec::dense(192),
              LayerSpec::dense(48),           LayerSpec::dense(12)};
  return a;
}

std::string to_string(const Shape& s) {
  switch (s.kind) {
    case Shape::Kind::Flat: return "(" + std::to_string(s.size()) + ")";
    case Shape::Kind::Image:
      return "(" + std::to_string(s.h) + "," + std::to_string(s.w) + "," + std::to_string(s.c) + ")";
    case Shape::Kind::Volume:
      return "(" + std::to_string(s.h) + "," + std::to_string(s.w) + "," + std::to_string(s.c) + ")";
  }
  return "?";
}

std::vector<Shape> infer_encoder_shapes(const ArchSpec& arch) {
  auto fail = [](const std::string& msg) { throw Error(Errc::ShapeInferenceFailure, msg); };

  Shape in;
  switch (arch.input_dims.size()) {
    case 1: in = {Shape::Kind::Flat, arch.input_dims[0], 1, 1}; break;
    case 2: in = {Shape::Kind::Image, 1, arch.input_dims[0], arch.input_dims[1]}; break;
    case 3: in = {Shape::Kind::Volume, arch.input_dims[2], arch.input_dims[0], arch.input_dims[1]}; break;
    default: fail("input must have 1 to 3 dims");
  }
  if (in.size() == 0) fail("zero-sized input");
  if (arch.layers.empty() || arch.layers.back().kind != LayerSpec::Kind::Dense) {
    fail("last encoder layer must be dense (the bottleneck)");
  }
  if (!(arch.leaky_slope > 0.0) || arch.bn_momentum < 0.0 || arch.bn_momentum >= 1.0 || !(arch.bn_epsilon > 0.0)) {
    fail("leaky_slope > 0, bn_momentum in [0, 1) and bn_epsilon > 0 required");
  }

  std::vector<Shape> shapes{in};
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    const auto& layer = arch.layers[i];
    const Shape& cur = shapes.back();
    const std::string where = "layer " + std::to_string(i) + ": ";
    switch (layer.kind) {
      case LayerSpec::Kind::Flatten:
        shapes.push_back({Shape::Kind::Flat, static_cast<std::uint32_t>(cur.size()), 1, 1});
        break;
      case LayerSpec::Kind::Dense:
        if (cur.kind != Shape::Kind::Flat) fail(where + "dense layer needs flat input; add a flatten layer");
        if (layer.units == 0) fail(where + "dense layer needs units >= 1");
        shapes.push_back({Shape::Kind::Flat, layer.units, 1, 1});
        break;
      case LayerSpec::Kind::Conv2d: {
        if (cur.kind != Shape::Kind::Image) fail(where + "conv2d needs a 2D input");
        if (layer.filters == 0 || layer.kernel_h == 0 || layer.kernel_w == 0 || layer.stride == 0) {
          fail(where + "conv2d needs positive filters, kernel and stride");
        }
        std::uint32_t oh = 0;
        std::uint32_t ow = 0;
        if (layer.stride == 1) {
          oh = cur.h;  // 'same' padding
          ow = cur.w;
        } else {
          if (layer.kernel_h > cur.h || layer.kernel_w > cur.w) fail(where + "kernel larger than input");
          oh = (cur.h - layer.kernel_h) / layer.stride + 1;
          ow = (cur.w - layer.kernel_w) / layer.stride + 1;
        }
        shapes.push_back({Shape::Kind::Image, layer.filters, oh, ow});
        break;
      }
    }
  }
  return shapes;
}

namespace {

json layer_to_json(const LayerSpec& l) {
  switch (l.kind) {
    case LayerSpec::Kind::Dense: return {{"type", "dense"}, {"units", l.units}};
    case LayerSpec::Kind::Flatten: return {{"type", "flatten"}};
    case LayerSpec::Kind::Conv2d:
      return {{"type", "conv2d"},
              {"filters", l.filters},
              {"kernel", {l.kernel_h, l.kernel_w}},
              {"stride", l.stride}};
  }
  return {};
}

LayerSpec layer_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "dense") return LayerSpec::dense(j.at("units").get<std::uint32_t>());
  if (type == "flatten") return LayerSpec::flatten();
  if (type == "conv2d") {
    const auto& k = j.at("kernel");
    return LayerSpec::conv2d(j.at("filters").get<std::uint32_t>(), k.at(0).get<std::uint32_t>(),
                             k.at(1).get<std::uint32_t>(), j.value("stride", 1u));
  }
  throw Error(Errc::InvalidConfig, "unknown layer type '" + type + "'");
}

}  // namespace

std::string arch_to_json(const ArchSpec& arch) {
  json j;
  j["input_dims"] = arch.input_dims;
  j["layers"] = json::array();
  for (const auto& l : arch.layers) j["layers"].push_back(layer_to_json(l));
  j["leaky_slope"] = arch.leaky_slope;
  j["bn_momentum"] = arch.bn_momentum;
  j["bn_epsilon"] = arch.bn_epsilon;
  j["batch_norm"] = arch.batch_norm;
  return j.dump();
}

ArchSpec arch_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    ArchSpec a;
    a.input_dims = j.at("input_dims").get<std::vector<std::uint32_t>>();
    for (const auto& l : j.at("layers")) a.layers.push_back(layer_from_json(l));
    a.leaky_slope = j.value("leaky_slope", a.leaky_slope);
    a.bn_momentum = j.value("bn_momentum", a.bn_momentum);
    a.bn_epsilon = j.value("bn_epsilon", a.bn_epsilon);
    a.batch_norm = j.value("batch_norm", a.batch_norm);
    return a;
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, std::string("architecture JSON: ") + e.what());
  }
}

}  // namespace eventcube::sae
