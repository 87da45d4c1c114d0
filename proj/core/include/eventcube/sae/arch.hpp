#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace eventcube::sae {

struct LayerSpec {
  enum class Kind { Dense, Conv2d, Flatten };

  Kind kind = Kind::Dense;
  std::uint32_t units = 0;    // dense
  std::uint32_t filters = 0;  // conv2d
  std::uint32_t kernel_h = 0;
  std::uint32_t kernel_w = 0;
  std::uint32_t stride = 1;

  static LayerSpec dense(std::uint32_t units);
  static LayerSpec conv2d(std::uint32_t filters, std::uint32_t kernel_h, std::uint32_t kernel_w,
                          std::uint32_t stride = 1);
  static LayerSpec flatten();

  bool operator==(const LayerSpec&) const = default;
};

/// Encoder description; the decoder is its mirror. The last layer must be
/// dense and is the bottleneck.
struct ArchSpec {
  std::vector<std::uint32_t> input_dims;
  std::vector<LayerSpec> layers;
  double leaky_slope = 0.01;
  double bn_momentum = 0.9;  // running = momentum * running + (1 - momentum) * batch
  double bn_epsilon = 1e-5;
  bool batch_norm = true;

  std::uint32_t bottleneck_dim() const;
  std::size_t input_size() const;

  /// Flatten -> 1536 -> 384 -> 92 -> 24 over (24, 16, 16) cubes.
  static ArchSpec dense_cube();
  /// Four conv layers -> 192 -> 48 -> 12 over (24, 16) maps.
  static ArchSpec conv_map();

  bool operator==(const ArchSpec&) const = default;
};

/// Activation shape. Spatial shapes are channel-major (C, H, W); rank-3
/// inputs (cubes) can only be flattened.
struct Shape {
  enum class Kind { Flat, Image, Volume };
  Kind kind = Kind::Flat;
  std::uint32_t c = 1;
  std::uint32_t h = 1;
  std::uint32_t w = 1;

  std::size_t size() const noexcept { return static_cast<std::size_t>(c) * h * w; }
  bool operator==(const Shape&) const = default;
};

std::string to_string(const Shape& s);

/// Input shape followed by the output shape of every encoder layer. Throws
/// ShapeInferenceFailure.
std::vector<Shape> infer_encoder_shapes(const ArchSpec& arch);

std::string arch_to_json(const ArchSpec& arch);
ArchSpec arch_from_json(std::string_view text);

}  // namespace eventcube::sae
