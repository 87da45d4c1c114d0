#pragma once

#include <span>
#include <string>
#include <vector>

#include "eventcube/sae/model.hpp"
#include "eventcube/tensorize.hpp"

namespace eventcube::sae {

struct LatentVector {
  std::string series_id;
  std::vector<float> z;
};

/// Throws ArchMismatch when the tensor shape differs from the model input.
void check_tensor_dims(const SaeModel& model, const Tensor& tensor);

/// One column per tensor (float32). All tensors must share a shape.
Matrix<float> stack_tensors(std::span<const Tensor> tensors);

/// Infer-mode encoder output for one tensor.
LatentVector encode(const SaeModel& model, const Tensor& tensor);

/// Batched encode; rows of the result follow the input order.
std::vector<LatentVector> encode_all(const SaeModel& model, std::span<const Tensor> tensors,
                                     std::size_t chunk = 512);

}  // namespace eventcube::sae
