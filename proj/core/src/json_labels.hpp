#pragma once

#include <stdexcept>

#include <json.hpp>

#include "eventcube/ingest.hpp"

namespace eventcube::detail {

inline SeriesLabels labels_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("labels must be an object");
  SeriesLabels labels;
  for (const auto& [key, value] : j.items()) {
    if (key == "variability_index") {
      if (!value.is_number()) throw std::invalid_argument("variability_index must be numeric");
      labels.variability_index = value.get<double>();
    } else if (key == "hardness_ratio") {
      if (!value.is_number()) throw std::invalid_argument("hardness_ratio must be numeric");
      labels.hardness_ratio = value.get<double>();
    } else if (key == "class_tag") {
      if (!value.is_string()) throw std::invalid_argument("class_tag must be a string");
      labels.class_tag = value.get<std::string>();
    } else {
      throw std::invalid_argument("unknown label '" + key + "'");
    }
  }
  return labels;
}

inline nlohmann::json labels_to_json(const SeriesLabels& labels) {
  nlohmann::json j = nlohmann::json::object();
  if (labels.class_tag) j["class_tag"] = *labels.class_tag;
  if (labels.hardness_ratio) j["hardness_ratio"] = *labels.hardness_ratio;
  if (labels.variability_index) j["variability_index"] = *labels.variability_index;
  return j;
}

}  // namespace eventcube::detail
