#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace eventcube::cli {

/// Command-specific inputs gathered from flags. Hyperparameter flags are
/// folded into the RunConfig before a command runs.
struct CommandInputs {
  std::filesystem::path out;
  std::filesystem::path catalog;
  std::filesystem::path tensors;
  std::filesystem::path model;
  std::filesystem::path latents;
  std::filesystem::path embedding;
  std::filesystem::path events;
  std::filesystem::path tensor;
  std::string color_by;
  std::vector<std::string> ids;
  std::vector<double> vector;
  std::string target = "variability_index";
  std::string kind;
  double bin_seconds = 300.0;
};

void run_gen(const RunConfig& cfg, const CommandInputs& in);
void run_tensorize(const RunConfig& cfg, const CommandInputs& in);
void run_train(RunConfig cfg, const CommandInputs& in);
void run_encode(const RunConfig& cfg, const CommandInputs& in);
void run_project(const RunConfig& cfg, const CommandInputs& in);
void run_cluster(const RunConfig& cfg, const CommandInputs& in);
void run_knn(const RunConfig& cfg, const CommandInputs& in);
void run_score(const RunConfig& cfg, const CommandInputs& in);
void run_fit_head(const RunConfig& cfg, const CommandInputs& in);
void run_report(const RunConfig& cfg, const CommandInputs& in);

}  // namespace eventcube::cli
