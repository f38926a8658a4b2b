#pragma once

#include <filesystem>
#include <string>

#include "finsler/pipeline.hpp"
#include "json.hpp"

namespace finsler::cli {

/// Git blob id of a file: sha1("blob <size>\0" + bytes), lowercase hex.
std::string git_blob_sha1(const std::filesystem::path& path);

nlohmann::json config_to_json(const PipelineConfig& config, bool extended);
/// Inverse of config_to_json; unknown keys are ignored, missing ones keep defaults.
PipelineConfig config_from_json(const nlohmann::json& j, bool* extended = nullptr);

struct Manifest {
  std::filesystem::path input;
  std::string input_sha1;
  PipelineConfig config;
  bool extended = false;
  std::filesystem::path embedding;
  std::filesystem::path trace;
};

nlohmann::json manifest_to_json(const Manifest& m, const Pipeline& pipeline, double seconds);
Manifest load_manifest(const std::filesystem::path& path);

}  // namespace finsler::cli
