#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pursuit/cgan.hpp"

namespace pursuit {

/// Generator bundle directory: weights.mlp (MLPv1), spec.txt and
/// standardization.txt, all plain text.
void save_generator(const std::filesystem::path& dir, const Generator& g);
Generator load_generator(const std::filesystem::path& dir);

/// Artifact manifest. One per output directory, always `manifest.json`.
/// Carries no wall-clock time so that reruns are byte-identical.
struct Manifest {
  std::string command;
  std::string tool_version = kGeneratorVersion;
  std::string config_digest;
  std::map<std::string, std::uint64_t> seeds;
  std::map<std::string, std::string> parameters;
  std::map<std::string, std::string> parents;    // name -> digest of the input manifest or file
  std::map<std::string, std::string> artifacts;  // relative path -> digest
};

inline constexpr const char* kManifestName = "manifest.json";

std::string manifest_to_json(const Manifest& m);
Manifest manifest_from_json(const std::string& text);
/// Fills `artifacts` with the digest of every listed path (relative to dir)
/// and writes dir/manifest.json.
void write_manifest(const std::filesystem::path& dir, Manifest m, const std::vector<std::string>& artifacts);
Manifest read_manifest(const std::filesystem::path& dir);

enum class ModelKind { two_step, single_step };
const char* model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

/// A trained decision model as stored on disk.
struct ModelBundle {
  ModelKind kind = ModelKind::two_step;
  std::shared_ptr<const Generator> g1;      // two-step stage 1
  std::shared_ptr<const Generator> g2;      // two-step stage 2
  std::shared_ptr<const Generator> single;  // single-step
  double s1_query = 0.0;
  double s2_query = 0.0;
  Manifest manifest;
};

/// Writes g1/ and g2/ (or single/) under dir. The manifest is written by
/// the caller once every artifact in the directory exists.
void save_model_generators(const std::filesystem::path& dir, const ModelBundle& bundle);
/// Reads generators, query scores and manifest; the kind comes from the
/// manifest's `model` parameter.
ModelBundle load_model_bundle(const std::filesystem::path& dir);

}  // namespace pursuit
