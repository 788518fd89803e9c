#pragma once

// Run manifests: a JSON record written next to every CLI output so that a run
// can be audited and replayed.

#include <json.hpp>

#include <string>
#include <vector>

namespace srlpm::cli {

/// Hex SHA-1 of "blob <size>\0<bytes>", the object id git assigns to a file.
std::string git_blob_sha1(const std::string& path);

struct InputDigest {
  std::string path;
  std::string sha1;
};

struct RunManifest {
  std::string subcommand;
  /// Arguments after the program name, exactly as given.
  std::vector<std::string> argv;
  std::string dataset;
  nlohmann::json config = nlohmann::json::object();
  std::vector<InputDigest> inputs;
  std::vector<std::string> outputs;
  double wall_time_s = 0.0;
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

std::string manifest_path_for(const std::string& output);
void write_manifest(const std::string& path, const RunManifest& m);
RunManifest read_manifest(const std::string& path);

}  // namespace srlpm::cli
