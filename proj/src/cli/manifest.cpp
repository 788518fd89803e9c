#include "srlpm/cli/manifest.hpp"

#include "srlpm/io.hpp"
#include "srlpm/types.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

namespace srlpm::cli {

std::string git_blob_sha1(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for hashing");
  const auto size = std::filesystem::file_size(path);

  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1) {
    throw Error("SHA-1 initialisation failed");
  }
  const std::string header = "blob " + std::to_string(size);
  EVP_DigestUpdate(ctx.get(), header.data(), header.size() + 1);  // with NUL

  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) {
      EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);

  std::string hex;
  hex.reserve(2 * len);
  char pair[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(pair, sizeof pair, "%02x", digest[i]);
    hex += pair;
  }
  return hex;
}

nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& d : m.inputs) inputs.push_back({{"path", d.path}, {"sha1", d.sha1}});
  return {
      {"subcommand", m.subcommand}, {"argv", m.argv},
      {"dataset", m.dataset},       {"config", m.config},
      {"inputs", inputs},           {"outputs", m.outputs},
      {"wall_time_s", m.wall_time_s},
  };
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  try {
    m.subcommand = j.at("subcommand").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.dataset = j.value("dataset", "");
    m.config = j.value("config", nlohmann::json::object());
    for (const auto& d : j.value("inputs", nlohmann::json::array())) {
      m.inputs.push_back({d.at("path").get<std::string>(), d.at("sha1").get<std::string>()});
    }
    m.outputs = j.value("outputs", std::vector<std::string>{});
    m.wall_time_s = j.value("wall_time_s", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
  return m;
}

std::string manifest_path_for(const std::string& output) {
  return output + ".manifest.json";
}

void write_manifest(const std::string& path, const RunManifest& m) {
  const std::string text = to_json(m).dump(2) + "\n";
  write_file_atomic(path, [&](std::ostream& out) { out << text; });
}

RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open manifest '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("manifest '" + path + "': " + e.what());
  }
  return manifest_from_json(j);
}

}  // namespace srlpm::cli
