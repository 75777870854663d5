#include <cstdio>
#include <fstream>

#include "commands.hpp"
#include "medsim/error.hpp"

namespace medsim::cli {

namespace {

ordered_json fingerprint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::uint64_t h = 1469598103934665603ull;
  std::uint64_t bytes = 0;
  char buf[1 << 14];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h = (h ^ static_cast<unsigned char>(buf[i])) * 1099511628211ull;
    }
    bytes += static_cast<std::uint64_t>(in.gcount());
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  ordered_json j;
  j["path"] = path.string();
  j["bytes"] = bytes;
  j["fnv1a64"] = hex;
  return j;
}

}  // namespace

void print_config(std::ostream& out, std::string_view command, const ordered_json& config) {
  ordered_json j;
  j["command"] = command;
  j["config"] = config;
  out << "resolved config: " << j.dump() << "\n";
}

std::filesystem::path manifest_path(const std::filesystem::path& artifact) {
  return artifact.string() + ".manifest.json";
}

void write_manifest(const std::filesystem::path& artifact, std::string_view command,
                    const ordered_json& config,
                    const std::vector<std::filesystem::path>& inputs,
                    const ordered_json& result) {
  ordered_json j;
  j["tool"] = "medsim";
  j["version"] = MEDSIM_VERSION;
  j["command"] = command;
  j["artifact"] = artifact.string();
  j["config"] = config;
  j["inputs"] = ordered_json::array();
  for (const auto& p : inputs) j["inputs"].push_back(fingerprint(p));
  if (!result.is_null()) j["result"] = result;
  std::ofstream out(manifest_path(artifact));
  out << j.dump(2) << "\n";
  if (!out) throw RuntimeFailure("cannot write manifest for '" + artifact.string() + "'");
}

}  // namespace medsim::cli
