#include "udalab/manifest.hpp"

#include <bit>

#include <json.hpp>

#include "udalab/rng.hpp"
#include "udalab/serialize.hpp"
#include "udalab/version.hpp"

namespace udalab::manifest {

using nlohmann::json;

std::string canonical_json(const std::string& json_text) {
  // nlohmann::json objects iterate in key order, so dump() is canonical.
  return json::parse(json_text).dump();
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  static const char* hex = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = hex[h & 0xf];
    h >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf, 16);
}

RunManifest make_manifest(std::string command, std::vector<std::string> argv,
                          const std::string& config_json, std::uint64_t seed,
                          std::vector<std::string> outputs) {
  RunManifest m;
  m.command = std::move(command);
  m.argv = std::move(argv);
  m.config_json = canonical_json(config_json);
  m.config_hash = fnv1a_hex(m.config_json);
  m.seed = seed;
  m.tool_version = kVersion;
  m.outputs = std::move(outputs);
  return m;
}

std::string manifest_to_json(const RunManifest& m) {
  const json j{{"command", m.command},
               {"argv", m.argv},
               {"config", json::parse(m.config_json)},
               {"config_hash", m.config_hash},
               {"seed", m.seed},
               {"tool_version", m.tool_version},
               {"outputs", m.outputs}};
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
  const json j = json::parse(text);
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.argv = j.at("argv").get<std::vector<std::string>>();
  m.config_json = j.at("config").dump();
  m.config_hash = j.at("config_hash").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.tool_version = j.at("tool_version").get<std::string>();
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  return m;
}

void write_manifest(const RunManifest& m, const std::string& path) {
  serialize::write_file(path, manifest_to_json(m));
}

RunManifest read_manifest(const std::string& path) {
  return manifest_from_json(serialize::read_file(path));
}

namespace {
std::uint64_t string_bits(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}
}  // namespace

std::uint64_t derive_run_seed(std::uint64_t master, std::string_view method, double shift,
                              double fraction, int trial) {
  return rng::mix_seed({master, string_bits(method), std::bit_cast<std::uint64_t>(shift),
                        std::bit_cast<std::uint64_t>(fraction),
                        static_cast<std::uint64_t>(trial)});
}

std::uint64_t derive_stream_seed(std::uint64_t master, std::string_view name, double shift,
                                 double fraction, int trial) {
  return derive_run_seed(master, name, shift, fraction, trial);
}

}  // namespace udalab::manifest
