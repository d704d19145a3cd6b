#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace udalab::manifest {

/// Provenance record written beside every CLI output. Re-running the stored
/// argv reproduces the outputs byte-identically. No timestamps by design.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::string config_json;  ///< resolved configuration, canonical form
  std::string config_hash;  ///< FNV-1a 64 of config_json, 16 hex digits
  std::uint64_t seed = 0;
  std::string tool_version;
  std::vector<std::string> outputs;
};

/// Canonical JSON: parse and re-dump with sorted keys, so the hash is stable
/// under key reordering.
std::string canonical_json(const std::string& json_text);

std::string fnv1a_hex(std::string_view bytes);

/// Builds a manifest with config_json canonicalized and hashed.
RunManifest make_manifest(std::string command, std::vector<std::string> argv,
                          const std::string& config_json, std::uint64_t seed,
                          std::vector<std::string> outputs);

std::string manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const std::string& text);

void write_manifest(const RunManifest& m, const std::string& path);
RunManifest read_manifest(const std::string& path);

/// Per-run seed for one sweep cell, decoupling cells from each other.
std::uint64_t derive_run_seed(std::uint64_t master, std::string_view method, double shift,
                              double fraction, int trial);

/// Named auxiliary stream (e.g. "data", "poison") for one sweep cell.
std::uint64_t derive_stream_seed(std::uint64_t master, std::string_view name, double shift,
                                 double fraction, int trial);

}  // namespace udalab::manifest
