#pragma once

#include <string>

#include "udalab/casesolver.hpp"
#include "udalab/datagen.hpp"
#include "udalab/nnkit.hpp"
#include "udalab/poison.hpp"

namespace udalab::serialize {

// JSON text at the API boundary; all emitters produce deterministic bytes
// (sorted keys, shortest round-trip doubles).

std::string domain_pair_to_json(const domains::MixtureDomainPair& pair);
domains::MixtureDomainPair domain_pair_from_json(const std::string& text);

struct BoundsConfig {
  domains::MixtureDomainPair pair;
  domains::LinearUdaModel model;
};

/// Parses {"source": {...}, "target": {...}, "model": {"u": [..], "a": .., "b": ..}}.
BoundsConfig bounds_config_from_json(const std::string& text);
std::string bounds_config_to_json(const BoundsConfig& cfg);

std::string bound_report_to_json(const bounds::BoundReport& report);
std::string case_report_to_json(const casesolver::CaseReport& report);
std::string train_report_to_json(const nnkit::TrainReport& report);
std::string clean_label_trace_to_json(const poison::CleanLabelTrace& trace);

/// Model parameters as flat arrays (layer-major; each layer W row-major, then
/// bias), reloadable via mlp_from_json.
std::string mlp_to_json(const nnkit::Mlp& net);
nnkit::Mlp mlp_from_json(const std::string& text);

// Dataset CSV: header x0,x1,y,domain,is_poison; UTF-8; LF line endings;
// doubles in shortest round-trip form.
std::string dataset_to_csv(const datagen::Dataset& d);
datagen::Dataset dataset_from_csv(const std::string& text);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// Shortest round-trip decimal form of a double (std::to_chars).
std::string format_double(double v);

}  // namespace udalab::serialize
