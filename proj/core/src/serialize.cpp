#include "udalab/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace udalab::serialize {

using nlohmann::json;

namespace {

json vec2_to_json(const domains::Vec2& v) { return json::array({v.x(), v.y()}); }

domains::Vec2 vec2_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("expected a 2-vector");
  return domains::Vec2(j[0].get<double>(), j[1].get<double>());
}

json domain_to_json(const domains::MixtureDomain& d) {
  return json{{"mu_pos", vec2_to_json(d.mu_pos)},
              {"mu_neg", vec2_to_json(d.mu_neg)},
              {"sigma", d.sigma},
              {"label_normal", vec2_to_json(d.label_normal)}};
}

domains::MixtureDomain domain_from_json(const json& j) {
  return domains::MixtureDomain::make(vec2_from_json(j.at("mu_pos")), vec2_from_json(j.at("mu_neg")),
                                      j.at("sigma").get<double>(),
                                      vec2_from_json(j.at("label_normal")));
}

json model_to_json_obj(const domains::LinearUdaModel& m) {
  return json{{"u", vec2_to_json(m.u)}, {"a", m.a}, {"b", m.b}};
}

domains::LinearUdaModel model_from_json_obj(const json& j) {
  return domains::LinearUdaModel{vec2_from_json(j.at("u")), j.at("a").get<double>(),
                                 j.at("b").get<double>()};
}

json measures_to_json(const measures::MeasureSet& m) {
  return json{{"e_S_sq", m.e_S_sq},         {"e_S_abs", m.e_S_abs}, {"e_T_abs", m.e_T_abs},
              {"mismatch_S", m.mismatch_S}, {"mismatch_T", m.mismatch_T},
              {"tv", m.tv},                 {"mismatch_sq", m.mismatch_sq}, {"kl", m.kl}};
}

json bound_report_to_json_obj(const bounds::BoundReport& r) {
  return json{{"measures", measures_to_json(r.measures)},
              {"lower_bound", r.lower_bound},
              {"upper_bound", r.upper_bound},
              {"pinsker_lower_bound", r.pinsker_lower_bound},
              {"sandwich_ok", r.sandwich_ok},
              {"lb_le_eT", r.lb_le_eT},
              {"eT_le_ub", r.eT_le_ub}};
}

const char* outcome_name(casesolver::Outcome o) {
  return o == casesolver::Outcome::success ? "success" : "failure";
}

}  // namespace

std::string domain_pair_to_json(const domains::MixtureDomainPair& pair) {
  const json j{{"source", domain_to_json(pair.source)}, {"target", domain_to_json(pair.target)}};
  return j.dump(2) + "\n";
}

domains::MixtureDomainPair domain_pair_from_json(const std::string& text) {
  const json j = json::parse(text);
  return domains::MixtureDomainPair{domain_from_json(j.at("source")),
                                    domain_from_json(j.at("target"))};
}

BoundsConfig bounds_config_from_json(const std::string& text) {
  const json j = json::parse(text);
  return BoundsConfig{{domain_from_json(j.at("source")), domain_from_json(j.at("target"))},
                      model_from_json_obj(j.at("model"))};
}

std::string bounds_config_to_json(const BoundsConfig& cfg) {
  const json j{{"source", domain_to_json(cfg.pair.source)},
               {"target", domain_to_json(cfg.pair.target)},
               {"model", model_to_json_obj(cfg.model)}};
  return j.dump(2) + "\n";
}

std::string bound_report_to_json(const bounds::BoundReport& report) {
  return bound_report_to_json_obj(report).dump(2) + "\n";
}

std::string case_report_to_json(const casesolver::CaseReport& report) {
  json restarts = json::array();
  for (const auto& r : report.restart_outcomes) {
    restarts.push_back(json{{"u", vec2_to_json(r.u)},
                            {"e_T", r.e_T},
                            {"outcome", outcome_name(r.outcome)},
                            {"objective", r.objective},
                            {"converged", r.converged}});
  }
  const json j{{"best_params", model_to_json_obj(report.best_params)},
               {"objective", report.objective},
               {"bound_report", bound_report_to_json_obj(report.bound_report)},
               {"outcome", outcome_name(report.outcome)},
               {"restart_outcomes", restarts}};
  return j.dump(2) + "\n";
}

namespace {

json mlp_to_json_obj(const nnkit::Mlp& net) {
  json sizes = json::array();
  if (!net.layers.empty()) {
    sizes.push_back(net.layers.front().W.rows());
    for (const auto& l : net.layers) sizes.push_back(l.W.cols());
  }
  json params = json::array();
  for (const auto& l : net.layers) {
    for (int i = 0; i < l.W.rows(); ++i)
      for (int jc = 0; jc < l.W.cols(); ++jc) params.push_back(l.W(i, jc));
    for (int i = 0; i < l.b.size(); ++i) params.push_back(l.b[i]);
  }
  return json{{"sizes", sizes},
              {"activation", net.activation == nnkit::Activation::relu ? "relu" : "tanh"},
              {"activate_output", net.activate_output},
              {"params", params}};
}

nnkit::Mlp mlp_from_json_obj(const json& j) {
  nnkit::Mlp net;
  net.activation = j.at("activation").get<std::string>() == "relu" ? nnkit::Activation::relu
                                                                   : nnkit::Activation::tanh;
  net.activate_output = j.at("activate_output").get<bool>();
  const auto sizes = j.at("sizes").get<std::vector<int>>();
  const auto params = j.at("params").get<std::vector<double>>();
  std::size_t pos = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    nnkit::LinearLayer layer;
    layer.W.resize(sizes[l], sizes[l + 1]);
    for (int i = 0; i < sizes[l]; ++i)
      for (int jc = 0; jc < sizes[l + 1]; ++jc) layer.W(i, jc) = params.at(pos++);
    layer.b.resize(sizes[l + 1]);
    for (int i = 0; i < sizes[l + 1]; ++i) layer.b[i] = params.at(pos++);
    net.layers.push_back(std::move(layer));
  }
  if (pos != params.size()) throw std::invalid_argument("mlp_from_json: trailing parameters");
  return net;
}

}  // namespace

std::string mlp_to_json(const nnkit::Mlp& net) { return mlp_to_json_obj(net).dump(2) + "\n"; }

nnkit::Mlp mlp_from_json(const std::string& text) { return mlp_from_json_obj(json::parse(text)); }

std::string train_report_to_json(const nnkit::TrainReport& report) {
  const json j{{"seed", report.seed},
               {"source_accuracy", report.source_accuracy},
               {"target_accuracy", report.target_accuracy},
               {"adv_loss", report.adv_loss},
               {"model",
                json{{"feature", mlp_to_json_obj(report.model.feature)},
                     {"classifier", mlp_to_json_obj(report.model.classifier)},
                     {"discriminator", mlp_to_json_obj(report.model.discriminator)},
                     {"classifier2", mlp_to_json_obj(report.model.classifier2)}}}};
  return j.dump(2) + "\n";
}

std::string clean_label_trace_to_json(const poison::CleanLabelTrace& trace) {
  const json j{{"objective_before", trace.objective_before},
               {"objective_after", trace.objective_after},
               {"failed", trace.failed}};
  return j.dump(2) + "\n";
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string dataset_to_csv(const datagen::Dataset& d) {
  std::string out = "x0,x1,y,domain,is_poison\n";
  for (const auto& s : d.samples) {
    out += format_double(s.x.x());
    out += ',';
    out += format_double(s.x.y());
    out += ',';
    out += std::to_string(s.y);
    out += ',';
    out += s.domain == datagen::DomainTag::source ? "source" : "target";
    out += ',';
    out += s.is_poison ? '1' : '0';
    out += '\n';
  }
  return out;
}

datagen::Dataset dataset_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "x0,x1,y,domain,is_poison")
    throw std::invalid_argument("dataset_from_csv: bad header");
  datagen::Dataset d;
  int max_label = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    datagen::LabeledSample s;
    std::getline(ls, field, ',');
    s.x.x() = std::stod(field);
    std::getline(ls, field, ',');
    s.x.y() = std::stod(field);
    std::getline(ls, field, ',');
    s.y = std::stoi(field);
    std::getline(ls, field, ',');
    if (field == "source")
      s.domain = datagen::DomainTag::source;
    else if (field == "target")
      s.domain = datagen::DomainTag::target;
    else
      throw std::invalid_argument("dataset_from_csv: bad domain tag");
    std::getline(ls, field, ',');
    s.is_poison = field == "1";
    max_label = std::max(max_label, s.y);
    d.samples.push_back(s);
  }
  d.num_classes = max_label + 1;
  return d;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace udalab::serialize
