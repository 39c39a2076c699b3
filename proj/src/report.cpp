#include "frk/report.hpp"

#include <sstream>

#include "frk/numutil.hpp"

namespace frk {

using nlohmann::json;

json rational_json(const mpq_class& q) {
  return json{{"numerator", q.get_num().get_str()},
              {"denominator", q.get_den().get_str()},
              {"decimal", decimal_string(q)}};
}

json stage_json(const ReportStage& stage) {
  json j{{"method", to_string(stage.estimate.method)},
         {"stage", stage.estimate.parameter},
         {"window", stage.estimate.window},
         {"numerator", std::to_string(stage.estimate.cert_num)},
         {"denominator", std::to_string(stage.estimate.cert_den)},
         {"value", rational_json(stage.estimate.value)},
         {"value_decimal", decimal_string(stage.estimate.value)},
         {"bound", rational_json(stage.bound)},
         {"bound_heuristic", stage.bound_heuristic}};
  if (!stage.slack_terms.empty()) {
    json slack = json::object();
    for (const auto& [name, value] : stage.slack_terms) slack[name] = rational_json(value);
    j["slack_terms"] = slack;
  }
  return j;
}

json report_json(const ConvergenceReport& report) {
  json stages = json::array();
  for (const auto& s : report.stages) stages.push_back(stage_json(s));
  json gaps = json::array();
  for (const auto& g : report.gaps) gaps.push_back(rational_json(g));
  json j{{"label", report.label}, {"stages", stages}, {"gaps", gaps}};
  if (!report.verdict.empty()) {
    j["verdict"] = report.verdict;
    j["final_gap"] = rational_json(report.final_gap);
  }
  return j;
}

json defect_json(const std::string& kind, int level, const DefectReport& defect) {
  return json{{"kind", kind},
              {"level", level},
              {"defect", rational_json(defect.defect)},
              {"bound", rational_json(defect.bound)},
              {"sharp_bound", rational_json(defect.sharp_bound)}};
}

json tiling_json(const Tiling& tiling, const mpq_class& eps) {
  json placements = json::array();
  for (const auto& p : tiling.placements)
    placements.push_back(json{{"shape_id", p.shape_id}, {"anchor", p.anchor}, {"covered", p.covered}});
  auto cover = check_epsilon_cover(tiling, eps);
  auto disjoint = check_epsilon_disjoint(tiling.placements, eps);
  json shapes = json::array();
  for (const auto& s : tiling.shapes) shapes.push_back(json{{"id", s.id}, {"size", s.size()}});
  return json{{"host_size", tiling.host->size()},
              {"shapes", shapes},
              {"placements", placements},
              {"uncovered", tiling.uncovered},
              {"epsilon", rational_json(eps)},
              {"cover", json{{"holds", cover.holds}, {"ratio", rational_json(cover.ratio)}}},
              {"disjoint", json{{"verified", disjoint.verified},
                                {"min_ratio", rational_json(disjoint.min_ratio)}}}};
}

json bratteli_json(const BratteliTilingSystem& system, const SystemValidation& validation) {
  json levels = json::array();
  for (std::size_t l = 0; l < system.diagram.levels.size(); ++l) {
    json verts = json::array();
    for (std::size_t v = 0; v < system.diagram.levels[l].size(); ++v) {
      const auto& vert = system.diagram.levels[l][v];
      json jv{{"name", vert.name}, {"size", vert.size}, {"singleton", vert.singleton}};
      if (!system.weights.empty()) jv["weight"] = rational_json(system.weights[l][v]);
      verts.push_back(jv);
    }
    levels.push_back(verts);
  }
  json mult = json::array();
  for (const auto& level : system.diagram.mult) mult.push_back(level);
  json isoperimetry = json::array();
  for (int l = 0; l < system.depth(); ++l)
    isoperimetry.push_back(rational_json(isoperimetric(system.shape(l, 0).shape)));
  return json{{"levels", levels},
              {"multiplicities", mult},
              {"isoperimetric", isoperimetry},
              {"validation",
               json{{"iso_bounds_ok", validation.iso_bounds_ok},
                    {"singleton_bounds_ok", validation.singleton_bounds_ok},
                    {"size_consistent", validation.size_consistent},
                    {"weights_sum_ok", validation.weights_sum_ok},
                    {"harmonic_residual", rational_json(validation.harmonic_residual)},
                    {"singleton_weights_monotone", validation.singleton_weights_monotone}}}};
}

json first_identity_json(const FirstIdentityReport& report) {
  return json{{"agree_fraction", rational_json(report.agree_fraction)},
              {"rank_defect", rational_json(report.rank_defect)}};
}

std::string report_csv(const ConvergenceReport& report) {
  std::ostringstream os;
  os << "method,stage,numerator,denominator,bound,value_decimal\n";
  for (const auto& s : report.stages) {
    os << to_string(s.estimate.method) << "," << s.estimate.parameter << "," << s.estimate.cert_num
       << "," << s.estimate.cert_den << "," << s.bound.get_str() << ","
       << decimal_string(s.estimate.value) << "\n";
  }
  return os.str();
}

json make_document(const std::string& command, const std::map<std::string, std::string>& params) {
  json j{{"schema", kSchemaName}, {"command", command}};
  for (const auto& [k, v] : params) j[k] = v;
  return j;
}

}  // namespace frk
