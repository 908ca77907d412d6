#pragma once

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "nlspc/config.hpp"
#include "nlspc/mpass.hpp"
#include "nlspc/study.hpp"

namespace nlspc {

using json = nlohmann::json;

inline json to_json(const EnergyReport& r) {
  return {{"mass", r.mass},
          {"kinetic", r.kinetic},
          {"confine", r.confine},
          {"nonlin", r.nonlin},
          {"energy", r.energy},
          {"pohozaev_residual", r.pohozaev_residual},
          {"g_indicator", r.g_indicator},
          {"multiplier", r.multiplier},
          {"tau", r.tau},
          {"degenerate", r.degenerate}};
}

inline json to_json(const GridInfo& g) {
  return {{"nr", g.nr}, {"nz", g.nz}, {"r_max", g.r_max},
          {"z_max", g.z_max}, {"hr", g.hr}, {"hz", g.hz}};
}

inline json to_json(const SolveResult& r) {
  return {{"kind", r.kind == SolveKind::ground ? "ground" : "mountain_pass"},
          {"p", r.params.p},
          {"mu", r.params.mu},
          {"tau", r.params.tau},
          {"grid", to_json(grid_info(*r.field.grid))},
          {"report", to_json(r.report)},
          {"multiplier", r.multiplier},
          {"grad_residual", r.grad_residual},
          {"plugback", r.plugback},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"polished", r.polished},
          {"lambda_domain", r.lambda_domain},
          {"flow_tol", r.flow_tol_used},
          {"newton_tol", r.newton_tol_used},
          {"note", r.note}};
}

inline json to_json(const Constants& c) {
  return {{"p", c.p},
          {"lambda0", c.lambda0},
          {"lambda0_measured", c.lambda0_measured},
          {"gn_constant", c.gn_constant},
          {"mu1", c.mu1},
          {"omega1", c.omega1},
          {"nu_coeff", c.nu_coeff},
          {"nu_exponent", c.nu_exponent},
          {"provenance",
           {{"shoot_tol", c.shoot_tol}, {"q0", c.q0}, {"mass_Q", c.mass_Q}}}};
}

inline json to_json(const SweepRecord& r) {
  return {{"kind", r.kind},
          {"control", r.control},
          {"lambda_domain", r.lambda_domain},
          {"c_level", r.c_level},
          {"m_level", r.m_level},
          {"lambda1", r.lambda1},
          {"lambda2", r.lambda2},
          {"pohozaev1", r.pohozaev1},
          {"pohozaev2", r.pohozaev2},
          {"h_ratio", r.h_ratio},
          {"rescaled_distance", r.rescaled_distance},
          {"plugback1", r.plugback1},
          {"plugback2", r.plugback2},
          {"separated", r.separated},
          {"ground_grid", to_json(r.ground_grid)},
          {"mpass_grid", to_json(r.mpass_grid)}};
}

inline json to_json(const DistinctnessReport& r) {
  return {{"l2_distance", r.l2_distance},
          {"h_distance", r.h_distance},
          {"e1", r.e1},
          {"e2", r.e2},
          {"lambda1", r.lambda1},
          {"lambda2", r.lambda2},
          {"level1", r.level1},
          {"level2", r.level2},
          {"lambda_domain1", r.lambda_domain1},
          {"lambda_domain2", r.lambda_domain2},
          {"ordering_ok", r.ordering_ok},
          {"multipliers_ok", r.multipliers_ok},
          {"distance_ok", r.distance_ok}};
}

inline json to_json(const LiouvilleReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"R", row.R},
                    {"lhs", row.lhs},
                    {"w_term", row.w_term},
                    {"v_term", row.v_term},
                    {"shift_term", row.shift_term},
                    {"residual_generalized", row.residual_generalized},
                    {"residual_pure", row.residual_pure}});
  return {{"rows", rows},
          {"shift_growth_rate", r.shift_growth_rate},
          {"max_residual_generalized", r.max_residual_generalized}};
}

// --------------------------------------------------------------------------
// Output sink: everything is staged in memory and written only after the
// directory exists, so a failed run leaves no partial artifacts.

class OutputSink {
 public:
  OutputSink(std::string dir, const RunConfig& cfg, std::string command)
      : dir_(std::move(dir)), command_(std::move(command)) {
    manifest_["tool"] = "nlspc";
    manifest_["version"] = "0.1.0";
    manifest_["command"] = command_;
    manifest_["config_hash"] = cfg.hash();
    json c = json::object();
    for (const auto& [k, v] : cfg.entries()) c[k] = v;
    manifest_["config"] = c;
    manifest_["failures"] = json::array();
  }

  void add_record(const json& j) { records_.push_back(j); }

  void add_failure(const std::string& msg) {
    manifest_["failures"].push_back(msg);
  }

  void add_manifest(const std::string& key, const json& j) { manifest_[key] = j; }

  /// two-column plot data
  void add_dat(const std::string& name, const std::string& legend,
               std::span<const double> x, std::span<const double> y) {
    std::ostringstream ss;
    ss.precision(17);
    ss << "# " << legend << "\n";
    for (std::size_t i = 0; i < x.size(); ++i) ss << x[i] << " " << y[i] << "\n";
    files_[name] = ss.str();
  }

  void add_text(const std::string& name, std::string content) {
    files_[name] = std::move(content);
  }

  void add_csv(const std::string& name, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ostringstream ss;
    ss.precision(17);
    for (std::size_t i = 0; i < header.size(); ++i)
      ss << header[i] << (i + 1 < header.size() ? "," : "\n");
    for (const auto& row : rows)
      for (std::size_t i = 0; i < row.size(); ++i)
        ss << row[i] << (i + 1 < row.size() ? "," : "\n");
    files_[name] = ss.str();
  }

  void add_field_dump(const std::string& name, const Field& f) {
    const CylGrid& g = *f.grid;
    std::ostringstream ss;
    ss.precision(17);
    ss << "# axisymmetric z-even field, rows are constant r, columns constant z\n";
    ss << "# nr nz r_max z_max\n";
    ss << g.nr << " " << g.nz << " " << g.r_max << " " << g.z_max << "\n";
    for (int i = 0; i < g.nr; ++i) {
      for (int j = 0; j < g.nz; ++j) ss << f.at(i, j) << (j + 1 < g.nz ? " " : "\n");
    }
    files_[name] = ss.str();
  }

  bool failed() const { return !manifest_["failures"].empty(); }

  /// Creates the directory and writes everything; returns false (writing
  /// nothing) when the directory cannot be created.
  bool flush(std::string* error = nullptr) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (!fs::is_directory(dir_)) {
      if (error) *error = "cannot create output directory " + dir_;
      return false;
    }
    {
      std::ofstream out(dir_ + "/records.jsonl");
      for (const auto& r : records_) out << r.dump() << "\n";
    }
    for (const auto& [name, content] : files_) {
      std::ofstream out(dir_ + "/" + name);
      out << content;
    }
    std::ofstream man(dir_ + "/manifest.json");
    man << manifest_.dump(2) << "\n";
    return true;
  }

 private:
  std::string dir_, command_;
  json manifest_;
  std::vector<json> records_;
  std::map<std::string, std::string> files_;
};

}  // namespace nlspc
