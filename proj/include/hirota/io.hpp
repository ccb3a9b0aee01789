#pragma once

// Serialization: spec JSON, field-grid CSV/JSON exports, residual reports,
// scattering sweeps.  All numeric output goes through %.17g so identical
// inputs produce byte-identical files.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hirota/scattering.hpp"
#include "hirota/types.hpp"

namespace hirota {

using json = nlohmann::json;

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline json cplx_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

namespace detail {

inline cplx json_to_cplx(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw SpecError("spec field '" + field + "' must be a [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

inline json spec_to_json(const SolitonSpec& spec) {
  json j;
  j["epsilon"] = spec.params.epsilon;
  j["k1"] = cplx_to_json(spec.params.k1);
  j["A1"] = cplx_to_json(spec.params.A1);
  j["components"] = spec.params.components;
  j["convention"] =
      spec.convention == SignConvention::AsPrinted ? "as-printed" : "regularized";
  j["points"] = json::array();
  for (const auto& p : spec.points) {
    json pt;
    pt["lambda"] = cplx_to_json(p.lambda);
    pt["norm"] = json::array();
    for (const auto& m : p.norm) pt["norm"].push_back(cplx_to_json(m));
    j["points"].push_back(std::move(pt));
  }
  return j;
}

inline SolitonSpec spec_from_json(const json& j) {
  SolitonSpec spec;
  if (!j.is_object()) throw SpecError("spec document must be a JSON object");
  for (const char* field : {"epsilon", "k1", "A1", "components", "convention", "points"})
    if (!j.contains(field))
      throw SpecError(std::string("spec is missing field '") + field + "'");
  if (!j["epsilon"].is_number()) throw SpecError("spec field 'epsilon' must be a number");
  spec.params.epsilon = j["epsilon"].get<double>();
  spec.params.k1 = detail::json_to_cplx(j["k1"], "k1");
  spec.params.A1 = detail::json_to_cplx(j["A1"], "A1");
  if (!j["components"].is_number_integer() || j["components"].get<int>() < 1)
    throw SpecError("spec field 'components' must be an integer >= 1");
  spec.params.components = j["components"].get<int>();
  const std::string conv = j["convention"].is_string() ? j["convention"].get<std::string>() : "";
  if (conv == "as-printed")
    spec.convention = SignConvention::AsPrinted;
  else if (conv == "regularized")
    spec.convention = SignConvention::Regularized;
  else
    throw SpecError("spec field 'convention' must be \"as-printed\" or \"regularized\"");
  if (!j["points"].is_array())
    throw SpecError("spec field 'points' must be an array");
  for (const auto& pt : j["points"]) {
    if (!pt.is_object() || !pt.contains("lambda") || !pt.contains("norm"))
      throw SpecError("spec field 'points' entries need 'lambda' and 'norm'");
    SpectralPoint p;
    p.lambda = detail::json_to_cplx(pt["lambda"], "points.lambda");
    if (!pt["norm"].is_array())
      throw SpecError("spec field 'points.norm' must be an array");
    for (const auto& m : pt["norm"])
      p.norm.push_back(detail::json_to_cplx(m, "points.norm"));
    spec.points.push_back(std::move(p));
  }
  return spec;
}

inline std::string field_grid_header(int components) {
  std::string h = "x,t";
  for (int l = 1; l <= components; ++l)
    h += ",re_q" + std::to_string(l) + ",im_q" + std::to_string(l);
  return h + ",pole";
}

// Rows in t-outer, x-inner order.
inline std::string field_grid_csv(const FieldGrid& f) {
  std::string out = field_grid_header(f.components) + "\n";
  for (int j = 0; j < f.grid.nt; ++j)
    for (int i = 0; i < f.grid.nx; ++i) {
      out += fmt(f.grid.x(i)) + "," + fmt(f.grid.t(j));
      for (int l = 0; l < f.components; ++l) {
        const cplx q = f.at(i, j, l);
        out += "," + fmt(q.real()) + "," + fmt(q.imag());
      }
      out += f.masked(i, j) ? ",1\n" : ",0\n";
    }
  return out;
}

inline json field_grid_json(const FieldGrid& f) {
  json rows = json::array();
  for (int j = 0; j < f.grid.nt; ++j)
    for (int i = 0; i < f.grid.nx; ++i) {
      json row;
      row["x"] = f.grid.x(i);
      row["t"] = f.grid.t(j);
      for (int l = 0; l < f.components; ++l) {
        const cplx q = f.at(i, j, l);
        row["re_q" + std::to_string(l + 1)] = q.real();
        row["im_q" + std::to_string(l + 1)] = q.imag();
      }
      row["pole"] = f.masked(i, j) ? 1 : 0;
      rows.push_back(std::move(row));
    }
  return rows;
}

inline json residual_report_json(const ResidualReport& r) {
  json j;
  j["max"] = r.max_norm;
  j["l2"] = r.l2_norm;
  j["hx"] = r.hx;
  j["ht"] = r.ht;
  j["order"] = r.convergence_order ? json(*r.convergence_order) : json(nullptr);
  j["lambda"] = r.lambda ? cplx_to_json(*r.lambda) : json(nullptr);
  return j;
}

inline std::string sweep_header(int dim) {
  std::string h = "lambda";
  for (int r = 1; r <= dim; ++r)
    for (int c = 1; c <= dim; ++c) {
      const std::string idx = std::to_string(r) + std::to_string(c);
      h += ",re_s" + idx + ",im_s" + idx;
    }
  return h + ",det_err";
}

inline std::string sweep_csv(const std::vector<ScatteringRecord>& records) {
  if (records.empty()) return "lambda,det_err\n";
  const int dim = static_cast<int>(records.front().S.rows());
  std::string out = sweep_header(dim) + "\n";
  for (const auto& rec : records) {
    out += fmt(rec.lambda);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c)
        out += "," + fmt(rec.S(r, c).real()) + "," + fmt(rec.S(r, c).imag());
    out += "," + fmt(rec.det_err) + "\n";
  }
  return out;
}

inline json zeros_json(const ZeroSearchResult& z) {
  json j;
  j["zeros"] = json::array();
  for (const auto& zero : z.zeros) j["zeros"].push_back(cplx_to_json(zero));
  j["winding"] = z.winding;
  return j;
}

inline void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::ios_base::failure("write failed: " + path);
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace hirota
