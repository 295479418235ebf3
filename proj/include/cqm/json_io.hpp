// Copyright 2026 The cqm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON encodings shared by the CLI and the tests.
//
//   complex   [re, im]
//   matrix    {"rows": n, "cols": m, "data": [[re, im], ...]}  (row-major)
//   vector    [[re, im], ...]
//   POVM      {"dim", "tol", "outcomes": [{"label", "effect"}]}
//   refined   POVM + "multiplicities" + "vectors": [{"i", "k", "d"}]
//   instrument {"input_dim", "output_dim", "outcomes": [{"label", "kraus"}]}
//
// Doubles are written in shortest round-trip form, so parsing a written file
// reproduces every bit.

#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cqm/entanglement.hpp"
#include "cqm/linalg.hpp"
#include "cqm/measurement.hpp"
#include "cqm/povm.hpp"
#include "cqm/scenarios.hpp"

namespace cqm::io {

using Json = nlohmann::ordered_json;

/// Malformed or schema-violating input.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw FormatError(std::string("missing field '") + key + "'");
  return j.at(key);
}

inline std::size_t size_field(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    throw FormatError(std::string("field '") + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

inline double number(const Json& j) {
  if (!j.is_number()) throw FormatError("expected a number");
  return j.get<double>();
}

}  // namespace detail

inline Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2)
    throw FormatError("complex number must be [re, im]");
  return {detail::number(j[0]), detail::number(j[1])};
}

inline Json to_json(const Matrix& m) {
  Json data = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(to_json(m(r, c)));
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline Matrix matrix_from_json(const Json& j) {
  const auto n_rows = detail::size_field(j, "rows");
  const auto n_cols = detail::size_field(j, "cols");
  const Json& data = detail::field(j, "data");
  if (!data.is_array() || data.size() != n_rows * n_cols)
    throw FormatError("matrix data length differs from rows * cols");
  Matrix m(n_rows, n_cols);
  std::size_t idx = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      m(r, c) = complex_from_json(data[idx++]);
  if (!all_finite(m)) throw FormatError("matrix has non-finite entries");
  return m;
}

inline Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(to_json(v(i)));
  return out;
}

inline Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw FormatError("vector must be an array of [re, im]");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i]);
  return v;
}

inline Json to_json(const Povm& p) {
  Json outcomes = Json::array();
  for (std::size_t i = 0; i < p.size(); ++i)
    outcomes.push_back({{"label", p.labels[i]}, {"effect", to_json(p.effects[i])}});
  return Json{{"dim", p.dim()}, {"tol", p.tol}, {"outcomes", std::move(outcomes)}};
}

inline std::string label_from_json(const Json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number()) return j.dump();
  throw FormatError("label must be a string or a number");
}

inline Povm povm_from_json(const Json& j) {
  const auto dim = detail::size_field(j, "dim");
  const double tol = j.contains("tol") ? detail::number(j.at("tol")) : kDefaultTol;
  const Json& outcomes = detail::field(j, "outcomes");
  if (!outcomes.is_array() || outcomes.empty())
    throw FormatError("'outcomes' must be a non-empty array");
  std::vector<Matrix> effects;
  std::vector<std::string> labels;
  for (const auto& o : outcomes) {
    labels.push_back(label_from_json(detail::field(o, "label")));
    effects.push_back(matrix_from_json(detail::field(o, "effect")));
    if (rows(effects.back()) != dim || cols(effects.back()) != dim)
      throw FormatError("effect shape differs from 'dim'");
  }
  try {
    return make_povm(std::move(effects), std::move(labels), tol);
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

inline Json to_json(const RefinedPovm& r) {
  Json j = to_json(coarse_grain(r));
  j["multiplicities"] = r.multiplicities();
  Json vectors = Json::array();
  for (std::size_t i = 0; i < r.parent_size(); ++i)
    for (std::size_t k = 0; k < r.vectors[i].size(); ++k)
      vectors.push_back({{"i", i}, {"k", k}, {"d", vector_to_json(r.vectors[i][k])}});
  j["vectors"] = std::move(vectors);
  return j;
}

inline RefinedPovm refined_povm_from_json(const Json& j) {
  const Povm parent = povm_from_json(j);
  RefinedPovm r;
  r.dim = parent.dim();
  r.parent_labels = parent.labels;
  r.tol = parent.tol;
  r.vectors.resize(parent.size());
  const Json& vectors = detail::field(j, "vectors");
  if (!vectors.is_array()) throw FormatError("'vectors' must be an array");
  for (const auto& v : vectors) {
    const auto i = detail::size_field(v, "i");
    const auto k = detail::size_field(v, "k");
    if (i >= r.vectors.size() || k != r.vectors[i].size())
      throw FormatError("refined vectors must be listed in (i, k) order");
    Vector d = vector_from_json(detail::field(v, "d"));
    if (static_cast<std::size_t>(d.size()) != r.dim)
      throw FormatError("refined vector length differs from 'dim'");
    r.vectors[i].push_back(std::move(d));
  }
  return r;
}

inline Json to_json(const Instrument& inst, const std::string& name = {}) {
  Json outcomes = Json::array();
  for (const auto& o : inst.outcomes()) {
    Json kraus = Json::array();
    for (const auto& k : o.kraus) kraus.push_back(to_json(k));
    outcomes.push_back({{"label", o.label}, {"kraus", std::move(kraus)}});
  }
  Json j;
  if (!name.empty()) j["name"] = name;
  j["input_dim"] = inst.input_dim();
  j["output_dim"] = inst.output_dim();
  j["tol"] = inst.tol();
  j["outcomes"] = std::move(outcomes);
  return j;
}

inline Instrument instrument_from_json(const Json& j) {
  const auto in = detail::size_field(j, "input_dim");
  const auto out = detail::size_field(j, "output_dim");
  const double tol = j.contains("tol") ? detail::number(j.at("tol")) : kDefaultTol;
  const Json& outcomes = detail::field(j, "outcomes");
  if (!outcomes.is_array()) throw FormatError("'outcomes' must be an array");
  std::vector<InstrumentOutcome> parsed;
  for (const auto& o : outcomes) {
    InstrumentOutcome io{label_from_json(detail::field(o, "label")), {}};
    const Json& kraus = detail::field(o, "kraus");
    if (!kraus.is_array()) throw FormatError("'kraus' must be an array");
    for (const auto& k : kraus) io.kraus.push_back(matrix_from_json(k));
    parsed.push_back(std::move(io));
  }
  try {
    return Instrument(in, out, std::move(parsed), tol);
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

inline Json to_json(const BipartiteState& w) {
  return Json{
      {"dim_left", w.dim_left()},
      {"dim_right", w.dim_right()},
      {"matrix", to_json(w.matrix())}};
}

inline Json to_json(const PovmReport& r) {
  return Json{
      {"passed", r.passed},
      {"normalization_residual", r.normalization_residual},
      {"psd_violations", r.psd_violations},
      {"hermiticity_defects", r.hermiticity_defects}};
}

inline Json to_json(const EbCertificate& c) {
  Json j{
      {"instrument", c.instrument},
      {"trials", c.trials},
      {"env_dim", c.env_dim},
      {"max_negativity", c.max_negativity},
      {"threshold", kNegativityThreshold},
      {"verdict", to_string(c.verdict)},
      {"separability_certified", c.separability_certified},
      {"seed", c.seed}};
  if (c.counterexample) {
    Json ce = to_json(*c.counterexample);
    ce["outcome"] = c.counterexample_outcome;
    j["counterexample"] = std::move(ce);
  } else {
    j["counterexample"] = nullptr;
  }
  return j;
}

inline ZenoMode zeno_mode_from_string(const std::string& s) {
  if (s == "complete") return ZenoMode::complete;
  if (s == "incomplete") return ZenoMode::incomplete;
  throw FormatError("mode must be 'complete' or 'incomplete'");
}

/// Zeno config file. Every field mirrors ZenoConfig; "initial_state" is a
/// matrix (density operator) or a vector (pure state), "target" is
/// {"i", "k"}.
inline Json to_json(const ZenoConfig& c) {
  Json projections = Json::array();
  for (const auto& p : c.hamiltonian.projections()) projections.push_back(to_json(p));
  return Json{
      {"system_dim", c.system_dim},
      {"env_dim", c.env_dim},
      {"hamiltonian",
       {{"eigenvalues", c.hamiltonian.eigenvalues()}, {"projections", std::move(projections)}}},
      {"generator", to_json(c.generator)},
      {"total_time", c.total_time},
      {"steps", c.steps},
      {"mode", to_string(c.mode)},
      {"initial_state", to_json(c.initial_state)},
      {"target", {{"i", c.target_outcome}, {"k", c.target_index}}},
      {"tol", c.tol}};
}

inline ZenoConfig zeno_config_from_json(const Json& j) {
  try {
    const Json& h = detail::field(j, "hamiltonian");
    const Json& values = detail::field(h, "eigenvalues");
    const Json& projs = detail::field(h, "projections");
    if (!values.is_array() || !projs.is_array())
      throw FormatError("hamiltonian eigenvalues/projections must be arrays");
    std::vector<double> eigenvalues;
    for (const auto& v : values) eigenvalues.push_back(detail::number(v));
    std::vector<Matrix> projections;
    for (const auto& p : projs) projections.push_back(matrix_from_json(p));
    const double tol = j.contains("tol") ? detail::number(j.at("tol")) : kDefaultTol;
    SharpObservable hamiltonian(std::move(eigenvalues), std::move(projections), tol);

    const Json& init = detail::field(j, "initial_state");
    Matrix initial = init.is_array() ? projector(vector_from_json(init))
                                     : matrix_from_json(init);
    std::size_t ti = 0, tk = 0;
    if (j.contains("target")) {
      ti = detail::size_field(j.at("target"), "i");
      tk = detail::size_field(j.at("target"), "k");
    }
    return ZenoConfig{
        detail::size_field(j, "system_dim"),
        detail::size_field(j, "env_dim"),
        std::move(hamiltonian),
        matrix_from_json(detail::field(j, "generator")),
        j.contains("total_time") ? detail::number(j.at("total_time")) : 1.0,
        j.contains("steps") ? detail::size_field(j, "steps") : 100,
        j.contains("mode") ? zeno_mode_from_string(j.at("mode").get<std::string>())
                           : ZenoMode::complete,
        std::move(initial),
        ti,
        tk,
        tol};
  } catch (const Json::exception& e) {
    throw FormatError(e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

inline Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw FormatError(e.what());
  }
}

inline Json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

}  // namespace cqm::io
