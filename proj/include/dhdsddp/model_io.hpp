// Copyright 2026 The dhdsddp Authors
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

// JSON problem files. See docs/problem_format.md for the schema.

#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "dhdsddp/model.hpp"

namespace dhdsddp {

class ProblemFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed JSON text.
class ParseError : public ProblemFormatError {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : ProblemFormatError("parse error at line " + std::to_string(line) + ", column " + std::to_string(column) +
                           ": " + what),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Well-formed JSON that does not describe a valid problem.
class SchemaError : public ProblemFormatError {
 public:
  SchemaError(std::string path, const std::string& what)
      : ProblemFormatError("schema violation at " + path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

namespace io {

using nlohmann::json;

inline const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw SchemaError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path + "." + key, "missing required field");
  return *it;
}

inline std::size_t to_count(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) throw SchemaError(path, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

/// Numbers may be written as JSON numbers or the strings "inf", "-inf";
/// null stands for the infinity given by null_value.
inline double to_number(const json& v, const std::string& path, double null_value = kInf) {
  if (v.is_number()) return v.get<double>();
  if (v.is_null() && std::isinf(null_value)) return null_value;
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "Infinity") return kInf;
    if (s == "-inf" || s == "-Infinity") return -kInf;
  }
  throw SchemaError(path, "expected a number");
}

inline Vector to_vector(const json& v, const std::string& path) {
  if (!v.is_array()) throw SchemaError(path, "expected an array of numbers");
  Vector out;
  out.reserve(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const auto& x = v[k];
    if (!x.is_number()) throw SchemaError(path + "[" + std::to_string(k) + "]", "expected a number");
    out.push_back(x.get<double>());
  }
  return out;
}

/// Accepts nested rows [[...], ...] or a flat row-major array of rows*cols.
inline Matrix to_matrix(const json& v, std::size_t rows, std::size_t cols, const std::string& path) {
  if (!v.is_array()) throw SchemaError(path, "expected a matrix (array)");
  Matrix m(rows, cols);
  const bool nested = !v.empty() && v[0].is_array();
  if (nested || (v.size() == rows && rows > 0 && cols == 0)) {
    if (v.size() != rows) throw SchemaError(path, "expected " + std::to_string(rows) + " rows");
    for (std::size_t r = 0; r < rows; ++r) {
      const std::string rp = path + "[" + std::to_string(r) + "]";
      Vector row = to_vector(v[r], rp);
      if (row.size() != cols) throw SchemaError(rp, "expected " + std::to_string(cols) + " columns");
      for (std::size_t c = 0; c < cols; ++c) m(r, c) = row[c];
    }
    return m;
  }
  Vector flat = to_vector(v, path);
  if (flat.size() != rows * cols)
    throw SchemaError(path, "expected " + std::to_string(rows) + "x" + std::to_string(cols) + " entries");
  m.data = std::move(flat);
  return m;
}

inline Sense to_sense(const json& v, const std::string& path) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "<=" || s == "le" || s == "L") return Sense::LessEqual;
    if (s == "=" || s == "==" || s == "eq" || s == "E") return Sense::Equal;
    if (s == ">=" || s == "ge" || s == "G") return Sense::GreaterEqual;
  }
  throw SchemaError(path, "expected one of \"<=\", \"=\", \">=\"");
}

inline std::vector<Bound> to_bounds(const json* v, std::size_t n, const std::string& path) {
  std::vector<Bound> out(n);
  if (v == nullptr || v->is_null()) return out;
  if (!v->is_array() || v->size() != n)
    throw SchemaError(path, "expected " + std::to_string(n) + " [lower, upper] pairs");
  for (std::size_t k = 0; k < n; ++k) {
    const auto& b = (*v)[k];
    const std::string bp = path + "[" + std::to_string(k) + "]";
    if (!b.is_array() || b.size() != 2) throw SchemaError(bp, "expected [lower, upper]");
    out[k].lower = to_number(b[0], bp + "[0]", -kInf);
    out[k].upper = to_number(b[1], bp + "[1]", kInf);
  }
  return out;
}

inline const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

inline Vector optional_vector(const json& obj, const char* key, std::size_t n, const std::string& path) {
  const json* v = find(obj, key);
  if (v == nullptr || v->is_null()) return Vector(n, 0.0);
  Vector out = to_vector(*v, path + "." + key);
  if (out.size() != n) throw SchemaError(path + "." + key, "expected length " + std::to_string(n));
  return out;
}

inline StateRow to_state_row(const json& v, std::size_t N, const std::string& path) {
  StateRow row;
  row.ax = optional_vector(v, "ax", N, path);
  row.sense = to_sense(require(v, "sense", path), path + ".sense");
  row.rhs = to_number(require(v, "rhs", path), path + ".rhs", 0.0);
  return row;
}

inline std::vector<AffinePiece> to_cut_list(const json& v, std::size_t N, const std::string& path) {
  if (!v.is_array()) throw SchemaError(path, "expected an array of cuts");
  std::vector<AffinePiece> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const std::string cp = path + "[" + std::to_string(k) + "]";
    AffinePiece c;
    c.alpha = to_number(require(v[k], "alpha", cp), cp + ".alpha", 0.0);
    c.beta = to_vector(require(v[k], "beta", cp), cp + ".beta");
    if (c.beta.size() != N) throw SchemaError(cp + ".beta", "expected length " + std::to_string(N));
    out.push_back(std::move(c));
  }
  return out;
}

inline json number_json(double v) {
  if (std::isinf(v)) return nullptr;
  return v;
}

inline const char* sense_json(Sense s) { return to_string(s); }

inline json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols; ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json bounds_json(const std::vector<Bound>& b) {
  json out = json::array();
  for (const auto& x : b) out.push_back(json::array({number_json(x.lower), number_json(x.upper)}));
  return out;
}

inline json state_row_json(const StateRow& r) {
  return json{{"ax", r.ax}, {"sense", sense_json(r.sense)}, {"rhs", r.rhs}};
}

inline json cut_list_json(const std::vector<AffinePiece>& cuts) {
  json out = json::array();
  for (const auto& c : cuts) out.push_back(json{{"alpha", c.alpha}, {"beta", c.beta}});
  return out;
}

}  // namespace io

/// Parses a JSON problem document and validates it. Throws ParseError on bad
/// JSON and SchemaError naming the offending field otherwise.
inline DhdProblem load_problem(std::string_view text) {
  using io::json;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t k = 0; k < upto; ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(line, col, e.what());
  }
  if (!doc.is_object()) throw SchemaError("$", "top level must be an object");

  DhdProblem p;
  const json& dims = io::require(doc, "dims", "");
  p.dims.horizon = io::to_count(io::require(dims, "T", "dims"), "dims.T");
  p.dims.state_dim = io::to_count(io::require(dims, "N", "dims"), "dims.N");
  p.dims.control_b_dim = io::to_count(io::require(dims, "Mb", "dims"), "dims.Mb");
  p.dims.control_a_dim = io::to_count(io::require(dims, "Ma", "dims"), "dims.Ma");
  const std::size_t N = p.dims.state_dim;
  const std::size_t Mb = p.dims.control_b_dim;
  const std::size_t Ma = p.dims.control_a_dim;

  const json& markov = io::require(doc, "markov", "");
  const json& spp = io::require(markov, "states_per_stage", "markov");
  if (!spp.is_array()) throw SchemaError("markov.states_per_stage", "expected an array");
  for (std::size_t k = 0; k < spp.size(); ++k)
    p.markov.states_per_stage.push_back(io::to_count(spp[k], "markov.states_per_stage[" + std::to_string(k) + "]"));
  const json& tr = io::require(markov, "transitions", "markov");
  if (!tr.is_array()) throw SchemaError("markov.transitions", "expected an array of matrices");
  for (std::size_t t = 0; t < tr.size(); ++t) {
    const std::string tp = "markov.transitions[" + std::to_string(t) + "]";
    if (!tr[t].is_array()) throw SchemaError(tp, "expected a matrix");
    std::vector<Vector> m;
    for (std::size_t i = 0; i < tr[t].size(); ++i)
      m.push_back(io::to_vector(tr[t][i], tp + "[" + std::to_string(i) + "]"));
    p.markov.transitions.push_back(std::move(m));
  }

  const json& noise = io::require(doc, "noise", "");
  const json& ss = io::require(noise, "support_sizes", "noise");
  if (!ss.is_array()) throw SchemaError("noise.support_sizes", "expected an array");
  for (std::size_t k = 0; k < ss.size(); ++k)
    p.noise.support_sizes.push_back(io::to_count(ss[k], "noise.support_sizes[" + std::to_string(k) + "]"));
  const json& probs = io::require(noise, "probabilities", "noise");
  if (!probs.is_array()) throw SchemaError("noise.probabilities", "expected an array");
  for (std::size_t k = 0; k < probs.size(); ++k)
    p.noise.probabilities.push_back(io::to_vector(probs[k], "noise.probabilities[" + std::to_string(k) + "]"));

  const json& reals = io::require(doc, "realizations", "");
  if (!reals.is_array()) throw SchemaError("realizations", "expected an array");
  for (std::size_t k = 0; k < reals.size(); ++k) {
    const json& r = reals[k];
    const std::string rp = "realizations[" + std::to_string(k) + "]";
    ScenarioKey key;
    key.t = io::to_count(io::require(r, "t", rp), rp + ".t");
    key.i = io::to_count(io::require(r, "i", rp), rp + ".i");
    key.j = io::to_count(io::require(r, "j", rp), rp + ".j");
    key.e = io::to_count(io::require(r, "e", rp), rp + ".e");
    StageRealization s;
    s.A = io::to_matrix(io::require(r, "A", rp), N, N, rp + ".A");
    const json* bb = io::find(r, "Bb");
    s.Bb = bb ? io::to_matrix(*bb, N, Mb, rp + ".Bb") : Matrix(N, Mb);
    const json* ba = io::find(r, "Ba");
    s.Ba = ba ? io::to_matrix(*ba, N, Ma, rp + ".Ba") : Matrix(N, Ma);
    s.W = io::optional_vector(r, "W", N, rp);
    s.cost_x = io::optional_vector(r, "cost_x", N, rp);
    s.cost_b = io::optional_vector(r, "cost_b", Mb, rp);
    s.cost_a = io::optional_vector(r, "cost_a", Ma, rp);
    if (const json* rows = io::find(r, "rows"); rows && !rows->is_null()) {
      if (!rows->is_array()) throw SchemaError(rp + ".rows", "expected an array");
      for (std::size_t c = 0; c < rows->size(); ++c) {
        const std::string cp = rp + ".rows[" + std::to_string(c) + "]";
        const json& row = (*rows)[c];
        PolyRow pr;
        pr.ax = io::optional_vector(row, "ax", N, cp);
        pr.ab = io::optional_vector(row, "ab", Mb, cp);
        pr.aa = io::optional_vector(row, "aa", Ma, cp);
        pr.sense = io::to_sense(io::require(row, "sense", cp), cp + ".sense");
        pr.rhs = io::to_number(io::require(row, "rhs", cp), cp + ".rhs", 0.0);
        s.rows.push_back(std::move(pr));
      }
    }
    s.bounds_b = io::to_bounds(io::find(r, "bounds_b"), Mb, rp + ".bounds_b");
    s.bounds_a = io::to_bounds(io::find(r, "bounds_a"), Ma, rp + ".bounds_a");
    if (!p.realizations.emplace(key, std::move(s)).second)
      throw SchemaError(rp, "duplicate realization for " + to_string(key));
  }

  const json& term = io::require(doc, "terminal", "");
  if (const json* pm = io::find(term, "per_markov"); pm && !pm->is_null()) {
    if (!pm->is_boolean()) throw SchemaError("terminal.per_markov", "expected a boolean");
    p.terminal.per_markov = pm->get<bool>();
  }
  const json& cuts = io::require(term, "cuts", "terminal");
  if (p.terminal.per_markov) {
    if (!cuts.is_array()) throw SchemaError("terminal.cuts", "expected one cut list per terminal Markov state");
    for (std::size_t k = 0; k < cuts.size(); ++k)
      p.terminal.cuts.push_back(io::to_cut_list(cuts[k], N, "terminal.cuts[" + std::to_string(k) + "]"));
  } else {
    p.terminal.cuts.push_back(io::to_cut_list(cuts, N, "terminal.cuts"));
  }
  if (const json* rows = io::find(term, "rows"); rows && !rows->is_null()) {
    if (!rows->is_array()) throw SchemaError("terminal.rows", "expected an array");
    auto parse_rows = [&](const json& list, const std::string& path) {
      if (!list.is_array()) throw SchemaError(path, "expected an array of rows");
      std::vector<StateRow> out;
      for (std::size_t c = 0; c < list.size(); ++c)
        out.push_back(io::to_state_row(list[c], N, path + "[" + std::to_string(c) + "]"));
      return out;
    };
    if (p.terminal.per_markov) {
      for (std::size_t k = 0; k < rows->size(); ++k)
        p.terminal.rows.push_back(parse_rows((*rows)[k], "terminal.rows[" + std::to_string(k) + "]"));
    } else if (!rows->empty()) {
      p.terminal.rows.push_back(parse_rows(*rows, "terminal.rows"));
    }
  }

  const json& init = io::require(doc, "initial_state", "");
  if (init.is_string()) {
    if (init.get<std::string>() != "free") throw SchemaError("initial_state", "expected an array or \"free\"");
  } else {
    p.initial_state = io::to_vector(init, "initial_state");
  }
  if (const json* sb = io::find(doc, "state_bounds"); sb && !sb->is_null())
    p.state_bounds = io::to_bounds(sb, N, "state_bounds");
  p.stage_lower_bounds = io::to_vector(io::require(doc, "stage_lower_bounds", ""), "stage_lower_bounds");

  const ValidationReport report = validate(p);
  if (!report.ok()) throw SchemaError(report.violations.front().where, report.violations.front().message);
  return p;
}

inline DhdProblem load_problem_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ProblemFormatError("cannot open problem file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_problem(buf.str());
}

inline std::string serialize(const DhdProblem& p, int indent = 2) {
  using io::json;
  json doc;
  doc["dims"] = {{"T", p.dims.horizon}, {"N", p.dims.state_dim}, {"Mb", p.dims.control_b_dim},
                 {"Ma", p.dims.control_a_dim}};
  doc["markov"] = {{"states_per_stage", p.markov.states_per_stage}, {"transitions", p.markov.transitions}};
  doc["noise"] = {{"support_sizes", p.noise.support_sizes}, {"probabilities", p.noise.probabilities}};
  json reals = json::array();
  for (const auto& [key, r] : p.realizations) {
    json rows = json::array();
    for (const auto& row : r.rows)
      rows.push_back(json{{"ax", row.ax}, {"ab", row.ab}, {"aa", row.aa}, {"sense", io::sense_json(row.sense)},
                          {"rhs", row.rhs}});
    reals.push_back(json{{"t", key.t},
                         {"i", key.i},
                         {"j", key.j},
                         {"e", key.e},
                         {"A", io::matrix_json(r.A)},
                         {"Bb", io::matrix_json(r.Bb)},
                         {"Ba", io::matrix_json(r.Ba)},
                         {"W", r.W},
                         {"cost_x", r.cost_x},
                         {"cost_b", r.cost_b},
                         {"cost_a", r.cost_a},
                         {"rows", rows},
                         {"bounds_b", io::bounds_json(r.bounds_b)},
                         {"bounds_a", io::bounds_json(r.bounds_a)}});
  }
  doc["realizations"] = std::move(reals);
  json term;
  term["per_markov"] = p.terminal.per_markov;
  auto rows_json = [](const std::vector<StateRow>& rows) {
    json out = json::array();
    for (const auto& r : rows) out.push_back(io::state_row_json(r));
    return out;
  };
  if (p.terminal.per_markov) {
    json cuts = json::array();
    for (const auto& list : p.terminal.cuts) cuts.push_back(io::cut_list_json(list));
    term["cuts"] = std::move(cuts);
    json rows = json::array();
    for (const auto& list : p.terminal.rows) rows.push_back(rows_json(list));
    term["rows"] = std::move(rows);
  } else {
    term["cuts"] = io::cut_list_json(p.terminal.cuts.at(0));
    term["rows"] = p.terminal.rows.empty() ? json::array() : rows_json(p.terminal.rows[0]);
  }
  doc["terminal"] = std::move(term);
  if (p.initial_state)
    doc["initial_state"] = *p.initial_state;
  else
    doc["initial_state"] = "free";
  if (p.state_bounds) doc["state_bounds"] = io::bounds_json(*p.state_bounds);
  doc["stage_lower_bounds"] = p.stage_lower_bounds;
  return doc.dump(indent);
}

}  // namespace dhdsddp
