// Copyright (c) 2026 the ddsyn authors
// SPDX-License-Identifier: Apache-2.0

#include "ddsyn/io.hpp"

#include <ctime>
#include <fstream>
#include <sstream>

namespace ddsyn::io {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const std::string& name) {
  if (!j.is_array()) throw Error(Error::Code::Io, name + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Matrix(0, 0);
  if (!j[0].is_array()) throw Error(Error::Code::Io, name + ": rows must be arrays");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(Error::Code::Io, name + ": ragged row lengths");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& v = row[static_cast<size_t>(c)];
      if (!v.is_number()) throw Error(Error::Code::Io, name + ": entries must be numbers");
      m(i, c) = v.get<double>();
    }
  }
  linalg::require_finite(m, name.c_str());
  return m;
}

json system_to_json(const LtiSystem& sys) {
  json j;
  j["n"] = sys.n();
  j["m"] = sys.m();
  j["p"] = sys.p();
  j["l"] = sys.l();
  j["A"] = matrix_to_json(sys.A);
  j["B"] = matrix_to_json(sys.B);
  j["E"] = matrix_to_json(sys.E);
  j["H"] = matrix_to_json(sys.H);
  return j;
}

LtiSystem system_from_json(const json& j) {
  for (const char* key : {"n", "m", "p", "l", "A", "B", "E", "H"}) {
    if (!j.contains(key)) throw Error(Error::Code::Io, std::string("system file: missing field ") + key);
  }
  Matrix a = matrix_from_json(j["A"], "A");
  Matrix b = matrix_from_json(j["B"], "B");
  Matrix e = matrix_from_json(j["E"], "E");
  Matrix h = matrix_from_json(j["H"], "H");
  LtiSystem sys(std::move(a), std::move(b), std::move(e), std::move(h));
  if (j["n"].get<Eigen::Index>() != sys.n() || j["m"].get<Eigen::Index>() != sys.m() ||
      j["p"].get<Eigen::Index>() != sys.p() || j["l"].get<Eigen::Index>() != sys.l()) {
    throw Error(Error::Code::Io, "system file: declared dimensions disagree with matrix shapes");
  }
  return sys;
}

json controller_to_json(const Controller& ctrl, Eigen::Index n_expected) {
  if (ctrl.F.cols() != n_expected) {
    throw Error(Error::Code::DimensionMismatch, "controller_to_json: F has wrong column count");
  }
  json j;
  j["m"] = ctrl.F.rows();
  j["n"] = ctrl.F.cols();
  j["F"] = matrix_to_json(ctrl.F);
  if (ctrl.X) j["X"] = matrix_to_json(*ctrl.X);
  if (ctrl.P) j["P"] = matrix_to_json(*ctrl.P);
  if (ctrl.alpha) j["alpha"] = *ctrl.alpha;
  return j;
}

Controller controller_from_json(const json& j) {
  for (const char* key : {"m", "n", "F"}) {
    if (!j.contains(key)) throw Error(Error::Code::Io, std::string("controller file: missing field ") + key);
  }
  Controller ctrl(matrix_from_json(j["F"], "F"));
  if (j["m"].get<Eigen::Index>() != ctrl.F.rows() || j["n"].get<Eigen::Index>() != ctrl.F.cols()) {
    throw Error(Error::Code::Io, "controller file: declared dimensions disagree with F");
  }
  if (j.contains("X")) ctrl.X = matrix_from_json(j["X"], "X");
  if (j.contains("P")) ctrl.P = matrix_from_json(j["P"], "P");
  if (j.contains("alpha")) {
    if (!j["alpha"].is_number()) throw Error(Error::Code::Io, "controller file: alpha must be a number");
    ctrl.alpha = j["alpha"].get<double>();
  }
  return ctrl;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Error::Code::Io, "cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(Error::Code::Io, "read failed: " + path);
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Error::Code::Io, "cannot open for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw Error(Error::Code::Io, "write failed: " + path);
}

void save_system(const std::string& path, const LtiSystem& sys) {
  write_text_file(path, system_to_json(sys).dump(2) + "\n");
}

LtiSystem load_system(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw Error(Error::Code::Io, "system file " + path + ": " + e.what());
  }
  return system_from_json(j);
}

void save_controller(const std::string& path, const Controller& ctrl, Eigen::Index n_expected) {
  write_text_file(path, controller_to_json(ctrl, n_expected).dump(2) + "\n");
}

Controller load_controller(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw Error(Error::Code::Io, "controller file " + path + ": " + e.what());
  }
  return controller_from_json(j);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string digest_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return std::string("fnv1a64:") + buf;
}

std::string file_digest(const std::string& path) { return digest_hex(read_text_file(path)); }

json RunManifest::to_json() const {
  json j;
  j["command"] = command;
  j["parameters"] = parameters;
  j["seed"] = seed;
  j["tool_version"] = tool_version;
  j["created_at"] = created_at;
  j["inputs"] = json::object();
  for (const auto& [path, digest] : inputs) j["inputs"][path] = digest;
  j["outputs"] = json::object();
  for (const auto& [path, digest] : outputs) j["outputs"][path] = digest;
  return j;
}

std::string manifest_path_for(const std::string& out_path) { return out_path + ".manifest.json"; }

std::string utc_timestamp_now() {
  std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

void write_manifest(const RunManifest& manifest, const std::string& out_path) {
  write_text_file(manifest_path_for(out_path), manifest.to_json().dump(2) + "\n");
}

}  // namespace ddsyn::io
