#ifndef PASSDIL_IO_HPP
#define PASSDIL_IO_HPP

#include "passdil/dilation.hpp"
#include "passdil/gaussian.hpp"
#include "passdil/normal_form.hpp"
#include "passdil/symplectic.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <array>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

// Structured-text documents are JSON objects. Matrices are arrays of rows and
// are stored in the ordering named by the document's "ordering" key; in
// memory everything is blocked. Doubles are written in shortest round-trip
// form, so write -> read -> write is byte-identical.

namespace passdil::io {

using Json = nlohmann::json;

inline constexpr const char* kChannelFormat = "passdil/channel";
inline constexpr const char* kDilationFormat = "passdil/dilation";
inline constexpr const char* kNormalFormFormat = "passdil/normal-form";

inline Json matrix_to_json(const RealMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline RealMatrix matrix_from_json(const Json& j, Eigen::Index rows, Eigen::Index cols,
                                   const std::string& what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    throw InvalidInput(what + ": expected " + std::to_string(rows) + " rows");
  RealMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw InvalidInput(what + ": row " + std::to_string(i) + " must have " +
                         std::to_string(cols) + " entries");
    for (Eigen::Index k = 0; k < cols; ++k) {
      const Json& x = row[static_cast<std::size_t>(k)];
      if (!x.is_number()) throw InvalidInput(what + ": non-numeric entry");
      m(i, k) = x.get<double>();
    }
  }
  if (!m.allFinite()) throw InvalidInput(what + ": non-finite entry");
  return m;
}

namespace detail {

inline const Json& field(const Json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key))
    throw InvalidInput(std::string("missing field '") + key + "'");
  return doc.at(key);
}

inline Eigen::Index count_field(const Json& doc, const char* key, Eigen::Index min) {
  const Json& v = field(doc, key);
  if (!v.is_number_integer() || v.get<long long>() < min)
    throw InvalidInput(std::string("field '") + key + "' must be an integer >= " +
                       std::to_string(min));
  return static_cast<Eigen::Index>(v.get<long long>());
}

inline ModeOrdering ordering_field(const Json& doc) {
  if (!doc.contains("ordering")) return ModeOrdering::blocked;
  const Json& v = doc.at("ordering");
  if (!v.is_string()) throw InvalidInput("field 'ordering' must be a string");
  return parse_ordering(v.get<std::string>());
}

inline void check_format(const Json& doc, const char* expected) {
  if (doc.is_object() && doc.contains("format") && doc.at("format") != expected)
    throw InvalidInput(std::string("document format is not ") + expected);
}

inline RealMatrix to_blocked(const RealMatrix& m, ModeOrdering from, std::optional<Split> split = {}) {
  return reorder(m, from, ModeOrdering::blocked, split);
}

inline RealMatrix from_blocked(const RealMatrix& m, ModeOrdering to, std::optional<Split> split = {}) {
  if (m.size() == 0) return m;
  return reorder(m, ModeOrdering::blocked, to, split);
}

}  // namespace detail

inline Json parse_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InvalidInput(std::string("malformed document: ") + e.what());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
  out << text;
}

inline std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

/// Hex SHA-256 of a byte string.
inline std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

struct ChannelFile {
  GaussianChannel channel;  // blocked
  ModeOrdering ordering = ModeOrdering::blocked;
  Json metadata = Json::object();
};

inline ChannelFile channel_from_json(const Json& doc, const Tolerance& tol = {}) {
  detail::check_format(doc, kChannelFormat);
  const Eigen::Index n = detail::count_field(doc, "n", 1);
  ChannelFile f;
  f.ordering = detail::ordering_field(doc);
  const RealMatrix x = matrix_from_json(detail::field(doc, "X"), 2 * n, 2 * n, "X");
  const RealMatrix y = matrix_from_json(detail::field(doc, "Y"), 2 * n, 2 * n, "Y");
  if (max_abs(y - y.transpose()) > tol.bound(std::max(1.0, max_abs(y))))
    throw InvalidInput("Y is not symmetric");
  f.channel = {detail::to_blocked(x, f.ordering), detail::to_blocked(y, f.ordering)};
  if (doc.contains("metadata")) f.metadata = doc.at("metadata");
  return f;
}

inline Json channel_to_json(const GaussianChannel& c, ModeOrdering ordering,
                            const Json& metadata = Json::object()) {
  Json doc;
  doc["format"] = kChannelFormat;
  doc["n"] = c.modes();
  doc["ordering"] = std::string(to_string(ordering));
  doc["X"] = matrix_to_json(detail::from_blocked(c.x, ordering));
  doc["Y"] = matrix_to_json(detail::from_blocked(c.y, ordering));
  if (!metadata.empty()) doc["metadata"] = metadata;
  return doc;
}

inline PassiveDilation dilation_from_json(const Json& doc) {
  detail::check_format(doc, kDilationFormat);
  const Eigen::Index n = detail::count_field(doc, "n", 1);
  const Eigen::Index l = detail::count_field(doc, "l", 0);
  const ModeOrdering ordering = detail::ordering_field(doc);
  const Split split{n, l};
  const RealMatrix s = matrix_from_json(detail::field(doc, "S"), split.dim(), split.dim(), "S");
  const RealMatrix g = matrix_from_json(detail::field(doc, "gamma_E"), 2 * l, 2 * l, "gamma_E");
  return {split, detail::to_blocked(s, ordering, split),
          l > 0 ? detail::to_blocked(g, ordering) : g};
}

inline Json dilation_to_json(const PassiveDilation& d, ModeOrdering ordering) {
  Json doc;
  doc["format"] = kDilationFormat;
  doc["n"] = d.system_modes();
  doc["l"] = d.environment_modes();
  doc["ordering"] = std::string(to_string(ordering));
  doc["S"] = matrix_to_json(detail::from_blocked(d.s, ordering, d.split));
  doc["gamma_E"] = matrix_to_json(detail::from_blocked(d.gamma_e, ordering));
  return doc;
}

inline Json verification_to_json(const DilationVerification& v) {
  return {{"ok", v.ok},
          {"s1_sign", v.s1_sign},
          {"s1_residual", v.s1_residual},
          {"sigma_residual", v.sigma_residual},
          {"sigma_hat_residual", v.sigma_hat_residual},
          {"noise_residual", v.noise_residual},
          {"orthogonality_residual", v.membership.orthogonality_residual},
          {"symplectic_residual", v.membership.symplectic_residual},
          {"environment_min_eigenvalue", v.environment_min_eigenvalue},
          {"action_residual", v.action_residual},
          {"failure", v.failure}};
}

inline Json normal_form_to_json(const NormalForm& nf, ModeOrdering ordering) {
  Json doc;
  doc["format"] = kNormalFormFormat;
  doc["n"] = nf.modes();
  doc["ordering"] = std::string(to_string(ordering));
  doc["G"] = matrix_to_json(detail::from_blocked(nf.g.matrix(), ordering));
  doc["F"] = matrix_to_json(detail::from_blocked(nf.f.matrix(), ordering));
  doc["lambda"] = nf.lambda;
  doc["gamma_E_tilde"] = matrix_to_json(detail::from_blocked(nf.gamma_e, ordering));
  return doc;
}

inline NormalForm normal_form_from_json(const Json& doc, const Tolerance& tol = {}) {
  detail::check_format(doc, kNormalFormFormat);
  const Eigen::Index n = detail::count_field(doc, "n", 1);
  const ModeOrdering ordering = detail::ordering_field(doc);
  const auto read = [&](const char* key) {
    return detail::to_blocked(matrix_from_json(detail::field(doc, key), 2 * n, 2 * n, key), ordering);
  };
  const Json& lam = detail::field(doc, "lambda");
  if (!lam.is_array() || static_cast<Eigen::Index>(lam.size()) != n)
    throw InvalidInput("lambda: expected " + std::to_string(n) + " entries");
  std::vector<double> lambda;
  for (const Json& v : lam) {
    if (!v.is_number()) throw InvalidInput("lambda: non-numeric entry");
    lambda.push_back(v.get<double>());
  }
  return {OrthogonalSymplectic(read("G"), tol), OrthogonalSymplectic(read("F"), tol),
          std::move(lambda), read("gamma_E_tilde")};
}

}  // namespace passdil::io

#endif  // PASSDIL_IO_HPP
