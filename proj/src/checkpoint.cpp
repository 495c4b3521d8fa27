#include "qtrbm/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qtrbm/errors.hpp"

namespace qtrbm {

using nlohmann::json;

namespace {

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

double as_number(const json& j, const char* what) {
  if (!j.is_number()) throw DataError(std::string("checkpoint: '") + what + "' is not a number");
  return j.get<double>();
}

Mat matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw DataError("checkpoint: 'w' must have " + std::to_string(rows) + " rows");
  }
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw DataError("checkpoint: row " + std::to_string(i) + " of 'w' must have " + std::to_string(cols) +
                      " entries");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = as_number(row[static_cast<std::size_t>(c)], "w");
  }
  return m;
}

Vec vector_from_json(const json& j, Eigen::Index n, const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n) {
    throw DataError(std::string("checkpoint: '") + what + "' must have " + std::to_string(n) + " entries");
  }
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = as_number(j[static_cast<std::size_t>(i)], what);
  return v;
}

const json& field(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) throw DataError(std::string("checkpoint: missing field '") + key + "'");
  return *it;
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& checkpoint) {
  json doc;
  doc["version"] = kCheckpointVersion;
  std::visit(
      [&doc](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        p.validate();
        doc["v"] = p.visible();
        doc["h"] = p.hidden();
        doc["w"] = matrix_to_json(p.w);
        if constexpr (std::is_same_v<T, RbmParamsQT>) {
          doc["c_v"] = vector_to_json(p.c_v);
          doc["c_h"] = vector_to_json(p.c_h);
          doc["log_t"] = p.log_t;
          doc["parameterization"] = "qt";
        } else {
          doc["c_v"] = vector_to_json(p.b_v);
          doc["c_h"] = vector_to_json(p.b_h);
          doc["log_t"] = 0.0;
          doc["parameterization"] = "std";
        }
      },
      checkpoint);
  return doc.dump(2) + "\n";
}

Checkpoint checkpoint_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("checkpoint: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw DataError("checkpoint: top level must be an object");
  const json& version = field(doc, "version");
  if (!version.is_number_integer() || version.get<int>() != kCheckpointVersion) {
    throw DataError("checkpoint: unsupported version " + version.dump());
  }
  const json& v_dim = field(doc, "v");
  const json& h_dim = field(doc, "h");
  if (!v_dim.is_number_integer() || !h_dim.is_number_integer() || v_dim.get<long>() < 1 || h_dim.get<long>() < 0) {
    throw DataError("checkpoint: 'v' and 'h' must be non-negative integers");
  }
  const Eigen::Index visible = v_dim.get<long>();
  const Eigen::Index hidden = h_dim.get<long>();
  const Mat w = matrix_from_json(field(doc, "w"), hidden, visible);
  const Vec c_v = vector_from_json(field(doc, "c_v"), visible, "c_v");
  const Vec c_h = vector_from_json(field(doc, "c_h"), hidden, "c_h");
  const json& kind = field(doc, "parameterization");
  if (!kind.is_string()) throw DataError("checkpoint: 'parameterization' must be a string");

  if (kind == "qt") {
    RbmParamsQT p{w, c_v, c_h, as_number(field(doc, "log_t"), "log_t")};
    if (!p.all_finite()) throw DataError("checkpoint: non-finite parameter");
    return p;
  }
  if (kind == "std") {
    RbmParamsStd p{w, c_v, c_h};
    if (!p.all_finite()) throw DataError("checkpoint: non-finite parameter");
    return p;
  }
  throw DataError("checkpoint: unknown parameterization " + kind.dump());
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint '" + path.string() + "'");
  out << checkpoint_to_json(checkpoint);
  if (!out) throw DataError("failed writing checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return checkpoint_from_json(buffer.str());
}

RbmParamsQT as_qt(const Checkpoint& checkpoint) {
  if (const auto* qt = std::get_if<RbmParamsQT>(&checkpoint)) return *qt;
  return from_standard(std::get<RbmParamsStd>(checkpoint));
}

RbmParamsStd as_std(const Checkpoint& checkpoint) {
  if (const auto* s = std::get_if<RbmParamsStd>(&checkpoint)) return *s;
  return to_standard(std::get<RbmParamsQT>(checkpoint));
}

}  // namespace qtrbm
