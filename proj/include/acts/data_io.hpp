#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "acts/common.hpp"
#include "acts/network.hpp"

namespace acts {

/// In-memory dataset. Features live in raw [0,1] units; normalization is the
/// model's job.
struct Dataset {
  std::vector<Vec> features;      // n rows of M values
  std::vector<int> labels;        // n, each in [0, K)
  std::vector<std::string> ids;   // n, unique

  std::size_t size() const { return features.size(); }
  std::size_t num_features() const { return features.empty() ? 0 : features.front().size(); }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string feature_header(std::size_t m) {
  std::string h;
  for (std::size_t i = 0; i < m; ++i) h += ",f" + std::to_string(i);
  return h;
}

}  // namespace detail

/// Loads `id,label,f0,...` CSV (the id column is optional; row index is used
/// when absent). Every malformed input maps to a typed error naming the row.
inline Dataset load_dataset(std::istream& in, std::size_t expected_m, std::size_t expected_k) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("dataset: empty file");
  auto header = detail::split_csv_line(line);
  bool has_id = !header.empty() && header[0] == "id";
  std::size_t label_col = has_id ? 1 : 0;
  if (header.size() != label_col + 1 + expected_m || header[label_col] != "label")
    throw ValidationError("dataset: header must be '" + std::string(has_id ? "id," : "") +
                          "label" + detail::feature_header(expected_m) + "', got '" + line + "'");
  for (std::size_t i = 0; i < expected_m; ++i)
    if (header[label_col + 1 + i] != "f" + std::to_string(i))
      throw ValidationError("dataset: header column " + std::to_string(label_col + 1 + i) +
                            " must be f" + std::to_string(i));

  Dataset ds;
  std::set<std::string> seen;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = detail::split_csv_line(line);
    std::string where = "dataset row " + std::to_string(row);
    if (cells.size() != header.size())
      throw ValidationError(where + ": expected " + std::to_string(header.size()) +
                            " columns, got " + std::to_string(cells.size()));
    std::string id = has_id ? cells[0] : std::to_string(row);
    if (!seen.insert(id).second) throw ValidationError(where + ": duplicate id '" + id + "'");
    double label_val = parse_double(cells[label_col], where + " label");
    int label = static_cast<int>(label_val);
    if (label_val != static_cast<double>(label) || label < 0 ||
        static_cast<std::size_t>(label) >= expected_k)
      throw ValidationError(where + ": label " + cells[label_col] + " out of range [0," +
                            std::to_string(expected_k) + ")");
    Vec x(expected_m);
    for (std::size_t i = 0; i < expected_m; ++i) {
      x[i] = parse_double(cells[label_col + 1 + i], where + " f" + std::to_string(i));
      if (!std::isfinite(x[i]))
        throw ValidationError(where + ": non-finite value in f" + std::to_string(i));
    }
    ds.ids.push_back(std::move(id));
    ds.labels.push_back(label);
    ds.features.push_back(std::move(x));
    ++row;
  }
  return ds;
}

inline Dataset load_dataset(const std::string& path, std::size_t expected_m,
                            std::size_t expected_k) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open dataset file: " + path);
  return load_dataset(in, expected_m, expected_k);
}

inline void save_dataset(const Dataset& ds, std::ostream& out) {
  out << "id,label" << detail::feature_header(ds.num_features()) << "\n";
  for (std::size_t r = 0; r < ds.size(); ++r) {
    out << ds.ids[r] << ',' << ds.labels[r];
    for (double v : ds.features[r]) out << ',' << format_double(v);
    out << "\n";
  }
}

inline void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write dataset file: " + path);
  save_dataset(ds, out);
}

inline nlohmann::json network_to_json(const Network& net) {
  nlohmann::json j;
  j["num_inputs"] = net.num_inputs();
  j["num_classes"] = net.num_classes();
  j["score_transform"] = score_transform_name(net.transform());
  j["normalization"] = {{"mean", net.normalization().mean}, {"std", net.normalization().std}};
  j["layers"] = nlohmann::json::array();
  for (const DenseLayer& layer : net.layers()) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < layer.weights.rows; ++r) rows.push_back(layer.weights.row(r));
    j["layers"].push_back({{"weights", std::move(rows)},
                           {"bias", layer.bias},
                           {"activation", activation_name(layer.activation)}});
  }
  return j;
}

inline Network network_from_json(const nlohmann::json& j) {
  auto require = [&](const nlohmann::json& obj, const char* key) -> const nlohmann::json& {
    if (!obj.contains(key)) throw ValidationError(std::string("model: missing key '") + key + "'");
    return obj.at(key);
  };
  try {
    std::size_t m = require(j, "num_inputs").get<std::size_t>();
    std::size_t k = require(j, "num_classes").get<std::size_t>();
    ScoreTransform st = score_transform_from_name(require(j, "score_transform").get<std::string>());
    const nlohmann::json& jn = require(j, "normalization");
    Normalization norm{require(jn, "mean").get<Vec>(), require(jn, "std").get<Vec>()};
    std::vector<DenseLayer> layers;
    for (const nlohmann::json& jl : require(j, "layers")) {
      DenseLayer d;
      const nlohmann::json& rows = require(jl, "weights");
      if (rows.empty()) throw ValidationError("model: layer with empty weights");
      d.weights = Mat(rows.size(), rows.front().get<Vec>().size());
      for (std::size_t r = 0; r < d.weights.rows; ++r) {
        Vec row = rows.at(r).get<Vec>();
        if (row.size() != d.weights.cols)
          throw ValidationError("model: ragged weight matrix in layer " +
                                std::to_string(layers.size()));
        for (std::size_t c = 0; c < row.size(); ++c) d.weights(r, c) = row[c];
      }
      d.bias = require(jl, "bias").get<Vec>();
      d.activation = activation_from_name(require(jl, "activation").get<std::string>());
      layers.push_back(std::move(d));
    }
    Network net(std::move(layers), std::move(norm), st);
    if (net.num_inputs() != m)
      throw ValidationError("model: num_inputs " + std::to_string(m) +
                            " does not match first layer width " +
                            std::to_string(net.num_inputs()));
    if (net.num_classes() != k)
      throw ValidationError("model: num_classes " + std::to_string(k) +
                            " does not match last layer width " +
                            std::to_string(net.num_classes()));
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model: malformed JSON value: ") + e.what());
  }
}

inline Network load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("model: parse error in " + path + ": " + e.what());
  }
  return network_from_json(j);
}

inline void save_model(const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write model file: " + path);
  out << network_to_json(net).dump(2) << "\n";
}

}  // namespace acts
