#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include <zlib.h>

#include "shape_gate/cluster_index.hpp"

namespace shape_gate {

inline constexpr int kDatabaseVersion = 1;

/// The persisted training result: the index plus the fingerprint of the
/// configuration it was built under.
struct Database {
  GlobalIndex index;
  std::string config_fingerprint;
  friend bool operator==(const Database&, const Database&) = default;
};

namespace detail {

inline nlohmann::json features_json(const FeatureVector& fv) {
  auto arr = nlohmann::json::array();
  for (double v : fv.values()) arr.push_back(v);
  return arr;
}

inline FeatureVector features_from_json(const nlohmann::json& j) {
  std::vector<double> v = j.get<std::vector<double>>();
  if (v.size() != FeatureVector::kBaseDims && v.size() != FeatureVector::kMaxDims)
    throw CorruptionError("db: feature vector of unexpected length");
  return FeatureVector(v);
}

inline nlohmann::json clusters_json(const GlobalIndex& index) {
  auto arr = nlohmann::json::array();
  for (const auto& c : index.clusters()) {
    auto members = nlohmann::json::array();
    for (const auto& m : c.members)
      members.push_back({{"label", m.label}, {"features", features_json(m.features)}, {"source", m.source}});
    arr.push_back({{"id", c.id},
                   {"shape_code", shape_code(c.key.shape)},
                   {"window_index", c.key.window},
                   {"window_side", c.window_side},
                   {"mean", features_json(c.mean)},
                   {"members", std::move(members)}});
  }
  return arr;
}

/// CRC32 of the compact serialization, lowercase hex. Object keys are
/// sorted and floats use shortest round-trip form, so re-serializing a
/// parsed array reproduces the same bytes.
inline std::string clusters_checksum(const nlohmann::json& clusters) {
  const std::string canon = clusters.dump();
  const uLong crc = crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(canon.data()),
                          static_cast<uInt>(canon.size()));
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

}  // namespace detail

inline std::string serialize_database(const Database& db) {
  const auto clusters = detail::clusters_json(db.index);
  nlohmann::json doc = {{"version", kDatabaseVersion},
                        {"checksum", detail::clusters_checksum(clusters)},
                        {"config_fingerprint", db.config_fingerprint},
                        {"clusters", clusters}};
  return doc.dump(1) + "\n";
}

inline Database parse_database(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw CorruptionError(std::string("db: unparsable document: ") + e.what());
  }
  try {
    if (!doc.is_object() || !doc.contains("version") || !doc.contains("clusters") ||
        !doc.contains("checksum"))
      throw CorruptionError("db: missing top-level fields");
    if (!doc["version"].is_number_integer() || doc["version"].get<int>() != kDatabaseVersion)
      throw SchemaVersionError("db: unsupported schema version " + doc["version"].dump());
    const auto& clusters = doc["clusters"];
    if (!clusters.is_array()) throw CorruptionError("db: clusters is not an array");
    if (detail::clusters_checksum(clusters) != doc["checksum"].get<std::string>())
      throw CorruptionError("db: checksum mismatch");

    std::vector<Cluster> restored;
    restored.reserve(clusters.size());
    for (const auto& jc : clusters) {
      Cluster c;
      c.id = jc.at("id").get<int>();
      const auto shape = shape_from_code(jc.at("shape_code").get<int>());
      if (!shape) throw CorruptionError("db: unknown shape code");
      c.key = {*shape, jc.at("window_index").get<int>()};
      c.window_side = jc.at("window_side").get<int>();
      c.mean = detail::features_from_json(jc.at("mean"));
      for (const auto& jm : jc.at("members"))
        c.members.push_back({jm.at("label").get<std::string>(),
                             detail::features_from_json(jm.at("features")),
                             jm.at("source").get<std::string>()});
      restored.push_back(std::move(c));
    }
    Database db;
    db.config_fingerprint = doc.value("config_fingerprint", std::string{});
    try {
      db.index = GlobalIndex::from_clusters(std::move(restored));
    } catch (const Error& e) {
      throw CorruptionError(std::string("db: ") + e.what());
    }
    return db;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError(std::string("db: malformed field: ") + e.what());
  }
}

namespace detail {

inline std::filesystem::path temp_path_for(const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  return tmp;
}

/// First half of an atomic save; the target is untouched until commit.
inline std::filesystem::path write_temp(const Database& db, const std::filesystem::path& path) {
  const auto tmp = temp_path_for(path);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << serialize_database(db);
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  return tmp;
}

inline void commit(const std::filesystem::path& tmp, const std::filesystem::path& path) {
  std::filesystem::rename(tmp, path);
}

}  // namespace detail

/// Writes to a sibling temp file, then renames over `path`.
inline void save_database(const Database& db, const std::filesystem::path& path) {
  detail::commit(detail::write_temp(db, path), path);
}

inline Database load_database(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open database " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_database(buf.str());
}

}  // namespace shape_gate
