#include "s2s/embedding_io.hpp"

#include "s2s/error.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace s2s {

static_assert(std::endian::native == std::endian::little, "embedding codec assumes a little-endian host");

const Eigen::VectorXd* EmbeddingTable::find(const std::string& kind, const std::string& id) const {
  const auto it = index_.find({kind, id});
  return it == index_.end() ? nullptr : &rows[it->second];
}

const Eigen::VectorXd& EmbeddingTable::at(const std::string& kind, const std::string& id) const {
  const auto* row = find(kind, id);
  if (!row) fail(ErrorCode::kNotFound, "no " + kind + " embedding for '" + id + "'");
  return *row;
}

void EmbeddingTable::add(const std::string& kind, const std::string& id, const Eigen::VectorXd& row) {
  if (dim == 0) dim = static_cast<std::uint32_t>(row.size());
  if (static_cast<std::uint32_t>(row.size()) != dim) {
    fail(ErrorCode::kDimensionMismatch, "embedding row dimension differs from table");
  }
  if (index_.count({kind, id})) fail(ErrorCode::kDuplicateId, "duplicate embedding row " + kind + ":" + id);
  index_[{kind, id}] = rows.size();
  rows.push_back(row);
  keys.push_back({kind, id});
}

void EmbeddingTable::rebuild_index() {
  index_.clear();
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (!index_.emplace(keys[i], i).second) {
      fail(ErrorCode::kDuplicateId, "duplicate embedding row " + keys[i].kind + ":" + keys[i].id);
    }
  }
}

std::filesystem::path sidecar_path(const std::filesystem::path& bin) {
  auto p = bin;
  p.replace_extension(".json");
  return p;
}

EmbeddingTable read_embedding_table(const std::filesystem::path& bin) {
  std::ifstream in(bin, std::ios::binary);
  if (!in) fail(ErrorCode::kMissingFile, "cannot open " + bin.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();
  if (data.size() < 12 || std::memcmp(data.data(), kEmbeddingMagic, 4) != 0) {
    fail(ErrorCode::kMalformed, bin.string() + ": bad embedding magic");
  }
  std::uint32_t d = 0, n = 0;
  std::memcpy(&d, data.data() + 4, 4);
  std::memcpy(&n, data.data() + 8, 4);
  if (d == 0) fail(ErrorCode::kMalformed, bin.string() + ": zero embedding dimension");
  if (data.size() != 12 + static_cast<std::size_t>(d) * n * 4) {
    fail(ErrorCode::kMalformed, bin.string() + ": size does not match header");
  }

  const auto side = sidecar_path(bin);
  std::ifstream sin(side);
  if (!sin) fail(ErrorCode::kMissingFile, "cannot open sidecar " + side.string());
  nlohmann::json j;
  try {
    sin >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kMalformed, side.string() + ": " + e.what());
  }
  if (!j.contains("rows") || !j["rows"].is_array() || j["rows"].size() != n) {
    fail(ErrorCode::kMalformed, side.string() + ": row map length differs from N");
  }

  EmbeddingTable table;
  table.dim = d;
  const char* body = data.data() + 12;
  for (std::uint32_t r = 0; r < n; ++r) {
    Eigen::VectorXd row(d);
    for (std::uint32_t c = 0; c < d; ++c) {
      float f;
      std::memcpy(&f, body + (static_cast<std::size_t>(r) * d + c) * 4, 4);
      row[c] = f;
    }
    if (!row.allFinite()) fail(ErrorCode::kMalformed, bin.string() + ": non-finite embedding entry");
    const auto& key = j["rows"][r];
    if (!key.contains("kind") || !key.contains("id")) {
      fail(ErrorCode::kMalformed, side.string() + ": row entry needs kind and id");
    }
    table.rows.push_back(std::move(row));
    table.keys.push_back({key["kind"].get<std::string>(), key["id"].get<std::string>()});
  }
  table.rebuild_index();
  return table;
}

void write_embedding_table(const std::filesystem::path& bin, const EmbeddingTable& table) {
  std::string data(kEmbeddingMagic, 4);
  const auto n = static_cast<std::uint32_t>(table.rows.size());
  char buf[4];
  std::memcpy(buf, &table.dim, 4);
  data.append(buf, 4);
  std::memcpy(buf, &n, 4);
  data.append(buf, 4);
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (static_cast<std::uint32_t>(table.rows[r].size()) != table.dim) {
      fail(ErrorCode::kDimensionMismatch, "embedding row dimension differs from table");
    }
    for (Eigen::Index c = 0; c < table.rows[r].size(); ++c) {
      const float f = static_cast<float>(table.rows[r][c]);
      std::memcpy(buf, &f, 4);
      data.append(buf, 4);
    }
    rows.push_back({{"kind", table.keys[r].kind}, {"id", table.keys[r].id}});
  }
  std::ofstream out(bin, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + bin.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  std::ofstream side(sidecar_path(bin), std::ios::trunc);
  if (!side) fail(ErrorCode::kIo, "cannot write sidecar for " + bin.string());
  side << nlohmann::json{{"v", 1}, {"rows", rows}}.dump(2) << "\n";
}

}  // namespace s2s
