#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace s2s {

// Binary rows file: "S2SE", uint32 D, uint32 N, then N x D float32, all
// little-endian. A sidecar "<stem>.json" maps rows to ids:
//   {"v": 1, "rows": [{"kind": "point" | "image" | "text", "id": "..."}]}
// Point rows are keyed by asset id, image/text rows by object id.
inline constexpr char kEmbeddingMagic[4] = {'S', '2', 'S', 'E'};

struct EmbeddingRowKey {
  std::string kind;
  std::string id;

  bool operator<(const EmbeddingRowKey& o) const { return kind != o.kind ? kind < o.kind : id < o.id; }
};

struct EmbeddingTable {
  std::uint32_t dim = 0;
  std::vector<Eigen::VectorXd> rows;
  std::vector<EmbeddingRowKey> keys;

  // Throws kNotFound when absent.
  const Eigen::VectorXd& at(const std::string& kind, const std::string& id) const;
  const Eigen::VectorXd* find(const std::string& kind, const std::string& id) const;

  void add(const std::string& kind, const std::string& id, const Eigen::VectorXd& row);
  void rebuild_index();

 private:
  std::map<EmbeddingRowKey, std::size_t> index_;
};

std::filesystem::path sidecar_path(const std::filesystem::path& bin);

// Errors: kMissingFile, kMalformed (bad magic/size/sidecar), kDimensionMismatch.
EmbeddingTable read_embedding_table(const std::filesystem::path& bin);
void write_embedding_table(const std::filesystem::path& bin, const EmbeddingTable& table);

}  // namespace s2s
