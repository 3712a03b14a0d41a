#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace s2s {

inline constexpr const char* kFallbackCategory = "object";

// Raw open-vocabulary names -> merged categories. The merged universe has 60
// names: 25 usable as large furniture, 43 as small objects, 8 in both lists.
class CategoryMap {
 public:
  // The default 60-category universe with identity aliases.
  static CategoryMap builtin();

  // {"v": 1, "large": [..], "small": [..], "aliases": {"raw": "merged"}}.
  // Throws kMalformed for an alias onto an unknown category.
  static CategoryMap from_json(const std::string& text);
  static CategoryMap load(const std::filesystem::path& path);
  std::string to_json() const;

  // Lowercased, spaces and dashes folded to '_'; unmapped names give "object".
  std::string merge(const std::string& raw) const;

  bool is_large(const std::string& merged) const { return large_.count(merged) > 0; }
  bool is_small(const std::string& merged) const { return small_.count(merged) > 0; }

  std::set<std::string> universe() const;
  const std::set<std::string>& large() const { return large_; }
  const std::set<std::string>& small() const { return small_; }
  const std::map<std::string, std::string>& aliases() const { return aliases_; }

 private:
  std::set<std::string> large_;
  std::set<std::string> small_;
  std::map<std::string, std::string> aliases_;
};

std::string normalize_category_name(const std::string& raw);

}  // namespace s2s
