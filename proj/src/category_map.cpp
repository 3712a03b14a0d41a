#include "s2s/category_map.hpp"

#include "s2s/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace s2s {
namespace {

const char* const kLarge[] = {
    "bathtub", "bed",   "box",     "cabinet",      "chair",       "coffee_table", "counter",
    "desk",    "dining_table",     "end_table",    "instrument",  "ledge",        "nightstand",
    "object",  "refrigerator",     "round_table",  "shelf",       "sink",         "sofa",
    "stool",   "table", "toilet",  "tv_stand",     "wardrobe",    "washing_machine",
};

const char* const kSmall[] = {
    "alarm_clock", "bag",          "basket",        "bin",          "book",           "bottle",
    "box",         "bucket",       "cabinet",       "can",          "clothing",       "computer",
    "cooking_machine", "decoration", "earphone",    "electronic_devices", "food",     "instrument",
    "kettle",      "keyboard",     "kitchenware",   "lamp",         "monitor",        "mouse",
    "mouse_pad",   "mug",          "object",        "organizer",    "phone",          "picture",
    "pillow",      "plant",        "remote_control", "shelf",       "sink",           "stool",
    "tissue_paper", "tool",        "towel",         "toy",          "tv",             "washing_machine",
    "washing_stuff",
};

}  // namespace

std::string normalize_category_name(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    const auto u = static_cast<unsigned char>(c);
    if (c == ' ' || c == '-') {
      out.push_back('_');
    } else {
      out.push_back(static_cast<char>(std::tolower(u)));
    }
  }
  const auto first = out.find_first_not_of('_');
  if (first == std::string::npos) return {};
  const auto last = out.find_last_not_of('_');
  return out.substr(first, last - first + 1);
}

CategoryMap CategoryMap::builtin() {
  CategoryMap m;
  for (const char* c : kLarge) m.large_.insert(c);
  for (const char* c : kSmall) m.small_.insert(c);
  for (const auto& c : m.universe()) m.aliases_[c] = c;
  return m;
}

CategoryMap CategoryMap::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kMalformed, std::string("category map: ") + e.what());
  }
  if (!j.is_object() || !j.contains("large") || !j.contains("small"))
    fail(ErrorCode::kMalformed, "category map: expected \"large\" and \"small\" lists");
  CategoryMap m;
  try {
    for (const auto& c : j.at("large")) m.large_.insert(normalize_category_name(c.get<std::string>()));
    for (const auto& c : j.at("small")) m.small_.insert(normalize_category_name(c.get<std::string>()));
    for (const auto& c : m.universe()) m.aliases_[c] = c;
    if (j.contains("aliases")) {
      for (const auto& [raw, merged] : j.at("aliases").items()) {
        const std::string target = normalize_category_name(merged.get<std::string>());
        if (!m.large_.count(target) && !m.small_.count(target))
          fail(ErrorCode::kMalformed, "category map: alias '" + raw + "' targets unknown '" + target + "'");
        m.aliases_[normalize_category_name(raw)] = target;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kMalformed, std::string("category map: ") + e.what());
  }
  if (!m.universe().count(kFallbackCategory))
    fail(ErrorCode::kMalformed, "category map: fallback category 'object' missing");
  return m;
}

CategoryMap CategoryMap::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kMissingFile, "category map not found: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string CategoryMap::to_json() const {
  nlohmann::json j;
  j["v"] = 1;
  j["large"] = large_;
  j["small"] = small_;
  nlohmann::json aliases = nlohmann::json::object();
  for (const auto& [raw, merged] : aliases_) {
    if (raw != merged) aliases[raw] = merged;
  }
  j["aliases"] = aliases;
  return j.dump(2) + "\n";
}

std::string CategoryMap::merge(const std::string& raw) const {
  const auto it = aliases_.find(normalize_category_name(raw));
  return it == aliases_.end() ? std::string(kFallbackCategory) : it->second;
}

std::set<std::string> CategoryMap::universe() const {
  std::set<std::string> all = large_;
  all.insert(small_.begin(), small_.end());
  return all;
}

}  // namespace s2s
