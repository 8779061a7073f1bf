#include "taskrec/vocabulary.hpp"

#include <algorithm>

namespace taskrec {

Vocabulary Vocabulary::build(std::vector<std::string> names, const std::vector<std::string>& help_names) {
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  if (std::find(names.begin(), names.end(), kUnknown) != names.end()) {
    throw ValidationError("command name '<unk>' is reserved");
  }
  Vocabulary v;
  v.names_ = std::move(names);
  v.reindex();
  for (const auto& h : help_names) {
    if (auto id = v.find(h)) v.help_ids_.push_back(*id);
  }
  std::sort(v.help_ids_.begin(), v.help_ids_.end());
  v.help_ids_.erase(std::unique(v.help_ids_.begin(), v.help_ids_.end()), v.help_ids_.end());
  v.reindex();
  return v;
}

void Vocabulary::reindex() {
  index_.clear();
  for (CommandId i = 0; i < names_.size(); ++i) index_.emplace(names_[i], i);
  help_mask_.assign(names_.size(), false);
  for (CommandId h : help_ids_) help_mask_.at(h) = true;
}

std::optional<CommandId> Vocabulary::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

CommandId Vocabulary::encode(std::string_view name) const {
  if (auto id = find(name)) return *id;
  if (auto unk = unknown_id()) return *unk;
  throw UnknownCommandError(std::string(name));
}

CommandId Vocabulary::add_unknown() {
  if (auto unk = unknown_id()) return *unk;
  names_.emplace_back(kUnknown);
  reindex();
  return static_cast<CommandId>(names_.size() - 1);
}

std::optional<CommandId> Vocabulary::unknown_id() const {
  if (!names_.empty() && names_.back() == kUnknown) return static_cast<CommandId>(names_.size() - 1);
  return std::nullopt;
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = fnv1a("taskrec-vocab-v1");
  for (const auto& n : names_) {
    h = fnv1a(n, h);
    h = fnv1a(std::string_view("\n", 1), h);
  }
  for (CommandId id : help_ids_) h = fnv1a(std::to_string(id) + ",", h);
  return h;
}

nlohmann::json Vocabulary::to_json() const {
  return nlohmann::json{{"names", names_}, {"help_ids", help_ids_}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  Vocabulary v;
  try {
    v.names_ = j.at("names").get<std::vector<std::string>>();
    v.help_ids_ = j.value("help_ids", std::vector<CommandId>{});
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed vocabulary: ") + e.what());
  }
  for (CommandId h : v.help_ids_) {
    if (h >= v.names_.size()) throw ValidationError("vocabulary help id out of range");
  }
  std::sort(v.help_ids_.begin(), v.help_ids_.end());
  v.reindex();
  if (v.index_.size() != v.names_.size()) throw ValidationError("vocabulary names are not unique");
  return v;
}

}  // namespace taskrec
