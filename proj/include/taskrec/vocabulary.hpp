#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "taskrec/common.hpp"

namespace taskrec {

/// Ordered set of command names. Regular names are sorted lexicographically;
/// the reserved `<unk>` entry, when present, is always the last id.
class Vocabulary {
 public:
  static constexpr std::string_view kUnknown = "<unk>";

  Vocabulary() = default;

  /// Builds a vocabulary from arbitrary (possibly repeated) names. Help names
  /// that do not occur in `names` are ignored.
  static Vocabulary build(std::vector<std::string> names, const std::vector<std::string>& help_names = {});

  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }
  const std::string& name(CommandId id) const { return names_.at(id); }
  const std::vector<std::string>& names() const { return names_; }

  std::optional<CommandId> find(std::string_view name) const;

  /// Maps a name to its id. Unknown names resolve to `<unk>` when the
  /// vocabulary carries one and throw UnknownCommandError otherwise.
  CommandId encode(std::string_view name) const;

  bool is_help(CommandId id) const { return id < help_mask_.size() && help_mask_[id]; }
  const std::vector<CommandId>& help_ids() const { return help_ids_; }

  /// Appends `<unk>` (idempotent) and returns its id.
  CommandId add_unknown();
  std::optional<CommandId> unknown_id() const;

  /// Stable digest of names and help ids; used to pair model files with corpora.
  std::uint64_t hash() const;
  std::string hash_hex() const { return hex64(hash()); }

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

  bool operator==(const Vocabulary& other) const {
    return names_ == other.names_ && help_ids_ == other.help_ids_;
  }

 private:
  void reindex();

  std::vector<std::string> names_;
  std::vector<CommandId> help_ids_;
  std::vector<bool> help_mask_;
  std::unordered_map<std::string, CommandId> index_;
};

}  // namespace taskrec
