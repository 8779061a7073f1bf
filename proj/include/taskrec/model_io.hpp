#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "taskrec/help.hpp"
#include "taskrec/markov.hpp"
#include "taskrec/recommender_net.hpp"
#include "taskrec/topics.hpp"

namespace taskrec::io {

/// Binary parameter files: magic, format version, a JSON header (kind,
/// config, vocabulary hash, tensor shapes) and then the raw little-endian
/// doubles of every tensor in row-major order.
inline constexpr char kParamMagic[4] = {'T', 'R', 'P', 'F'};
inline constexpr std::uint32_t kParamVersion = 1;

void save_net(const std::filesystem::path& path, const neural::RecommenderNet& net);
neural::RecommenderNet load_net(const std::filesystem::path& path);

void save_help_lstm(const std::filesystem::path& path, const help::HelpLstm& model);
help::HelpLstm load_help_lstm(const std::filesystem::path& path);

void save_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json load_json(const std::filesystem::path& path);

topics::BitermModel load_btm(const std::filesystem::path& path);

/// Any recommender file, detected by content. When `vocab_hash` is
/// non-empty the model must have been trained on that vocabulary.
std::unique_ptr<Recommender> load_recommender(const std::filesystem::path& path, const std::string& vocab_hash = "");

/// Either help detector behind one scoring call.
struct HelpModel {
  std::optional<help::HelpForest> forest;
  std::optional<help::HelpLstm> lstm;

  std::string name() const;
  std::string vocab_hash() const;
  bool use_time() const;
  /// Sequence-level P(help).
  double score(const corpus::CommandSequence& seq, std::size_t k) const;
};

HelpModel load_help_model(const std::filesystem::path& path, const std::string& vocab_hash = "");

/// "recommender" or "help", from the file's contents.
std::string detect_kind(const std::filesystem::path& path);

/// Throws ValidationError naming `what` when the hashes differ.
void check_vocab(const std::string& model_hash, const std::string& expected, const std::string& what);

}  // namespace taskrec::io
