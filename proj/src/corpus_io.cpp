#include "taskrec/corpus_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace taskrec::corpus {

namespace {

nlohmann::json sequence_json(const CommandSequence& s) {
  return nlohmann::json{{"user", s.user}, {"commands", s.commands}, {"gaps", s.gaps}};
}

CommandSequence parse_sequence(const nlohmann::json& j, std::size_t vocab_size) {
  CommandSequence s;
  s.user = j.at("user").get<std::string>();
  s.commands = j.at("commands").get<std::vector<CommandId>>();
  s.gaps = j.value("gaps", std::vector<double>{});
  if (!s.gaps.empty() && s.gaps.size() != s.commands.size()) {
    throw ValidationError("gaps and commands differ in length");
  }
  for (double g : s.gaps) {
    if (!(g >= 0.0)) throw ValidationError("negative or non-finite gap");
  }
  if (vocab_size > 0) {
    for (CommandId c : s.commands) {
      if (c >= vocab_size) throw ValidationError("command id " + std::to_string(c) + " outside vocabulary");
    }
  }
  return s;
}

template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << contents;
  if (!out) throw IoError("write failed for " + path.string());
}

void write_sequences(const std::filesystem::path& path, const std::vector<CommandSequence>& seqs) {
  std::string buf;
  for (const auto& s : seqs) buf += sequence_json(s).dump() + "\n";
  write_file(path, buf);
}

std::vector<CommandSequence> read_sequences(const std::filesystem::path& path, std::size_t vocab_size) {
  std::vector<CommandSequence> out;
  for_each_line(path, [&](const nlohmann::json& j) { out.push_back(parse_sequence(j, vocab_size)); });
  return out;
}

void write_help_examples(const std::filesystem::path& path, const std::vector<HelpExample>& examples) {
  std::string buf;
  for (const auto& ex : examples) {
    auto j = sequence_json(ex.sequence);
    j["label"] = static_cast<int>(ex.label);
    buf += j.dump() + "\n";
  }
  write_file(path, buf);
}

std::vector<HelpExample> read_help_examples(const std::filesystem::path& path, std::size_t vocab_size) {
  std::vector<HelpExample> out;
  for_each_line(path, [&](const nlohmann::json& j) {
    int label = j.at("label").get<int>();
    if (label != 0 && label != 1) throw ValidationError("label must be 0 or 1");
    out.push_back({parse_sequence(j, vocab_size), static_cast<HelpLabel>(label)});
  });
  return out;
}

void write_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab) {
  write_file(path, vocab.to_json().dump(1) + "\n");
}

Vocabulary read_vocabulary(const std::filesystem::path& path) {
  try {
    return Vocabulary::from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::vector<std::string> read_name_list(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    auto e = line.find_last_not_of(" \t\r");
    out.push_back(line.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace taskrec::corpus
