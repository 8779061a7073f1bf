#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "taskrec/corpus.hpp"
#include "taskrec/vocabulary.hpp"

namespace taskrec::corpus {

/// One {"user","commands","gaps"} object per line.
void write_sequences(const std::filesystem::path& path, const std::vector<CommandSequence>& seqs);
std::vector<CommandSequence> read_sequences(const std::filesystem::path& path, std::size_t vocab_size = 0);

/// Same layout as sequences plus "label": 0 (no_help) or 1 (help).
void write_help_examples(const std::filesystem::path& path, const std::vector<HelpExample>& examples);
std::vector<HelpExample> read_help_examples(const std::filesystem::path& path, std::size_t vocab_size = 0);

void write_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab);
Vocabulary read_vocabulary(const std::filesystem::path& path);

/// Plain text list, one entry per line; blank lines and '#' comments skipped.
std::vector<std::string> read_name_list(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace taskrec::corpus
