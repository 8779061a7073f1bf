#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "taskrec/model_io.hpp"
#include "taskrec/vocabulary.hpp"

namespace taskrec::cli {

struct DemoOptions {
  std::size_t top_k = 5;
  double threshold = 0.5;
  std::size_t context = 8;  // steps before the first help probability
  bool jsonl = false;       // one JSON object per step instead of text
};

struct DemoModels {
  Vocabulary vocab;
  std::unique_ptr<Recommender> recommender;
  std::optional<io::HelpModel> help;
  std::shared_ptr<const topics::BitermModel> btm;
};

/// Names in `vocab` closest to `name` by edit distance.
std::vector<std::string> suggest(const Vocabulary& vocab, const std::string& name, std::size_t n = 3);

std::size_t edit_distance(const std::string& a, const std::string& b);

/// Reads "command [gap]" lines until `quit` or end of input. Returns the
/// step index of the first alarm, if one fired.
std::optional<std::size_t> run_demo(const DemoModels& models, const DemoOptions& opts, std::istream& in,
                                    std::ostream& out);

}  // namespace taskrec::cli
