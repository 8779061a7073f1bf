#include "taskrec/recommender.hpp"

namespace taskrec {

std::vector<std::vector<double>> Recommender::predict_steps(std::span<const CommandId> commands) const {
  std::vector<std::vector<double>> out;
  if (commands.size() < 2) return out;
  out.reserve(commands.size() - 1);
  for (std::size_t t = 0; t + 1 < commands.size(); ++t) out.push_back(predict(commands.first(t + 1)));
  return out;
}

std::vector<std::pair<CommandId, double>> Recommender::recommend(std::span<const CommandId> prefix,
                                                                 std::size_t k) const {
  if (k < 1) throw ValidationError("top_k must be at least 1");
  return top_n(predict(prefix), k);
}

}  // namespace taskrec
