#include "taskrec/model_io.hpp"

#include <cstring>
#include <fstream>

#include "taskrec/corpus_io.hpp"

namespace taskrec::io {

namespace {

void write_params(const std::filesystem::path& path, const nlohmann::json& header, const std::vector<double>& values) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  const std::string h = header.dump();
  const std::uint64_t hlen = h.size();
  const std::uint64_t n = values.size();
  out.write(kParamMagic, sizeof kParamMagic);
  out.write(reinterpret_cast<const char*>(&kParamVersion), sizeof kParamVersion);
  out.write(reinterpret_cast<const char*>(&hlen), sizeof hlen);
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!out) throw IoError("failed writing " + path.string());
}

bool has_param_magic(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  char magic[4] = {};
  in.read(magic, sizeof magic);
  return in && std::memcmp(magic, kParamMagic, sizeof magic) == 0;
}

std::pair<nlohmann::json, std::vector<double>> read_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  char magic[4] = {};
  std::uint32_t version = 0;
  std::uint64_t hlen = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&hlen), sizeof hlen);
  if (!in || std::memcmp(magic, kParamMagic, sizeof magic) != 0) {
    throw ValidationError(path.string() + ": not a parameter file");
  }
  if (version != kParamVersion) {
    throw ValidationError(path.string() + ": unsupported parameter file version " + std::to_string(version));
  }
  if (hlen > (1u << 26)) throw ValidationError(path.string() + ": header is implausibly large");
  std::string h(hlen, '\0');
  in.read(h.data(), static_cast<std::streamsize>(hlen));
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  if (!in) throw ValidationError(path.string() + ": truncated header");
  if (n > (1ull << 32)) throw ValidationError(path.string() + ": implausible parameter count");
  std::vector<double> values(n);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw ValidationError(path.string() + ": truncated parameters");
  in.peek();
  if (!in.eof()) throw ValidationError(path.string() + ": trailing bytes after parameters");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(h);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": bad header: " + e.what());
  }
  return {std::move(header), std::move(values)};
}

void check_shapes(const nlohmann::json& expected, const nlohmann::json& found, const std::filesystem::path& path) {
  if (expected != found) throw ValidationError(path.string() + ": tensor shapes do not match the configuration");
}

}  // namespace

void check_vocab(const std::string& model_hash, const std::string& expected, const std::string& what) {
  if (expected.empty()) return;
  if (model_hash != expected) {
    throw ValidationError(what + " was trained on vocabulary " + (model_hash.empty() ? "<unknown>" : model_hash) +
                          " but the corpus uses " + expected);
  }
}

void save_net(const std::filesystem::path& path, const neural::RecommenderNet& net) {
  auto& mut = const_cast<neural::RecommenderNet&>(net);
  const auto tensors = mut.tensors();
  nlohmann::json header{{"kind", "recommender-net"},
                        {"config", net.config().to_json()},
                        {"vocab_hash", net.vocab_hash},
                        {"tensors", neural::tensor_shapes(tensors)}};
  if (net.btm()) header["btm"] = net.btm()->to_json();
  write_params(path, header, neural::flatten_values(tensors));
}

neural::RecommenderNet load_net(const std::filesystem::path& path) {
  auto [header, values] = read_params(path);
  if (header.value("kind", "") != "recommender-net") throw ValidationError(path.string() + ": not a recommender network");
  std::shared_ptr<const topics::BitermModel> btm;
  if (header.contains("btm")) btm = std::make_shared<topics::BitermModel>(topics::BitermModel::from_json(header["btm"]));
  neural::RecommenderNet net(neural::NetConfig::from_json(header.at("config")), btm);
  net.vocab_hash = header.value("vocab_hash", "");
  const auto tensors = net.tensors();
  check_shapes(neural::tensor_shapes(tensors), header.at("tensors"), path);
  neural::unflatten_values(tensors, values);
  return net;
}

void save_help_lstm(const std::filesystem::path& path, const help::HelpLstm& model) {
  auto& mut = const_cast<help::HelpLstm&>(model);
  const auto tensors = mut.tensors();
  nlohmann::json header{{"kind", "help-lstm"},
                        {"config", model.config().to_json()},
                        {"vocab_hash", model.vocab_hash},
                        {"tensors", neural::tensor_shapes(tensors)}};
  write_params(path, header, neural::flatten_values(tensors));
}

help::HelpLstm load_help_lstm(const std::filesystem::path& path) {
  auto [header, values] = read_params(path);
  if (header.value("kind", "") != "help-lstm") throw ValidationError(path.string() + ": not a help classifier");
  help::HelpLstm model(help::HelpConfig::from_json(header.at("config")));
  model.vocab_hash = header.value("vocab_hash", "");
  const auto tensors = model.tensors();
  check_shapes(neural::tensor_shapes(tensors), header.at("tensors"), path);
  neural::unflatten_values(tensors, values);
  return model;
}

void save_json(const std::filesystem::path& path, const nlohmann::json& j) { corpus::write_file(path, j.dump() + "\n"); }

nlohmann::json load_json(const std::filesystem::path& path) {
  const std::string text = corpus::read_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": invalid JSON: " + e.what());
  }
}

topics::BitermModel load_btm(const std::filesystem::path& path) {
  try {
    return topics::BitermModel::from_json(load_json(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": malformed topic model: " + e.what());
  }
}

std::unique_ptr<Recommender> load_recommender(const std::filesystem::path& path, const std::string& vocab_hash) {
  if (has_param_magic(path)) {
    auto net = std::make_unique<neural::RecommenderNet>(load_net(path));
    check_vocab(net->vocab_hash, vocab_hash, path.string());
    return net;
  }
  const auto j = load_json(path);
  const std::string format = j.value("format", "");
  try {
    if (format == "taskrec-firstmm") {
      auto m = std::make_unique<markov::FirstOrderModel>(markov::FirstOrderModel::from_json(j));
      check_vocab(m->vocab_hash, vocab_hash, path.string());
      return m;
    }
    if (format == "taskrec-pst") {
      auto m = std::make_unique<markov::SuffixTree>(markov::SuffixTree::from_json(j));
      check_vocab(m->vocab_hash, vocab_hash, path.string());
      return m;
    }
    if (format == "taskrec-taskpst") {
      auto m = std::make_unique<markov::TaskPstEnsemble>(markov::TaskPstEnsemble::from_json(j));
      check_vocab(m->vocab_hash, vocab_hash, path.string());
      return m;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": malformed model: " + e.what());
  }
  throw ValidationError(path.string() + ": not a recommender model (format '" + format + "')");
}

std::string detect_kind(const std::filesystem::path& path) {
  if (has_param_magic(path)) {
    const std::string kind = read_params(path).first.value("kind", "");
    if (kind == "recommender-net") return "recommender";
    if (kind == "help-lstm") return "help";
    throw ValidationError(path.string() + ": unknown parameter file kind '" + kind + "'");
  }
  const std::string format = load_json(path).value("format", "");
  if (format == "taskrec-firstmm" || format == "taskrec-pst" || format == "taskrec-taskpst") return "recommender";
  if (format == "taskrec-help-rf") return "help";
  throw ValidationError(path.string() + ": unrecognised model format '" + format + "'");
}

std::string HelpModel::name() const {
  if (forest) return forest->use_time ? "Random Forest (Time ⊕ Commands)" : "Random Forest (Commands only)";
  if (lstm) return lstm->config().use_time ? "LSTM Classifier (Time ⊕ Commands)" : "LSTM Classifier (Commands only)";
  return "?";
}

std::string HelpModel::vocab_hash() const {
  if (forest) return forest->vocab_hash;
  if (lstm) return lstm->vocab_hash;
  return "";
}

bool HelpModel::use_time() const {
  if (forest) return forest->use_time;
  if (lstm) return lstm->config().use_time;
  return false;
}

double HelpModel::score(const corpus::CommandSequence& seq, std::size_t k) const {
  if (forest) return forest->score(seq);
  if (lstm) return help::help_score(*lstm, seq, k);
  throw ValidationError("no help model loaded");
}

HelpModel load_help_model(const std::filesystem::path& path, const std::string& vocab_hash) {
  HelpModel m;
  if (has_param_magic(path)) {
    m.lstm = load_help_lstm(path);
  } else {
    try {
      m.forest = help::HelpForest::from_json(load_json(path));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path.string() + ": malformed help forest: " + e.what());
    }
  }
  check_vocab(m.vocab_hash(), vocab_hash, path.string());
  return m;
}

}  // namespace taskrec::io
