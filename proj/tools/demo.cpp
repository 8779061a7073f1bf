#include "demo.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace taskrec::cli {

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::vector<std::string> suggest(const Vocabulary& vocab, const std::string& name, std::size_t n) {
  std::vector<std::pair<std::size_t, std::string>> scored;
  for (const auto& v : vocab.names()) scored.emplace_back(edit_distance(name, v), v);
  std::sort(scored.begin(), scored.end());
  std::vector<std::string> out;
  for (std::size_t i = 0; i < scored.size() && i < n; ++i) out.push_back(scored[i].second);
  return out;
}

namespace {

class HelpTracker {
 public:
  HelpTracker(const io::HelpModel& model) : model_(model) {
    if (model.lstm) stream_.emplace(*model.lstm);
  }

  double push(const corpus::CommandSequence& session) {
    const std::size_t t = session.commands.size() - 1;
    if (stream_) return stream_->push(session.commands[t], session.gaps[t]);
    return model_.forest->score(session);
  }

 private:
  const io::HelpModel& model_;
  std::optional<help::HelpStream> stream_;
};

std::string fmt(double v, int digits = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

std::optional<std::size_t> run_demo(const DemoModels& models, const DemoOptions& opts, std::istream& in,
                                    std::ostream& out) {
  corpus::CommandSequence session;
  session.user = "demo";
  std::optional<HelpTracker> tracker;
  if (models.help) tracker.emplace(*models.help);
  std::optional<std::size_t> first_alarm;
  auto last = std::chrono::steady_clock::now();

  if (!opts.jsonl) out << "Type a command (optionally followed by the seconds since the previous one); 'quit' ends.\n";
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string name;
    if (!(ls >> name)) continue;
    if (name == "quit") break;
    double gap = 0.0;
    bool explicit_gap = static_cast<bool>(ls >> gap);
    const auto now = std::chrono::steady_clock::now();
    if (!explicit_gap) gap = std::chrono::duration<double>(now - last).count();
    last = now;
    if (session.commands.empty()) gap = 0.0;
    if (gap < 0.0) {
      out << (opts.jsonl ? R"({"error":"negative gap"})" : "negative gap ignored; state unchanged") << '\n';
      continue;
    }

    const auto id = models.vocab.find(name);
    if (!id) {
      const auto near = suggest(models.vocab, name);
      if (opts.jsonl) {
        out << nlohmann::json{{"error", "unknown command"}, {"command", name}, {"suggestions", near}}.dump() << '\n';
      } else {
        out << "unknown command '" << name << "'. Did you mean:";
        for (const auto& s : near) out << ' ' << s;
        out << "? (state unchanged)\n";
      }
      continue;
    }
    session.commands.push_back(*id);
    session.gaps.push_back(gap);
    const std::size_t t = session.commands.size() - 1;

    std::optional<topics::TaskDistribution> task;
    if (models.btm) task = topics::infer_task_distribution(*models.btm, session.commands);
    const auto recs = models.recommender->recommend(session.commands, opts.top_k);
    std::optional<double> p_help;
    if (tracker) {
      const double p = tracker->push(session);
      if (t >= opts.context) {
        p_help = p;
        if (!first_alarm && p >= opts.threshold) first_alarm = t;
      }
    }
    const bool alarm = p_help && *p_help >= opts.threshold;

    if (opts.jsonl) {
      nlohmann::json j{{"t", t}, {"command", name}};
      if (task) {
        const auto z = task->argmax();
        j["task"] = z;
        j["task_p"] = task->p[z];
      }
      nlohmann::json r = nlohmann::json::array();
      for (const auto& [c, p] : recs) r.push_back({{"command", models.vocab.name(c)}, {"p", p}});
      j["recommendations"] = r;
      if (p_help) {
        j["p_help"] = *p_help;
        j["alarm"] = alarm;
      } else if (tracker) {
        j["p_help"] = nullptr;
        j["alarm"] = false;
      }
      out << j.dump() << '\n';
      continue;
    }

    out << "[" << t << "] " << name << "\n";
    if (task) {
      const auto z = task->argmax();
      out << "  task: " << z << " (p=" << fmt(task->p[z]) << ")";
      const auto words = topics::top_commands(*models.btm, z, 3);
      if (!words.empty()) {
        out << " e.g.";
        for (const auto& [c, _] : words) out << ' ' << models.vocab.name(c);
      }
      out << '\n';
    }
    out << "  next:";
    for (const auto& [c, p] : recs) out << "  " << models.vocab.name(c) << " " << fmt(p);
    out << '\n';
    if (tracker) {
      if (!p_help) {
        out << "  help: warming up (" << session.commands.size() << "/" << opts.context + 1 << ")\n";
      } else {
        out << "  help: p=" << fmt(*p_help) << (alarm ? "  [!] looks like you could use some help" : "") << '\n';
      }
    }
  }
  return first_alarm;
}

}  // namespace taskrec::cli
