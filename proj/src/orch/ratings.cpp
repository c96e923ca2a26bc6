#include "qoelab/orch/ratings.hpp"

#include <chrono>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "qoelab/common/error.hpp"
#include "qoelab/media/manifest.hpp"
#include "qoelab/orch/experiment.hpp"

namespace qoelab::orch {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

bool safe_name(std::string_view name) {
  if (name.empty() || name.front() == '.') return false;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

ApiResponse error(int status, std::string_view message) {
  ordered_json j;
  j["error"] = message;
  return {status, j.dump()};
}

}  // namespace

Playlist parse_playlist(std::string_view text, int session, int part) {
  Playlist p;
  p.session = session;
  p.part = part;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (trim(line.substr(1)) == "training") p.training = true;
      continue;
    }
    if (!safe_name(line)) {
      throw ParseError(fmt::format("playlist line {}: bad run name '{}'", line_no, line));
    }
    p.items.emplace_back(line);
  }
  return p;
}

fs::path playlist_path(const fs::path& dataset, int session, int part) {
  return dataset / "playlists" / fmt::format("session{}_part{}.txt", session, part);
}

std::string rating_to_json(const RatingRecord& r) {
  ordered_json j;
  j["rater_id"] = r.rater_id;
  j["run_id"] = r.run_id;
  j["session"] = r.session;
  j["part"] = r.part;
  j["position"] = r.position;
  j["score"] = r.score;
  j["rated_at"] = r.rated_at;
  j["training"] = r.training;
  return j.dump();
}

RatingRecord rating_from_json(std::string_view line) {
  try {
    const json j = json::parse(line);
    RatingRecord r;
    r.rater_id = j.at("rater_id").get<std::string>();
    r.run_id = j.at("run_id").get<std::string>();
    r.session = j.at("session").get<int>();
    r.part = j.at("part").get<int>();
    r.position = j.at("position").get<int>();
    r.score = j.at("score").get<int>();
    r.rated_at = j.at("rated_at").get<double>();
    r.training = j.at("training").get<bool>();
    return r;
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("bad rating record: {}", e.what()));
  }
}

std::vector<RatingRecord> RatingJournal::read(const fs::path& path) {
  std::vector<RatingRecord> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) break;  // torn tail
    ++line_no;
    const std::string_view line(text.data() + start, nl - start);
    start = nl + 1;
    if (trim(line).empty()) continue;
    try {
      out.push_back(rating_from_json(line));
    } catch (const ParseError& e) {
      throw ParseError(fmt::format("{} line {}: {}", path.string(), line_no, e.what()));
    }
  }
  return out;
}

RatingJournal::RatingJournal(fs::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
  replayed_ = read(path_);
  if (fs::exists(path_)) {
    // Cut a torn tail so the next append starts on a fresh line.
    std::ifstream in(path_, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const std::size_t keep = text.rfind('\n') == std::string::npos ? 0 : text.rfind('\n') + 1;
    if (keep != text.size()) fs::resize_file(path_, keep);
  }
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw std::runtime_error(fmt::format("cannot open journal {}", path_.string()));
}

void RatingJournal::append(const RatingRecord& record) {
  std::lock_guard lock(mutex_);
  out_ << rating_to_json(record) << '\n';
  out_.flush();
  if (!out_) throw std::runtime_error(fmt::format("journal write failed: {}", path_.string()));
}

RatingService::RatingService(fs::path dataset, std::optional<fs::path> journal, Clock clock)
    : dataset_(std::move(dataset)), clock_(std::move(clock)) {
  if (!clock_) {
    clock_ = [] {
      return std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch())
          .count();
    };
  }
  for (int s = 1; s <= kSessions; ++s) {
    for (int p = 1; p <= kPartsPerSession; ++p) {
      const fs::path path = playlist_path(dataset_, s, p);
      std::ifstream in(path);
      if (!in) continue;
      std::stringstream buf;
      buf << in.rdbuf();
      playlists_[{s, p}] = parse_playlist(buf.str(), s, p);
    }
  }
  journal_ = std::make_unique<RatingJournal>(journal.value_or(dataset_ / "ratings.jsonl"));
  for (const auto& r : journal_->replayed()) {
    by_key_[{r.rater_id, r.run_id}] = ratings_.size();
    ratings_.push_back(r);
  }
}

const Playlist* RatingService::find(int session, int part) const {
  const auto it = playlists_.find({session, part});
  return it == playlists_.end() ? nullptr : &it->second;
}

ApiResponse RatingService::playlist(int session, int part) const {
  const Playlist* p = find(session, part);
  if (!p) return error(404, fmt::format("no playlist for session {} part {}", session, part));
  ordered_json j;
  j["session"] = session;
  j["part"] = part;
  j["training"] = p->training;
  j["items"] = json::array();
  for (std::size_t i = 0; i < p->items.size(); ++i) {
    ordered_json item;
    item["position"] = i + 1;
    item["run_id"] = p->items[i];
    item["media"] = fmt::format("/media/{}/manifest", p->items[i]);
    item["training"] = p->training;
    j["items"].push_back(std::move(item));
  }
  return {200, j.dump()};
}

ApiResponse RatingService::manifest(std::string_view run_id) const {
  if (!safe_name(run_id)) return error(404, "unknown run");
  const fs::path dir = dataset_ / std::string(run_id);
  std::ifstream in(dir / std::string(kReceivedManifestFile));
  if (!in) return error(404, fmt::format("no manifest for {}", run_id));
  ordered_json j;
  j["run_id"] = run_id;
  try {
    ordered_json frames = json::array();
    for (const auto& f : media::read_received_manifest(in)) {
      ordered_json o;
      o["kind"] = to_string(f.kind);
      o["index"] = f.index;
      o["status"] = media::to_string(f.status);
      o["fragments_received"] = f.fragments_received;
      o["fragments_expected"] = f.fragments_expected;
      frames.push_back(std::move(o));
    }
    j["frames"] = std::move(frames);
  } catch (const ParseError& e) {
    return error(500, e.what());
  }
  if (auto summary = load_completed(dataset_, run_id)) {
    j["summary"] = ordered_json::parse(summary_to_json(*summary));
  }
  return {200, j.dump()};
}

ApiResponse RatingService::post_rating(std::string_view body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception&) {
    return error(400, "body is not JSON");
  }
  if (!j.is_object()) return error(400, "body must be an object");
  auto int_field = [&](const char* key) -> std::optional<int> {
    if (!j.contains(key) || !j.at(key).is_number_integer()) return std::nullopt;
    return j.at(key).get<int>();
  };
  const auto score = int_field("score");
  if (!score || *score < 1 || *score > 5) return error(400, "score must be an integer in 1..5");
  const auto session = int_field("session");
  const auto part = int_field("part");
  const auto position = int_field("position");
  if (!session || !part || !position) return error(400, "session, part and position are required");
  if (!j.contains("rater_id") || !j.at("rater_id").is_string() ||
      j.at("rater_id").get<std::string>().empty()) {
    return error(400, "rater_id is required");
  }
  if (!j.contains("run_id") || !j.at("run_id").is_string()) return error(400, "run_id is required");

  const Playlist* p = find(*session, *part);
  if (!p) return error(404, fmt::format("no playlist for session {} part {}", *session, *part));
  if (*position < 1 || static_cast<std::size_t>(*position) > p->items.size()) {
    return error(404, fmt::format("no item at position {}", *position));
  }
  RatingRecord r;
  r.rater_id = j.at("rater_id").get<std::string>();
  r.run_id = j.at("run_id").get<std::string>();
  r.session = *session;
  r.part = *part;
  r.position = *position;
  r.score = *score;
  r.training = p->training;
  if (p->items[*position - 1] != r.run_id) {
    return error(400, fmt::format("run {} is not at position {}", r.run_id, *position));
  }

  std::lock_guard lock(mutex_);
  const std::pair key{r.rater_id, r.run_id};
  if (by_key_.count(key)) return error(409, fmt::format("{} already rated {}", r.rater_id, r.run_id));
  r.rated_at = clock_();
  if (const auto it = started_.find(key); it != started_.end()) {
    if (r.rated_at - it->second < kRatingGateSeconds) {
      return error(400, "rating submitted before 10 s of playback");
    }
  }
  journal_->append(r);
  by_key_[key] = ratings_.size();
  ratings_.push_back(r);
  return {201, rating_to_json(r)};
}

ApiResponse RatingService::item_start(int session, int part, int position, std::string_view body) {
  const Playlist* p = find(session, part);
  if (!p) return error(404, fmt::format("no playlist for session {} part {}", session, part));
  if (position < 1 || static_cast<std::size_t>(position) > p->items.size()) {
    return error(404, fmt::format("no item at position {}", position));
  }
  std::string rater;
  try {
    const json j = json::parse(body);
    rater = j.at("rater_id").get<std::string>();
  } catch (const json::exception&) {
    return error(400, "rater_id is required");
  }
  if (rater.empty()) return error(400, "rater_id is required");
  std::lock_guard lock(mutex_);
  const double now = clock_();
  started_[{rater, p->items[position - 1]}] = now;
  ordered_json j;
  j["run_id"] = p->items[position - 1];
  j["started_at"] = now;
  return {200, j.dump()};
}

ApiResponse RatingService::progress(std::string_view rater_id) const {
  std::lock_guard lock(mutex_);
  ordered_json j;
  j["rater_id"] = rater_id;
  j["parts"] = json::array();
  std::size_t rated_total = 0;
  std::size_t total = 0;
  for (const auto& [key, p] : playlists_) {
    std::size_t rated = 0;
    std::optional<std::size_t> next;
    for (std::size_t i = 0; i < p.items.size(); ++i) {
      if (by_key_.count({std::string(rater_id), p.items[i]})) {
        ++rated;
      } else if (!next) {
        next = i + 1;
      }
    }
    ordered_json part;
    part["session"] = key.first;
    part["part"] = key.second;
    part["training"] = p.training;
    part["rated"] = rated;
    part["total"] = p.items.size();
    part["next_position"] = next ? json(*next) : json(nullptr);
    j["parts"].push_back(std::move(part));
    rated_total += rated;
    total += p.items.size();
  }
  j["rated"] = rated_total;
  j["total"] = total;
  return {200, j.dump()};
}

ApiResponse RatingService::export_ratings() const {
  std::lock_guard lock(mutex_);
  ordered_json j;
  j["ratings"] = json::array();
  for (const auto& r : ratings_) {
    if (!r.training) j["ratings"].push_back(ordered_json::parse(rating_to_json(r)));
  }
  return {200, j.dump()};
}

std::vector<RatingRecord> RatingService::ratings() const {
  std::lock_guard lock(mutex_);
  return ratings_;
}

}  // namespace qoelab::orch
