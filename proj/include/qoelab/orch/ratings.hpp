#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qoelab::orch {

inline constexpr int kSessions = 2;
inline constexpr int kPartsPerSession = 4;
inline constexpr double kRatingGateSeconds = 10.0;

struct Playlist {
  int session = 0;
  int part = 0;
  bool training = false;
  std::vector<std::string> items;  // run output names, presentation order
};

// Lines are run names; blank lines and '#' comments are skipped. A line
// reading "#training" flags the whole playlist. Throws ParseError on names
// containing path separators or whitespace.
Playlist parse_playlist(std::string_view text, int session, int part);

// dataset/playlists/session{s}_part{p}.txt
std::filesystem::path playlist_path(const std::filesystem::path& dataset, int session, int part);

struct RatingRecord {
  std::string rater_id;
  std::string run_id;
  int session = 0;
  int part = 0;
  int position = 0;  // 1-based
  int score = 0;     // ACR 1..5
  double rated_at = 0;  // seconds since the Unix epoch
  bool training = false;

  bool operator==(const RatingRecord&) const = default;
};

std::string rating_to_json(const RatingRecord& r);
// Throws ParseError.
RatingRecord rating_from_json(std::string_view line);

// Append-only JSON Lines file. Opening replays existing records; a torn last
// line (no trailing newline) is dropped and truncated away. A malformed
// complete line throws ParseError.
class RatingJournal {
 public:
  explicit RatingJournal(std::filesystem::path path);

  const std::vector<RatingRecord>& replayed() const { return replayed_; }
  void append(const RatingRecord& record);

  static std::vector<RatingRecord> read(const std::filesystem::path& path);

 private:
  std::filesystem::path path_;
  std::vector<RatingRecord> replayed_;
  std::mutex mutex_;
  std::ofstream out_;
};

struct ApiResponse {
  int status = 200;
  std::string body;  // JSON
};

// Request handling for the rating UI, independent of the HTTP library.
// Thread-safe.
class RatingService {
 public:
  using Clock = std::function<double()>;

  // Loads every playlist present under dataset/playlists and replays the
  // journal (default dataset/ratings.jsonl).
  RatingService(std::filesystem::path dataset, std::optional<std::filesystem::path> journal = {},
                Clock clock = {});

  ApiResponse playlist(int session, int part) const;
  ApiResponse manifest(std::string_view run_id) const;
  ApiResponse post_rating(std::string_view body);
  ApiResponse item_start(int session, int part, int position, std::string_view body);
  ApiResponse progress(std::string_view rater_id) const;
  // Non-training ratings in journal order.
  ApiResponse export_ratings() const;

  std::vector<RatingRecord> ratings() const;
  const std::map<std::pair<int, int>, Playlist>& playlists() const { return playlists_; }

 private:
  const Playlist* find(int session, int part) const;

  std::filesystem::path dataset_;
  Clock clock_;
  std::map<std::pair<int, int>, Playlist> playlists_;
  std::unique_ptr<RatingJournal> journal_;
  mutable std::mutex mutex_;
  std::vector<RatingRecord> ratings_;
  std::map<std::pair<std::string, std::string>, std::size_t> by_key_;
  std::map<std::pair<std::string, std::string>, double> started_;
};

}  // namespace qoelab::orch
