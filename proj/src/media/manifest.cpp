#include "qoelab/media/manifest.hpp"

#include <istream>
#include <ostream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "qoelab/common/error.hpp"

namespace qoelab::media {
namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json frame_record(MediaKind kind, std::uint32_t index, std::uint32_t ts,
                          std::uint32_t size, std::uint64_t digest) {
  ordered_json j;
  j["kind"] = to_string(kind);
  j["index"] = index;
  j["rtp_timestamp"] = ts;
  j["size"] = size;
  j["digest"] = digest_hex(digest);
  return j;
}

FrameStatus parse_status(const std::string& s) {
  if (s == "complete") return FrameStatus::Complete;
  if (s == "partial") return FrameStatus::Partial;
  if (s == "missing") return FrameStatus::Missing;
  throw ParseError(fmt::format("manifest: unknown status '{}'", s));
}

}  // namespace

std::string_view to_string(FrameStatus status) {
  switch (status) {
    case FrameStatus::Complete: return "complete";
    case FrameStatus::Partial: return "partial";
    case FrameStatus::Missing: return "missing";
  }
  return "?";
}

std::string digest_hex(std::uint64_t digest) { return fmt::format("{:016x}", digest); }

void write_timeline_manifest(std::ostream& out, const MediaTimeline& timeline) {
  for (MediaKind kind : kAllMedia) {
    for (const Frame& f : timeline.frames(kind)) {
      out << frame_record(f.kind, f.index, f.rtp_timestamp, f.size, f.payload_digest)
                 .dump()
          << '\n';
    }
  }
}

void write_received_manifest(std::ostream& out,
                             std::span<const ReceivedFrame> frames) {
  for (const auto& f : frames) {
    auto j = frame_record(f.kind, f.index, f.rtp_timestamp, f.size, f.digest);
    j["status"] = to_string(f.status);
    j["fragments_received"] = f.fragments_received;
    j["fragments_expected"] = f.fragments_expected;
    j["digest_ok"] = f.digest_ok;
    out << j.dump() << '\n';
  }
}

std::vector<ReceivedFrame> read_received_manifest(std::istream& in) {
  std::vector<ReceivedFrame> frames;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ReceivedFrame f;
      const auto kind = j.at("kind").get<std::string>();
      if (kind != "video" && kind != "audio") {
        throw ParseError(fmt::format("unknown kind '{}'", kind));
      }
      f.kind = kind == "video" ? MediaKind::Video : MediaKind::Audio;
      f.index = j.at("index").get<std::uint32_t>();
      f.rtp_timestamp = j.at("rtp_timestamp").get<std::uint32_t>();
      f.size = j.at("size").get<std::uint32_t>();
      f.digest = std::stoull(j.at("digest").get<std::string>(), nullptr, 16);
      f.status = parse_status(j.at("status").get<std::string>());
      f.fragments_received = j.at("fragments_received").get<std::uint32_t>();
      f.fragments_expected = j.at("fragments_expected").get<std::uint32_t>();
      f.digest_ok = j.at("digest_ok").get<bool>();
      frames.push_back(f);
    } catch (const std::exception& e) {
      throw ParseError(fmt::format("manifest line {}: {}", line_no, e.what()));
    }
  }
  return frames;
}

}  // namespace qoelab::media
