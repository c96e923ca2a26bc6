#include "qoelab/media/timeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qoelab/common/random.hpp"

namespace qoelab::media {
namespace {

std::size_t count_frames(double duration_s, double period_s) {
  // Tolerate representation error so 10 s at 25 fps yields exactly 250.
  return static_cast<std::size_t>(std::floor(duration_s / period_s + 1e-9));
}

std::vector<std::uint32_t> draw_video_sizes(const MediaProfile& p,
                                            std::uint64_t seed,
                                            std::size_t count) {
  const double mean = p.video_bitrate_kbit * 1000.0 / 8.0 / p.video_fps;
  Rng rng(combine_seed(seed, "video-sizes/" + p.source_id));
  std::vector<double> raw(count);
  const double sigma = kVideoSizeSigma;
  for (auto& x : raw) {
    x = std::clamp(mean * std::exp(sigma * rng.normal() - 0.5 * sigma * sigma),
                   0.2 * mean, 5.0 * mean);
  }
  // Rate control: rescale so the stream hits its nominal bitrate.
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  const double scale = total > 0 ? mean * static_cast<double>(count) / total : 1;
  std::vector<std::uint32_t> sizes(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double v = std::clamp(raw[i] * scale, 0.2 * mean, 5.0 * mean);
    sizes[i] = static_cast<std::uint32_t>(std::max(1.0, std::round(v)));
  }
  return sizes;
}

MediaTimeline layout(const MediaProfile& profile, std::uint64_t seed) {
  validate(profile);
  MediaTimeline t;
  t.profile = profile;
  t.seed = seed;

  const std::size_t n_video = count_frames(profile.duration_s, 1.0 / profile.video_fps);
  const auto sizes = draw_video_sizes(profile, seed, n_video);
  t.video_frames.resize(n_video);
  for (std::size_t i = 0; i < n_video; ++i) {
    Frame& f = t.video_frames[i];
    f.kind = MediaKind::Video;
    f.index = static_cast<std::uint32_t>(i);
    f.capture_time = static_cast<double>(i) / profile.video_fps;
    f.rtp_timestamp = rtp_timestamp_at(f.capture_time, profile.video_clock_rate);
    f.size = sizes[i];
  }

  const std::size_t n_audio =
      count_frames(profile.duration_s, profile.audio_frame_ms / 1000.0);
  const auto audio_size = static_cast<std::uint32_t>(std::max(
      1.0, std::round(profile.audio_bitrate_kbit * profile.audio_frame_ms / 8.0)));
  t.audio_frames.resize(n_audio);
  for (std::size_t i = 0; i < n_audio; ++i) {
    Frame& f = t.audio_frames[i];
    f.kind = MediaKind::Audio;
    f.index = static_cast<std::uint32_t>(i);
    f.capture_time = static_cast<double>(i) * profile.audio_frame_ms / 1000.0;
    f.rtp_timestamp = rtp_timestamp_at(f.capture_time, profile.audio_clock_rate);
    f.size = audio_size;
  }
  return t;
}

void fill_digest(Frame& f, std::uint64_t seed, std::string_view source_id) {
  f.payload_digest =
      payload_digest(synthetic_payload(seed, source_id, f.kind, f.index, f.size));
}

}  // namespace

Bytes synthetic_payload(std::uint64_t seed, std::string_view source_id,
                        MediaKind kind, std::uint32_t index, std::size_t size) {
  std::uint64_t state = combine_seed(
      combine_seed(combine_seed(seed, source_id), static_cast<std::uint64_t>(kind)),
      index);
  Bytes out(size);
  std::size_t i = 0;
  while (i < size) {
    state = mix64(state);
    for (int b = 0; b < 8 && i < size; ++b, ++i) {
      out[i] = static_cast<std::uint8_t>(state >> (8 * b));
    }
  }
  return out;
}

std::uint64_t payload_digest(ByteView bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint32_t rtp_timestamp_at(Seconds capture_time, double clock_rate) {
  const auto ticks = std::llround(capture_time * clock_rate);
  return static_cast<std::uint32_t>(static_cast<std::uint64_t>(ticks) & 0xffffffffULL);
}

MediaTimeline generate_timeline(const MediaProfile& profile, std::uint64_t seed) {
  MediaTimeline t = layout(profile, seed);
  const auto n_video = static_cast<std::ptrdiff_t>(t.video_frames.size());
  const auto n_total = n_video + static_cast<std::ptrdiff_t>(t.audio_frames.size());
  const std::string& source = t.profile.source_id;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n_total; ++i) {
    Frame& f = i < n_video ? t.video_frames[static_cast<std::size_t>(i)]
                           : t.audio_frames[static_cast<std::size_t>(i - n_video)];
    fill_digest(f, seed, source);
  }
  return t;
}

MediaTimeline generate_timeline_serial(const MediaProfile& profile,
                                       std::uint64_t seed) {
  MediaTimeline t = layout(profile, seed);
  for (auto& f : t.video_frames) fill_digest(f, seed, t.profile.source_id);
  for (auto& f : t.audio_frames) fill_digest(f, seed, t.profile.source_id);
  return t;
}

}  // namespace qoelab::media
