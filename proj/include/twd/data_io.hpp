/* Copyright 2026 The twdkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Text-record parsing ("frame agent x y" per line), sliding-window scene
// extraction, and the versioned binary dataset container (magic "TWDS",
// little-endian, bit-exact round trip).
//
// Extraction admits only agents observed at every frame of a window, so
// every emitted scene has fully defined ground truth; nothing is ever
// interpolated or fabricated.

#ifndef TWD_DATA_IO_HPP_
#define TWD_DATA_IO_HPP_

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "twd/core_types.hpp"
#include "twd/errors.hpp"

namespace twd {

struct RawRecord {
  std::int64_t frame_id = 0;
  std::int64_t agent_id = 0;
  double x = 0.0;
  double y = 0.0;
};

struct WindowSpec {
  std::size_t n_obs = 8;
  std::size_t m_pred = 12;
  std::size_t stride = 1;
  double frame_interval = 0.4;  // seconds per timestamp
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                        s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view token, std::size_t line) {
  T value{};
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw ParseError(line, "cannot parse '" + std::string(token) + "'");
  return value;
}

}  // namespace detail

// One record per line, four whitespace-separated fields `frame agent x y`.
// Lines beginning with '#' and blank lines are ignored.
inline std::vector<RawRecord> parse_records(std::istream& stream) {
  std::vector<RawRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const std::string_view trimmed = detail::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    std::string_view rest = trimmed;
    std::string_view tokens[4];
    std::size_t count = 0;
    while (!rest.empty()) {
      const std::size_t start = rest.find_first_not_of(" \t");
      if (start == std::string_view::npos) break;
      rest.remove_prefix(start);
      std::size_t end = rest.find_first_of(" \t");
      if (end == std::string_view::npos) end = rest.size();
      if (count == 4) throw ParseError(line_no, "expected 4 fields");
      tokens[count++] = rest.substr(0, end);
      rest.remove_prefix(end);
    }
    if (count != 4) throw ParseError(line_no, "expected 4 fields");
    RawRecord record;
    record.frame_id = detail::parse_number<std::int64_t>(tokens[0], line_no);
    record.agent_id = detail::parse_number<std::int64_t>(tokens[1], line_no);
    record.x = detail::parse_number<double>(tokens[2], line_no);
    record.y = detail::parse_number<double>(tokens[3], line_no);
    if (!std::isfinite(record.x) || !std::isfinite(record.y))
      throw ParseError(line_no, "non-finite coordinate");
    records.push_back(record);
  }
  return records;
}

inline std::vector<RawRecord> parse_records(const std::string& text) {
  std::istringstream stream(text);
  return parse_records(stream);
}

// Slides a window of n_obs + m_pred consecutive frames (stepping by
// stride) over the frame timeline and keeps, per window, exactly the
// agents observed at ALL of its frames, in ascending agent id order.
// Windows with no complete agent are skipped.
inline Dataset extract_scenes(const std::vector<RawRecord>& records,
                              const WindowSpec& spec) {
  if (spec.n_obs < 2 || spec.m_pred < 1 || spec.stride < 1 ||
      !(spec.frame_interval > 0.0))
    throw std::invalid_argument("extract_scenes: bad window spec");

  std::vector<std::int64_t> frames;
  frames.reserve(records.size());
  for (const RawRecord& r : records) frames.push_back(r.frame_id);
  std::sort(frames.begin(), frames.end());
  frames.erase(std::unique(frames.begin(), frames.end()), frames.end());
  const std::size_t frame_count = frames.size();
  for (std::size_t i = 2; i < frame_count; ++i)
    if (frames[i] - frames[i - 1] != frames[1] - frames[0])
      throw std::invalid_argument(
          "extract_scenes: frames do not form an arithmetic sequence");

  std::map<std::int64_t, std::size_t> frame_index;
  for (std::size_t i = 0; i < frame_count; ++i) frame_index[frames[i]] = i;

  struct AgentTrack {
    std::vector<char> present;
    std::vector<Waypoint> pos;
    std::vector<std::size_t> cumulative;  // presence prefix sums
  };
  std::map<std::int64_t, AgentTrack> agents;  // ascending agent id
  for (const RawRecord& r : records) {
    AgentTrack& track = agents[r.agent_id];
    if (track.present.empty()) {
      track.present.assign(frame_count, 0);
      track.pos.assign(frame_count, Waypoint{});
    }
    const std::size_t fi = frame_index[r.frame_id];
    if (track.present[fi])
      throw std::invalid_argument(
          "extract_scenes: duplicate record for agent " +
          std::to_string(r.agent_id) + " at frame " +
          std::to_string(r.frame_id));
    track.present[fi] = 1;
    track.pos[fi] = {r.x, r.y};
  }
  for (auto& [id, track] : agents) {
    track.cumulative.assign(frame_count + 1, 0);
    for (std::size_t i = 0; i < frame_count; ++i)
      track.cumulative[i + 1] =
          track.cumulative[i] + static_cast<std::size_t>(track.present[i]);
  }

  const std::size_t window = spec.n_obs + spec.m_pred;
  Dataset dataset;
  for (std::size_t start = 0; start + window <= frame_count;
       start += spec.stride) {
    std::vector<std::int64_t> complete;
    for (const auto& [id, track] : agents)
      if (track.cumulative[start + window] - track.cumulative[start] == window)
        complete.push_back(id);
    if (complete.empty()) continue;

    Scene scene;
    scene.frame_interval = spec.frame_interval;
    scene.observed.len = spec.n_obs;
    scene.observed.agent_ids = complete;
    scene.future.agents = complete.size();
    scene.future.len = spec.m_pred;
    scene.observed.positions.reserve(complete.size() * spec.n_obs);
    scene.future.positions.reserve(complete.size() * spec.m_pred);
    for (std::int64_t id : complete) {
      const AgentTrack& track = agents[id];
      for (std::size_t t = 0; t < spec.n_obs; ++t)
        scene.observed.positions.push_back(track.pos[start + t]);
      for (std::size_t t = 0; t < spec.m_pred; ++t)
        scene.future.positions.push_back(track.pos[start + spec.n_obs + t]);
    }
    dataset.scenes.push_back(std::move(scene));
  }
  if (dataset.scenes.empty())
    throw EmptyDatasetError("extract_scenes: no complete windows");
  return dataset;
}

namespace detail {

constexpr char kMagic[4] = {'T', 'W', 'D', 'S'};
constexpr std::uint32_t kFormatVersion = 1;

inline void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>(v >> (8 * i));
  out.write(b, 4);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>(v >> (8 * i));
  out.write(b, 8);
}

inline void put_f64(std::ostream& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

inline std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw FormatError("dataset: truncated file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

inline std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8))
    throw FormatError("dataset: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

inline double get_f64(std::istream& in) {
  return std::bit_cast<double>(get_u64(in));
}

}  // namespace detail

inline void write_dataset(const Dataset& dataset, std::ostream& out) {
  if (dataset.scenes.empty())
    throw EmptyDatasetError("write_dataset: no scenes");
  const Scene& first = dataset.scenes.front();
  for (const Scene& scene : dataset.scenes)
    if (scene.observed.len != first.observed.len ||
        scene.future.len != first.future.len ||
        scene.frame_interval != first.frame_interval)
      throw std::invalid_argument(
          "write_dataset: scenes do not share (n, m, frame_interval)");

  out.write(detail::kMagic, 4);
  detail::put_u32(out, detail::kFormatVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(first.observed.len));
  detail::put_u32(out, static_cast<std::uint32_t>(first.future.len));
  detail::put_f64(out, first.frame_interval);
  out.put(static_cast<char>(dataset.split_tag));
  detail::put_u64(out, dataset.scenes.size());
  for (const Scene& scene : dataset.scenes) {
    detail::put_u32(out, static_cast<std::uint32_t>(scene.observed.agents()));
    for (std::int64_t id : scene.observed.agent_ids)
      detail::put_u64(out, static_cast<std::uint64_t>(id));
    for (const Waypoint& w : scene.observed.positions) {
      detail::put_f64(out, w.x);
      detail::put_f64(out, w.y);
    }
    for (const Waypoint& w : scene.future.positions) {
      detail::put_f64(out, w.x);
      detail::put_f64(out, w.y);
    }
  }
  if (!out) throw FormatError("write_dataset: write failed");
}

inline Dataset read_dataset(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::string_view(magic, 4) !=
                                std::string_view(detail::kMagic, 4))
    throw FormatError("dataset: bad magic");
  const std::uint32_t version = detail::get_u32(in);
  if (version != detail::kFormatVersion)
    throw FormatError("dataset: unsupported format_version " +
                      std::to_string(version));
  const std::size_t n_obs = detail::get_u32(in);
  const std::size_t m_pred = detail::get_u32(in);
  const double frame_interval = detail::get_f64(in);
  int tag = in.get();
  if (tag < 0) throw FormatError("dataset: truncated file");
  if (tag > 2) throw FormatError("dataset: bad split tag");
  const std::uint64_t scene_count = detail::get_u64(in);
  if (scene_count == 0) throw EmptyDatasetError("dataset: zero scenes");

  Dataset dataset;
  dataset.split_tag = static_cast<SplitTag>(tag);
  dataset.scenes.reserve(scene_count);
  for (std::uint64_t s = 0; s < scene_count; ++s) {
    Scene scene;
    scene.frame_interval = frame_interval;
    const std::size_t agents = detail::get_u32(in);
    scene.observed.len = n_obs;
    scene.observed.agent_ids.resize(agents);
    for (std::size_t a = 0; a < agents; ++a)
      scene.observed.agent_ids[a] =
          static_cast<std::int64_t>(detail::get_u64(in));
    scene.observed.positions.resize(agents * n_obs);
    for (Waypoint& w : scene.observed.positions) {
      w.x = detail::get_f64(in);
      w.y = detail::get_f64(in);
    }
    scene.future.agents = agents;
    scene.future.len = m_pred;
    scene.future.positions.resize(agents * m_pred);
    for (Waypoint& w : scene.future.positions) {
      w.x = detail::get_f64(in);
      w.y = detail::get_f64(in);
    }
    dataset.scenes.push_back(std::move(scene));
  }
  return dataset;
}

inline void write_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("write_dataset: cannot open " + path);
  write_dataset(dataset, static_cast<std::ostream&>(out));
}

inline Dataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("read_dataset: cannot open " + path);
  return read_dataset(static_cast<std::istream&>(in));
}

// Canonical container bytes of a dataset, for content hashing.
inline std::string dataset_bytes(const Dataset& dataset) {
  std::ostringstream out(std::ios::binary);
  write_dataset(dataset, static_cast<std::ostream&>(out));
  return out.str();
}

}  // namespace twd

#endif  // TWD_DATA_IO_HPP_
