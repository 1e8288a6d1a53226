#include "molsps/tagio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <queue>
#include <tuple>

#include "molsps/errors.hpp"
#include "molsps/io.hpp"

namespace molsps {

namespace {

constexpr char kMagic[4] = {'P', 'T', 'A', 'G'};
constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kHeaderSize = 4 + 1 + 8 + 8 + 4;
constexpr std::size_t kRecordSize = 1 + 8;

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(std::string_view bytes, std::size_t offset) {
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  return static_cast<T>(value);
}

// Calls visit(channel, tick) over all tags in (tick, channel) order.
template <typename Visit>
void for_each_in_time_order(const TimeTagSet& tags, Visit visit) {
  using Cursor = std::tuple<std::uint64_t, int, std::size_t>;  // tick, channel, index
  std::priority_queue<Cursor, std::vector<Cursor>, std::greater<>> heap;
  for (const auto& [ch, list] : tags.channels) {
    if (!list.empty()) heap.emplace(list[0], ch, 0);
  }
  while (!heap.empty()) {
    auto [tick, ch, idx] = heap.top();
    heap.pop();
    visit(ch, tick);
    const auto& list = tags.channels.at(ch);
    if (idx + 1 < list.size()) heap.emplace(list[idx + 1], ch, idx + 1);
  }
}

void check_channels(const TimeTagSet& tags) {
  int expected = 0;
  for (const auto& [ch, list] : tags.channels) {
    if (ch != expected++ || ch > 255) {
      throw InputError("tag sets must use contiguous channel ids 0..n-1 (at most 256)");
    }
  }
}

std::string_view next_line(std::string_view& text) {
  const auto nl = text.find('\n');
  auto line = text.substr(0, nl);
  text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

std::string encode_ptag(const TimeTagSet& tags) {
  check_channels(tags);
  std::string out;
  out.reserve(kHeaderSize + kRecordSize * tags.total_tags());
  out.append(kMagic, sizeof(kMagic));
  put_le<std::uint8_t>(out, kVersion);
  put_le<std::uint64_t>(out, tags.resolution_ps);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(std::llround(tags.duration * 1e12)));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tags.channels.size()));
  for_each_in_time_order(tags, [&](int ch, std::uint64_t tick) {
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(ch));
    put_le<std::uint64_t>(out, tick);
  });
  return out;
}

TimeTagSet decode_ptag(std::string_view bytes) {
  if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw IoError("not a PTAG file");
  }
  if (get_le<std::uint8_t>(bytes, 4) != kVersion) throw IoError("unsupported PTAG version");
  if ((bytes.size() - kHeaderSize) % kRecordSize != 0) throw IoError("truncated PTAG record");

  TimeTagSet tags;
  tags.resolution_ps = get_le<std::uint64_t>(bytes, 5);
  if (tags.resolution_ps == 0) throw IoError("PTAG resolution must be >= 1 ps");
  tags.duration = static_cast<double>(get_le<std::uint64_t>(bytes, 13)) * 1e-12;
  const auto n_channels = get_le<std::uint32_t>(bytes, 21);
  if (n_channels > 256) throw IoError("PTAG channel count exceeds 256");
  for (std::uint32_t ch = 0; ch < n_channels; ++ch) tags.channels[static_cast<int>(ch)];

  for (std::size_t off = kHeaderSize; off < bytes.size(); off += kRecordSize) {
    const int ch = get_le<std::uint8_t>(bytes, off);
    const auto tick = get_le<std::uint64_t>(bytes, off + 1);
    if (static_cast<std::uint32_t>(ch) >= n_channels) throw IoError("PTAG record references undeclared channel");
    auto& list = tags.channels[ch];
    if (!list.empty() && tick <= list.back()) throw IoError("PTAG channel timestamps not strictly increasing");
    list.push_back(tick);
  }
  return tags;
}

std::string encode_tags_csv(const TimeTagSet& tags) {
  check_channels(tags);
  std::string out = "channel,time_ps\n";
  for_each_in_time_order(tags, [&](int ch, std::uint64_t tick) {
    out += std::to_string(ch);
    out += ',';
    out += std::to_string(tick * tags.resolution_ps);
    out += '\n';
  });
  return out;
}

TimeTagSet decode_tags_csv(std::string_view text, std::optional<double> duration) {
  if (next_line(text) != "channel,time_ps") throw IoError("tag CSV must start with 'channel,time_ps'");
  TimeTagSet tags;
  tags.resolution_ps = 1;
  std::uint64_t last = 0;
  std::size_t line_no = 1;
  while (!text.empty()) {
    auto line = next_line(text);
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    int ch = 0;
    std::uint64_t ps = 0;
    const auto* lb = line.data();
    const auto* le = line.data() + line.size();
    bool ok = comma != std::string_view::npos;
    if (ok) {
      auto r1 = std::from_chars(lb, lb + comma, ch);
      auto r2 = std::from_chars(lb + comma + 1, le, ps);
      ok = r1.ec == std::errc() && r1.ptr == lb + comma && r2.ec == std::errc() && r2.ptr == le && ch >= 0 &&
           ch < 256;
    }
    if (!ok) throw IoError("tag CSV line " + std::to_string(line_no) + " is malformed");
    auto& list = tags.channels[ch];
    if (!list.empty() && ps <= list.back()) {
      throw IoError("tag CSV line " + std::to_string(line_no) + ": channel timestamps not strictly increasing");
    }
    list.push_back(ps);
    last = std::max(last, ps);
  }
  if (!tags.channels.empty()) {
    for (int ch = 0; ch < tags.channels.rbegin()->first; ++ch) tags.channels[ch];
  }
  tags.duration = duration ? *duration : static_cast<double>(last + 1) * 1e-12;
  return tags;
}

void write_tags(const TimeTagSet& tags, const std::filesystem::path& path, TagFormat format) {
  write_file_atomic(path, format == TagFormat::ptag ? encode_ptag(tags) : encode_tags_csv(tags));
}

TimeTagSet read_tags(const std::filesystem::path& path, std::optional<double> duration) {
  const auto bytes = read_file(path);
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) == 0) {
    auto tags = decode_ptag(bytes);
    if (duration) tags.duration = *duration;
    return tags;
  }
  return decode_tags_csv(bytes, duration);
}

std::string encode_truth_csv(std::span<const PhotonRecord> photons) {
  std::string out = "time_s,freq_hz,source,branch\n";
  out.reserve(out.size() + photons.size() * 48);
  for (const auto& p : photons) {
    out += format_double(p.emit_time);
    out += ',';
    out += format_double(p.frequency);
    out += ',';
    out += std::to_string(p.source_id);
    out += p.branch == Branch::zpl ? ",zpl\n" : ",vibronic\n";
  }
  return out;
}

void write_truth_csv(std::span<const PhotonRecord> photons, const std::filesystem::path& path) {
  write_file_atomic(path, encode_truth_csv(photons));
}

}  // namespace molsps
