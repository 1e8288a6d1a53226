#pragma once

// Time-tag and truth-record files.
//
// PTAG binary, all integers little-endian:
//   "PTAG" | u8 version (1) | u64 resolution_ps | u64 duration_ps |
//   u32 channel count | records...
// each record is u8 channel | u64 timestamp (resolution units), in global
// time order with ties broken by channel. Channel ids run 0..count-1.
//
// CSV: header "channel,time_ps", one tag per line, time in picoseconds.

#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include "molsps/kmc.hpp"

namespace molsps {

enum class TagFormat { ptag, csv };

std::string encode_ptag(const TimeTagSet& tags);
TimeTagSet decode_ptag(std::string_view bytes);

std::string encode_tags_csv(const TimeTagSet& tags);
/// CSV carries neither resolution nor duration: tags are read at 1 ps and the
/// duration defaults to one tick past the last tag unless given.
TimeTagSet decode_tags_csv(std::string_view text, std::optional<double> duration = std::nullopt);

void write_tags(const TimeTagSet& tags, const std::filesystem::path& path, TagFormat format);
/// Detects the format from the leading magic.
TimeTagSet read_tags(const std::filesystem::path& path, std::optional<double> duration = std::nullopt);

/// Truth dump "time_s,freq_hz,source,branch".
std::string encode_truth_csv(std::span<const PhotonRecord> photons);
void write_truth_csv(std::span<const PhotonRecord> photons, const std::filesystem::path& path);

}  // namespace molsps
