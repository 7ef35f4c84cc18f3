#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "objmark/attacks.hpp"
#include "objmark/moments.hpp"
#include "objmark/raster.hpp"
#include "objmark/ssync.hpp"

namespace objmark {

// nlohmann::json hooks (found by ADL).
void to_json(nlohmann::json& j, const Point& p);
void from_json(const nlohmann::json& j, Point& p);
void to_json(nlohmann::json& j, const SimilarityTransform& t);
void from_json(const nlohmann::json& j, SimilarityTransform& t);
void to_json(nlohmann::json& j, const SquareRect& r);
void from_json(const nlohmann::json& j, SquareRect& r);
void to_json(nlohmann::json& j, const SyncRecord& r);
void from_json(const nlohmann::json& j, SyncRecord& r);
void to_json(nlohmann::json& j, const AttackSpec& a);
void from_json(const nlohmann::json& j, AttackSpec& a);
void to_json(nlohmann::json& j, const AttackRanges& r);
void from_json(const nlohmann::json& j, AttackRanges& r);

/// Accepts "0x1f", "1f" or a JSON number; the text form is hexadecimal.
std::uint64_t parse_key(const std::string& text);
std::uint64_t parse_key(const nlohmann::json& j);
std::string format_key(std::uint64_t key);

/// Reads and parses a JSON file; errors map to Errc::io / invalid_argument.
nlohmann::json read_json_file(const std::string& path);

}  // namespace objmark
