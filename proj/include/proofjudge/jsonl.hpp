#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace proofjudge {

/// Parses a JSON Lines file, calling `on_object(line_number, obj)` for each
/// non-empty line. Line numbers are 1-based. Throws DataError on unreadable
/// files or malformed lines, naming the offending line.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(std::size_t, const nlohmann::json&)>& on_object);

/// Writes one compact JSON object per line. Parent directories must exist.
void write_jsonl(const std::filesystem::path& path,
                 const std::vector<nlohmann::json>& objects);

/// Reads a whole file into a string. Throws DataError if unreadable.
std::string read_file(const std::filesystem::path& path);

/// Writes `content` to `path` atomically (temp file + rename).
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace proofjudge
