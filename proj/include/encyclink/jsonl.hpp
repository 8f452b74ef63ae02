#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace encyclink {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

std::vector<Json> read_jsonl(const std::filesystem::path& path);
void for_each_jsonl(const std::filesystem::path& path, const std::function<void(const Json&)>& fn);

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
void write_jsonl_atomic(const std::filesystem::path& path, const std::vector<OrderedJson>& records);

std::string read_file(const std::filesystem::path& path);

}  // namespace encyclink
