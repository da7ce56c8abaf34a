#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "metalearn/search_space.hpp"

namespace metalearn::detail {

using Json = nlohmann::json;

Json to_json(const HpValue& value);
HpValue hp_from_json(const Json& j);
Json to_json(const Assignment& values);
Assignment assignment_from_json(const Json& j);

// Parses `text` as JSON, mapping parser failures to Error(kParse) with
// `what` in the message.
Json parse_json(const std::string& text, const std::string& what);

std::string read_text(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace metalearn::detail
