#include "json_util.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "metalearn/error.hpp"

namespace metalearn::detail {

Json to_json(const HpValue& value) {
  return std::visit([](const auto& v) { return Json(v); }, value);
}

HpValue hp_from_json(const Json& j) {
  if (j.is_number_integer()) return HpValue{j.get<std::int64_t>()};
  if (j.is_number()) return HpValue{j.get<double>()};
  if (j.is_string()) return HpValue{j.get<std::string>()};
  if (j.is_boolean()) return HpValue{std::string(j.get<bool>() ? "true" : "false")};
  throw Error(ErrorCode::kParse, "hyperparameter value must be a number or string");
}

Json to_json(const Assignment& values) {
  Json out = Json::object();
  for (const auto& [k, v] : values) out[k] = to_json(v);
  return out;
}

Assignment assignment_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "hyperparameters must be an object");
  Assignment out;
  for (const auto& [k, v] : j.items()) out[k] = hp_from_json(v);
  return out;
}

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, what + ": " + e.what());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileNotFound, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot rename onto " + path.string() + ": " + ec.message());
}

}  // namespace metalearn::detail
