#pragma once

#include <string_view>

namespace metalearn {

std::string_view engine_version();

}  // namespace metalearn
