#include "metalearn/version.hpp"

namespace metalearn {

std::string_view engine_version() { return METALEARN_VERSION; }

}  // namespace metalearn
