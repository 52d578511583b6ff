#include "csf/version.hpp"

namespace csf {

const char* version_string() { return "csfusion 0.1.0"; }

}  // namespace csf
