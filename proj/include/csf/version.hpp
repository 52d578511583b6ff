#pragma once

namespace csf {

const char* version_string();

}  // namespace csf
