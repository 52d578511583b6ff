#include <cstdio>

#include "csf/version.hpp"

int main() {
  std::puts(csf::version_string());
  return 0;
}
