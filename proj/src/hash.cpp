#include "grassfeel/hash.hpp"

#include <cstdio>

namespace grassfeel {

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace grassfeel
