#include "eva/parallel.hpp"

#include <cstdlib>
#include <string>

namespace eva {

unsigned default_workers() {
  if (const char* env = std::getenv("EVA_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

}  // namespace eva
