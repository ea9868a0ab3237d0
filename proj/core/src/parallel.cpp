#include "schonmann/parallel.hpp"

#include <cstdlib>
#include <string>

namespace schonmann {

unsigned default_worker_count() {
  if (const char* env = std::getenv("SCHONMANN_LAB_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (...) {
      // fall through to hardware default
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

}  // namespace schonmann
