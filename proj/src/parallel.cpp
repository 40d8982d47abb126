#include "heavytail/parallel.hpp"

#include <cstdlib>
#include <string>

namespace heavytail {

int resolve_threads(int requested) {
  int threads = requested > 0 ? requested
                              : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  if (const char* cap = std::getenv("HEAVYTAIL_THREADS")) {
    try {
      int limit = std::stoi(cap);
      if (limit >= 1 && limit < threads) threads = limit;
    } catch (...) {
      // unparseable cap is ignored
    }
  }
  return threads;
}

}  // namespace heavytail
