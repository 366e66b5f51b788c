#include "tiedml/parallel.hpp"

#include <atomic>

namespace tiedml {

namespace {
std::atomic<unsigned> g_thread_cap{0};
}  // namespace

void set_thread_cap(unsigned threads) { g_thread_cap.store(threads); }

unsigned thread_cap() {
  const unsigned cap = g_thread_cap.load();
  if (cap != 0) return cap;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace tiedml
