#include "kpent/mc.hpp"

#include <atomic>

namespace kpent {

namespace {
std::atomic<unsigned> g_workers{0};
}

unsigned mc_worker_count() {
  const unsigned w = g_workers.load();
  if (w > 0) return w;
  return std::max(1u, std::thread::hardware_concurrency());
}

void set_mc_workers(unsigned workers) { g_workers.store(workers); }

}  // namespace kpent
