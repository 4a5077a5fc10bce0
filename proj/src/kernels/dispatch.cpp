#include "blocktau/kernels.hpp"

#include <atomic>

namespace blocktau::kernels {
namespace {

const KernelTable* detect() {
  if (const KernelTable* t = avx2_table()) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{detect()};
  return table;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

Level active_level() {
  return &active() == &scalar_table() ? Level::Scalar : Level::Avx2;
}

bool force_level(Level level) {
  const KernelTable* t =
      level == Level::Scalar ? &scalar_table() : avx2_table();
  if (t == nullptr) return false;
  current().store(t, std::memory_order_release);
  return true;
}

}  // namespace blocktau::kernels
