#include "dctnet/tensor/kernels.hpp"

#include <atomic>

namespace dctnet::kernels {

namespace {
std::atomic<Backend> g_backend{Backend::Parallel};
std::atomic<uint64_t> g_macs{0};
}  // namespace

bool make_conv_geometry(ConvGeometry& g) {
  if (g.stride < 1 || g.pad < 0 || g.kh < 1 || g.kw < 1) return false;
  const int hspan = g.h + 2 * g.pad - g.kh;
  const int wspan = g.w + 2 * g.pad - g.kw;
  if (hspan < 0 || wspan < 0) return false;
  g.ho = hspan / g.stride + 1;
  g.wo = wspan / g.stride + 1;
  return true;
}

Backend backend() { return g_backend.load(std::memory_order_relaxed); }
void set_backend(Backend b) { g_backend.store(b, std::memory_order_relaxed); }

BackendGuard::BackendGuard(Backend b) : previous_(backend()) { set_backend(b); }
BackendGuard::~BackendGuard() { set_backend(previous_); }

uint64_t mac_tally() { return g_macs.load(std::memory_order_relaxed); }
void reset_mac_tally() { g_macs.store(0, std::memory_order_relaxed); }
void add_macs(uint64_t n) { g_macs.fetch_add(n, std::memory_order_relaxed); }

}  // namespace dctnet::kernels
