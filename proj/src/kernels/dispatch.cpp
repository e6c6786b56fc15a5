#include "corrnoise/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace corrnoise::kernels {

#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops();  // kernels_avx2.cpp
#endif
#if defined(__aarch64__)
const Ops& neon_ops();  // kernels_neon.cpp
#endif

namespace {

struct Backend {
  const Ops* ops;
  const char* name;
};

Backend pick_auto() {
#if defined(__x86_64__) || defined(_M_X64)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return {&avx2_ops(), "avx2"};
  }
#endif
#if defined(__aarch64__)
  return {&neon_ops(), "neon"};
#endif
  return {&scalar_ops(), "scalar"};
}

Backend pick_named(const char* name) {
  if (std::strcmp(name, "scalar") == 0) return {&scalar_ops(), "scalar"};
#if defined(__x86_64__) || defined(_M_X64)
  if (std::strcmp(name, "avx2") == 0 && __builtin_cpu_supports("avx2") &&
      __builtin_cpu_supports("fma")) {
    return {&avx2_ops(), "avx2"};
  }
#endif
#if defined(__aarch64__)
  if (std::strcmp(name, "neon") == 0) return {&neon_ops(), "neon"};
#endif
  if (std::strcmp(name, "auto") == 0) return pick_auto();
  return {nullptr, nullptr};
}

Backend initial_backend() {
  if (const char* env = std::getenv("CORRNOISE_SIMD")) {
    const Backend b = pick_named(env);
    if (b.ops != nullptr) return b;
  }
  return pick_auto();
}

std::atomic<const Ops*> g_ops{nullptr};
std::atomic<const char*> g_name{nullptr};

void ensure_init() {
  if (g_ops.load(std::memory_order_acquire) == nullptr) {
    const Backend b = initial_backend();
    g_ops.store(b.ops, std::memory_order_release);
    g_name.store(b.name, std::memory_order_release);
  }
}

}  // namespace

const Ops& ops() {
  ensure_init();
  return *g_ops.load(std::memory_order_acquire);
}

const char* backend_name() {
  ensure_init();
  return g_name.load(std::memory_order_acquire);
}

bool force_backend(const char* name) {
  const Backend b = pick_named(name);
  if (b.ops == nullptr) return false;
  g_ops.store(b.ops, std::memory_order_release);
  g_name.store(b.name, std::memory_order_release);
  return true;
}

}  // namespace corrnoise::kernels
