#include "bsvd/memory.hpp"

#include <algorithm>

#include "bsvd/errors.hpp"

namespace bsvd::memory {
namespace {

thread_local Stats tls_stats;
thread_local std::size_t tls_limit = kUnlimited;

}  // namespace

Stats stats() { return tls_stats; }

void reset_peak() {
  tls_stats.peak_bytes = tls_stats.live_bytes;
  tls_stats.largest_allocation = 0;
}

std::size_t active_limit() { return tls_limit; }

BudgetScope::BudgetScope(std::size_t limit_bytes) : previous_(tls_limit) { tls_limit = limit_bytes; }

BudgetScope::~BudgetScope() { tls_limit = previous_; }

namespace detail {

void on_allocate(std::size_t bytes) {
  if (tls_limit != kUnlimited && tls_stats.live_bytes + bytes > tls_limit) {
    throw MemoryBudgetError("dense allocation", tls_stats.live_bytes + bytes, tls_limit);
  }
  tls_stats.live_bytes += bytes;
  tls_stats.peak_bytes = std::max(tls_stats.peak_bytes, tls_stats.live_bytes);
  tls_stats.largest_allocation = std::max(tls_stats.largest_allocation, bytes);
}

void on_deallocate(std::size_t bytes) {
  // Buffers freed on a different thread than the one that allocated them
  // could underflow the counter; clamp instead.
  tls_stats.live_bytes = bytes > tls_stats.live_bytes ? 0 : tls_stats.live_bytes - bytes;
}

}  // namespace detail
}  // namespace bsvd::memory
