#pragma once

#include <cstddef>
#include <limits>
#include <new>

namespace bsvd::memory {

/// Dense-storage accounting for the calling thread. Every DenseMatrix buffer
/// goes through TrackingAllocator, so these numbers cover all dense working
/// memory a run creates on its own thread.
struct Stats {
  std::size_t live_bytes = 0;
  std::size_t peak_bytes = 0;
  std::size_t largest_allocation = 0;
};

Stats stats();

/// Restarts peak and largest-allocation tracking from the current live size.
void reset_peak();

/// While alive, dense allocations that would push live bytes above `limit`
/// throw MemoryBudgetError. Scopes nest; the innermost limit wins.
class BudgetScope {
 public:
  explicit BudgetScope(std::size_t limit_bytes);
  ~BudgetScope();
  BudgetScope(const BudgetScope&) = delete;
  BudgetScope& operator=(const BudgetScope&) = delete;

 private:
  std::size_t previous_;
};

constexpr std::size_t kUnlimited = std::numeric_limits<std::size_t>::max();

std::size_t active_limit();

namespace detail {
void on_allocate(std::size_t bytes);
void on_deallocate(std::size_t bytes);
}  // namespace detail

template <class T>
struct TrackingAllocator {
  using value_type = T;

  TrackingAllocator() noexcept = default;
  template <class U>
  TrackingAllocator(const TrackingAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    detail::on_allocate(n * sizeof(T));
    return static_cast<T*>(::operator new(n * sizeof(T)));
  }
  void deallocate(T* p, std::size_t n) noexcept {
    ::operator delete(p);
    detail::on_deallocate(n * sizeof(T));
  }

  template <class U>
  bool operator==(const TrackingAllocator<U>&) const noexcept { return true; }
};

}  // namespace bsvd::memory
