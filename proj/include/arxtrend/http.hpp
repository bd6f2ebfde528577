#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <utility>

#include "arxtrend/error.hpp"

namespace arxtrend::http {

using Headers = std::multimap<std::string, std::string>;

struct Response {
  int status = 0;
  std::string body;
};

// Connection-level failure (no HTTP status received).
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Minimal GET-only client interface. Implementations must be safe to call
/// from several threads at once.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual Response get(const std::string& url, const Headers& headers) = 0;
};

/// Time source used by the rate limiter and retry backoff, so tests can run
/// on virtual time.
class Clock {
 public:
  using duration = std::chrono::nanoseconds;
  using time_point = std::chrono::time_point<std::chrono::steady_clock, duration>;

  virtual ~Clock() = default;
  virtual time_point now() = 0;
  virtual void sleep_for(duration d) = 0;
};

class SteadyClock final : public Clock {
 public:
  time_point now() override { return std::chrono::steady_clock::now(); }
  void sleep_for(duration d) override {
    if (d > duration::zero()) std::this_thread::sleep_for(d);
  }
};

/// Virtual clock: sleeping advances time instantly.
class ManualClock final : public Clock {
 public:
  time_point now() override {
    std::lock_guard lock(mu_);
    return now_;
  }
  void sleep_for(duration d) override {
    std::lock_guard lock(mu_);
    if (d > duration::zero()) now_ += d;
  }
  void advance(duration d) { sleep_for(d); }

 private:
  std::mutex mu_;
  time_point now_{};
};

/// Spaces requests at least 1/rate apart. Any half-open one-second interval
/// therefore contains at most ceil(rate) requests.
class RateLimiter {
 public:
  RateLimiter(double requests_per_second, Clock& clock)
      : interval_(std::chrono::duration_cast<Clock::duration>(
            std::chrono::duration<double>(1.0 / requests_per_second))),
        clock_(clock) {
    if (!(requests_per_second > 0) || !std::isfinite(requests_per_second)) {
      throw UserError("rate must be a positive number of requests per second");
    }
  }

  void acquire() {
    Clock::time_point slot;
    {
      std::lock_guard lock(mu_);
      auto now = clock_.now();
      slot = started_ ? std::max(now, next_) : now;
      started_ = true;
      next_ = slot + interval_;
    }
    auto wait = slot - clock_.now();
    if (wait > Clock::duration::zero()) clock_.sleep_for(wait);
  }

  [[nodiscard]] Clock::duration interval() const { return interval_; }

 private:
  Clock::duration interval_;
  Clock& clock_;
  std::mutex mu_;
  bool started_ = false;
  Clock::time_point next_{};
};

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds base_delay{1000};
};

inline bool is_retryable_status(int status) { return status == 429 || status >= 500; }

/// GET with exponential backoff plus jitter. Connection failures and
/// retryable statuses are retried; after max_retries the last failure is
/// raised as EnvironmentError. Non-retryable statuses are returned.
inline Response get_with_retry(Transport& transport, RateLimiter& limiter, Clock& clock,
                               const RetryPolicy& policy, const std::string& url,
                               const Headers& headers = {}) {
  thread_local std::mt19937_64 jitter_rng{std::random_device{}()};
  std::string last_error;
  for (int attempt = 0; attempt <= policy.max_retries; ++attempt) {
    if (attempt > 0) {
      auto base = std::chrono::duration_cast<Clock::duration>(policy.base_delay) * (1LL << std::min(attempt - 1, 20));
      std::uniform_int_distribution<long long> jitter(
          0, std::chrono::duration_cast<Clock::duration>(policy.base_delay).count());
      clock.sleep_for(base + Clock::duration(jitter(jitter_rng)));
    }
    limiter.acquire();
    try {
      Response r = transport.get(url, headers);
      if (!is_retryable_status(r.status)) return r;
      last_error = "HTTP " + std::to_string(r.status);
    } catch (const TransportError& e) {
      last_error = e.what();
    }
  }
  throw EnvironmentError("request to " + url + " failed after " +
                         std::to_string(policy.max_retries + 1) + " attempts: " + last_error);
}

}  // namespace arxtrend::http
