#pragma once

// Shared small utilities: 2d vectors, compensated summation, hashing,
// deterministic RNG helpers and a minimal work-sharing parallel loop.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <string_view>
#include <thread>
#include <vector>

namespace fracluster {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

inline double sq(double v) { return v * v; }

struct Vec2 {
  double x = 0.0, y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double t, Vec2 a) { return {t * a.x, t * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm2(Vec2 a) { return dot(a, a); }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

// Neumaier variant of Kahan summation. Safe for terms of mixed magnitude.
struct NeumaierSum {
  double s = 0.0;
  double c = 0.0;

  void add(double v) {
    double t = s + v;
    if (std::abs(s) >= std::abs(v))
      c += (s - t) + v;
    else
      c += (v - t) + s;
    s = t;
  }

  double value() const { return s + c; }
};

// FNV-1a, used for cache keys. Only bit patterns matter, not locale or
// formatting, so keys are stable across runs.
struct Hash64 {
  std::uint64_t h = 1469598103934665603ull;

  void bytes(const void* p, std::size_t n) {
    const unsigned char* b = static_cast<const unsigned char*>(p);
    while (n--) {
      h ^= *b++;
      h *= 1099511628211ull;
    }
  }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void i32(std::int32_t v) { u64(static_cast<std::uint64_t>(static_cast<std::int64_t>(v))); }
  void f64(double v) {
    std::uint64_t b = 0;
    std::memcpy(&b, &v, sizeof b);
    u64(b);
  }
  void str(std::string_view s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
};

// mt19937_64 is fully specified by the standard, but std::shuffle and the
// distributions are not; everything that must be reproducible across
// platforms goes through the helpers below.
struct Rng {
  std::mt19937_64 eng;

  explicit Rng(std::uint64_t seed) : eng(seed) {}

  std::uint64_t next() { return eng(); }

  // n must be > 0. Modulo bias is ~n/2^64, irrelevant here.
  std::uint64_t below(std::uint64_t n) { return eng() % n; }

  // uniform in [0, 1)
  double unit() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }
};

// Runs fn(i) for i in [0, n) on a small thread pool. Iterations must be
// independent; each index is executed exactly once.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned thread_count = 0) {
  unsigned t = thread_count ? thread_count : std::max(1u, std::thread::hardware_concurrency());
  if (t <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  t = static_cast<unsigned>(std::min<std::size_t>(t, n));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (unsigned w = 0; w < t; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1, std::memory_order_relaxed)) < n;) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace fracluster
