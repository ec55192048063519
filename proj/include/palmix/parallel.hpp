// Copyright 2026 palmix developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "palmix/rng.hpp"

namespace palmix {

// Evaluates fn(stream_i, i) for i in [0, n) and returns the results in index
// order. Replicate i always uses base.substream(i) and writes into slot i of
// a preallocated vector, so the output is bitwise identical for every thread
// count. Threads own contiguous index ranges; the first exception thrown by
// any replicate is rethrown on the caller's thread.
template <typename T, typename Fn>
std::vector<T> replicate_map(std::size_t n, unsigned threads, const RngStream& base, Fn&& fn) {
  std::vector<std::optional<T>> slots(n);
  if (threads < 1) threads = 1;
  if (n > 0 && threads > n) threads = static_cast<unsigned>(n);

  auto run_range = [&](std::size_t begin, std::size_t end, std::exception_ptr& error) {
    try {
      for (std::size_t i = begin; i < end; ++i) {
        RngStream stream = base.substream(i);
        slots[i].emplace(fn(stream, i));
      }
    } catch (...) {
      error = std::current_exception();
    }
  };

  if (threads == 1) {
    std::exception_ptr error;
    run_range(0, n, error);
    if (error) std::rethrow_exception(error);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = static_cast<std::size_t>(t) * chunk;
      const std::size_t end = begin + chunk < n ? begin + chunk : n;
      if (begin >= end) break;
      pool.emplace_back(run_range, begin, end, std::ref(errors[t]));
    }
    for (auto& worker : pool) worker.join();
    for (auto& error : errors) {
      if (error) std::rethrow_exception(error);
    }
  }

  std::vector<T> out;
  out.reserve(n);
  for (auto& slot : slots) out.push_back(std::move(*slot));
  return out;
}

}  // namespace palmix
