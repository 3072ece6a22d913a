// Copyright 2026 The iscsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ISCSIM_PARALLEL_HPP
#define ISCSIM_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace iscsim {

/// Default worker count: hardware concurrency, at least 1.
inline unsigned default_threads() noexcept { return std::max(1U, std::thread::hardware_concurrency()); }

/**
 * Runs body(t, acc) for t = 0..trials-1 and merges the accumulators.
 *
 * Trials are cut into fixed chunks that do not depend on the thread count,
 * each chunk gets a fresh accumulator, and chunks are merged in index order,
 * so the result is bit-identical for every `threads` value.
 */
template <class Acc, class Body>
Acc parallel_trials(std::uint64_t trials, unsigned threads, Body&& body, std::uint64_t chunk = 64) {
  if (trials == 0) return Acc{};
  chunk = std::max<std::uint64_t>(chunk, 1);
  const std::uint64_t n_chunks = (trials + chunk - 1) / chunk;
  std::vector<Acc> partial(n_chunks);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::uint64_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      try {
        const std::uint64_t end = std::min(trials, (c + 1) * chunk);
        for (std::uint64_t t = c * chunk; t < end; ++t) body(t, partial[c]);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_chunks);
        return;
      }
    }
  };

  threads = std::max(1U, threads);
  if (threads == 1 || n_chunks == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    const auto n = static_cast<unsigned>(std::min<std::uint64_t>(threads, n_chunks));
    pool.reserve(n);
    for (unsigned w = 0; w < n; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  Acc total = std::move(partial[0]);
  for (std::uint64_t c = 1; c < n_chunks; ++c) total.merge(partial[c]);
  return total;
}

}  // namespace iscsim

#endif  // ISCSIM_PARALLEL_HPP
