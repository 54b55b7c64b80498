/* Copyright 2026 The Squiggles Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef SQUIGGLES_PARALLEL_H_
#define SQUIGGLES_PARALLEL_H_

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace squiggles {

// Number of workers to use when the caller passes 0.
inline int DefaultWorkers() {
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(i) for i in [begin, end) on `workers` threads, each taking a
// contiguous block. Results must not depend on the split; the first
// exception thrown by any worker is rethrown.
template <typename Fn>
void ParallelFor(size_t begin, size_t end, int workers, Fn&& fn) {
  if (end <= begin) return;
  if (workers <= 0) workers = DefaultWorkers();
  const size_t count = end - begin;
  const size_t used = std::min<size_t>(workers, count);
  if (used <= 1) {
    for (size_t i = begin; i < end; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> threads;
  threads.reserve(used);
  for (size_t w = 0; w < used; ++w) {
    const size_t lo = begin + count * w / used;
    const size_t hi = begin + count * (w + 1) / used;
    threads.emplace_back([&, lo, hi] {
      try {
        for (size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  threads.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace squiggles

#endif  // SQUIGGLES_PARALLEL_H_
