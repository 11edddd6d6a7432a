/* Copyright 2026 The CAPad Authors. All Rights Reserved.

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
#include "capad/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace capad {
namespace {

std::atomic<int>& ThreadSetting() {
  static std::atomic<int> threads{
      std::max(1, static_cast<int>(std::thread::hardware_concurrency()))};
  return threads;
}

thread_local bool in_worker = false;

}  // namespace

void SetThreadCount(int threads) { ThreadSetting() = std::max(1, threads); }

int ThreadCount() { return ThreadSetting().load(); }

void ParallelFor(int n, const std::function<void(int)>& fn) {
  const int workers = std::min(n, ThreadCount());
  if (workers <= 1 || in_worker) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&](int begin, int end) {
    in_worker = true;
    try {
      for (int i = begin; i < end; ++i) fn(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
    in_worker = false;
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  const int chunk = (n + workers - 1) / workers;
  for (int w = 1; w < workers; ++w) {
    const int begin = w * chunk, end = std::min(n, begin + chunk);
    if (begin < end) pool.emplace_back(run, begin, end);
  }
  run(0, std::min(n, chunk));
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace capad
