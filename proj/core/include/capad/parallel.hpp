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
#ifndef CAPAD_PARALLEL_HPP_
#define CAPAD_PARALLEL_HPP_

#include <functional>

namespace capad {

// Upper bound on worker threads used by ParallelFor.  Defaults to the number
// of hardware threads; values < 1 are treated as 1.
void SetThreadCount(int threads);
int ThreadCount();

// Calls fn(i) for i in [0, n), splitting the range into contiguous chunks
// across threads.  Each index is processed exactly once, so callers writing
// disjoint outputs get results independent of the thread count.  Nested calls
// from a worker run serially.
void ParallelFor(int n, const std::function<void(int)>& fn);

}  // namespace capad

#endif  // CAPAD_PARALLEL_HPP_
