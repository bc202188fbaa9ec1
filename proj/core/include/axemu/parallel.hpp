/* Copyright 2026 The axemu Authors. All Rights Reserved.

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

#ifndef AXEMU_PARALLEL_HPP_
#define AXEMU_PARALLEL_HPP_

#include <cstdint>
#include <functional>

namespace axemu {

/// Worker count from AXEMU_WORKERS, falling back to hardware concurrency.
int default_workers();

/// Runs body(i) for every i in [0, count) on up to `workers` threads.
/// Tasks are claimed dynamically; callers must not depend on execution order.
/// The first exception thrown by any task is rethrown after all workers join.
void parallel_for(std::int64_t count, int workers, const std::function<void(std::int64_t)>& body);

}  // namespace axemu

#endif  // AXEMU_PARALLEL_HPP_
