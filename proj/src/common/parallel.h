/* Copyright 2026 The jamcomp Authors

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

#ifndef JAMCOMP_COMMON_PARALLEL_H_
#define JAMCOMP_COMMON_PARALLEL_H_

#include <functional>

namespace jamcomp {

// Process-wide cap on worker threads (the CLI's --threads flag). 0 means
// hardware concurrency.
void SetMaxThreads(int n);
int MaxThreads();

// Runs fn(i) for i in [0, n) on up to MaxThreads() workers. Tasks must write
// to disjoint outputs; any result that depends on order is assembled by the
// caller afterwards. The first exception thrown by a task is rethrown.
void ParallelFor(int n, const std::function<void(int)>& fn);

}  // namespace jamcomp

#endif  // JAMCOMP_COMMON_PARALLEL_H_
