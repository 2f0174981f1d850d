/******************************************************************************
 * Copyright 2026 The sigdisc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * 	http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * @file parallel.hpp OpenMP worker control and an exception-safe parallel
 * loop.
 *
 *****************************************************************************/

#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace sigdisc {

/// Caps the OpenMP worker count. n < 1 restores the runtime default.
void set_thread_count(int n);
int thread_count();

/// Runs body(i) for i in [0, n) across OpenMP workers. Iterations must write
/// disjoint outputs. If any iterations throw, the exception from the lowest
/// index is rethrown after the loop, independent of scheduling.
template <typename Body>
void parallel_for(std::size_t n, Body&& body)
{
    std::vector<std::exception_ptr> errors(n);
    const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace sigdisc
