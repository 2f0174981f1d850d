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
 *****************************************************************************/

#include "sigdisc/parallel.hpp"
#include "sigdisc/error.hpp"

#include <omp.h>

namespace sigdisc {

namespace {
const int kDefaultThreads = omp_get_max_threads();
}

void set_thread_count(int n)
{
    omp_set_num_threads(n < 1 ? kDefaultThreads : n);
}

int thread_count()
{
    return omp_get_max_threads();
}

const char* to_string(ErrorCategory c)
{
    switch (c) {
    case ErrorCategory::Parse: return "parse";
    case ErrorCategory::Validation: return "validation";
    case ErrorCategory::Format: return "format";
    case ErrorCategory::MissingInput: return "missing_input";
    case ErrorCategory::Config: return "config";
    case ErrorCategory::Numeric: return "numeric";
    }
    return "unknown";
}

}  // namespace sigdisc
