// Copyright 2026 The cvdistill Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CVDISTILL_SRC_PARALLEL_H
#define CVDISTILL_SRC_PARALLEL_H

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace cvdistill::internal {

/// Splits [0, n) into `workers` contiguous chunks and calls body(worker, begin, end)
/// for each, on its own thread when workers > 1. Rethrows the first exception.
template <typename Body>
void parallel_chunks(uint64_t n, int workers, Body &&body) {
    const uint64_t w = static_cast<uint64_t>(std::max(1, workers));
    const uint64_t used = std::min<uint64_t>(w, std::max<uint64_t>(n, 1));
    if (used <= 1) {
        body(0, uint64_t{0}, n);
        return;
    }
    std::vector<std::exception_ptr> errors(used);
    std::vector<std::thread> threads;
    threads.reserve(used);
    for (uint64_t k = 0; k < used; k++) {
        const uint64_t begin = n * k / used;
        const uint64_t end = n * (k + 1) / used;
        threads.emplace_back([&, k, begin, end] {
            try {
                body(static_cast<int>(k), begin, end);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        });
    }
    for (auto &t : threads) {
        t.join();
    }
    for (auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

}  // namespace cvdistill::internal

#endif
