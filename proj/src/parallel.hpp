// Copyright 2026 The heraldsim Authors
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

#ifndef HERALDSIM_SRC_PARALLEL_HPP
#define HERALDSIM_SRC_PARALLEL_HPP

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace heraldsim::detail {

/// Splits [0, count) into contiguous chunks, runs `work(begin, end)` per chunk
/// and returns the per-chunk results in chunk order.
template <typename Result, typename Work>
std::vector<Result> parallel_chunks(std::uint64_t count, int threads, Work work) {
    const std::uint64_t workers =
        std::max<std::uint64_t>(1, std::min<std::uint64_t>(threads < 1 ? 1 : threads, count));
    std::vector<Result> results(workers);
    if (workers == 1) {
        results[0] = work(std::uint64_t{0}, count);
        return results;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::uint64_t w = 0; w < workers; ++w) {
        const std::uint64_t begin = count * w / workers;
        const std::uint64_t end = count * (w + 1) / workers;
        pool.emplace_back([&, w, begin, end] {
            try {
                results[w] = work(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto &t : pool) t.join();
    for (auto &e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

}  // namespace heraldsim::detail

#endif  // HERALDSIM_SRC_PARALLEL_HPP
