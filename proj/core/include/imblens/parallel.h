// Copyright 2026 The imblens Authors
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

#ifndef IMBLENS_PARALLEL_H_
#define IMBLENS_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace imblens {

// Caps the number of worker threads used by library operations. A value of
// 0 restores the default (hardware concurrency).
void SetMaxThreads(std::size_t threads);
std::size_t MaxThreads();

// Runs body(begin, end) over [0, count) split into fixed-size blocks. Block
// boundaries depend only on count and block_size, never on the thread count,
// so callers that write per-block partial results and reduce them in block
// order get identical output under any schedule.
void ParallelForBlocks(
    std::size_t count, std::size_t block_size,
    const std::function<void(std::size_t block, std::size_t begin,
                             std::size_t end)>& body);

inline std::size_t NumBlocks(std::size_t count, std::size_t block_size) {
  return (count + block_size - 1) / block_size;
}

}  // namespace imblens

#endif  // IMBLENS_PARALLEL_H_
