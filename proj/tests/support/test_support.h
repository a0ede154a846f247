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

#ifndef IMBLENS_TESTS_SUPPORT_TEST_SUPPORT_H_
#define IMBLENS_TESTS_SUPPORT_TEST_SUPPORT_H_

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "imblens/embx.h"
#include "imblens/matrix.h"

namespace imblens::testing {

// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("imblens_test_" + std::to_string(rd()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline std::vector<char> ReadBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline EmbeddingSet MakeSet(std::size_t rows, std::size_t cols,
                            std::vector<float> fe,
                            std::vector<std::int64_t> labels,
                            std::size_t num_classes) {
  EmbeddingSet set;
  set.fe = MatrixF(rows, cols, std::move(fe));
  set.labels = std::move(labels);
  set.num_classes = num_classes;
  return set;
}

inline ClassifierHead MakeHead(std::size_t rows, std::size_t cols,
                               std::vector<float> weights,
                               std::vector<float> bias = {}) {
  ClassifierHead head;
  head.weights = MatrixF(rows, cols, std::move(weights));
  if (!bias.empty()) head.bias = std::move(bias);
  return head;
}

struct RandomProblem {
  EmbeddingSet set;
  ClassifierHead head;
};

struct RandomShape {
  std::size_t n = 10;
  std::size_t h = 4;
  std::size_t c = 3;
  bool bias = false;
  float fe_max = 4.0f;
  float weight_max = 1.0f;
};

// fe uniform in [0, fe_max), weights uniform in (-weight_max, weight_max),
// labels uniform over classes.
inline RandomProblem MakeRandomProblem(std::mt19937_64& rng,
                                       const RandomShape& shape) {
  std::uniform_real_distribution<float> fe_dist(0.0f, shape.fe_max);
  std::uniform_real_distribution<float> w_dist(-shape.weight_max, shape.weight_max);
  std::uniform_int_distribution<std::int64_t> label_dist(
      0, static_cast<std::int64_t>(shape.c) - 1);

  RandomProblem p;
  p.set.fe = MatrixF(shape.n, shape.h);
  for (float& v : p.set.fe.values()) v = fe_dist(rng);
  p.set.labels.resize(shape.n);
  for (auto& l : p.set.labels) l = label_dist(rng);
  p.set.num_classes = shape.c;
  p.head.weights = MatrixF(shape.c, shape.h);
  for (float& v : p.head.weights.values()) v = w_dist(rng);
  if (shape.bias) {
    p.head.bias = std::vector<float>(shape.c);
    for (float& v : *p.head.bias) v = w_dist(rng);
  }
  return p;
}

inline std::size_t RandomIn(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// The toy decomposition used throughout the unit tests: one instance,
// fe = [2, 1, 0], weights [[1, 0, 2], [0, 1, 1]].
inline EmbeddingSet ToySet() { return MakeSet(1, 3, {2, 1, 0}, {0}, 2); }
inline ClassifierHead ToyHead() { return MakeHead(2, 3, {1, 0, 2, 0, 1, 1}); }

}  // namespace imblens::testing

#endif  // IMBLENS_TESTS_SUPPORT_TEST_SUPPORT_H_
