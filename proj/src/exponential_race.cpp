// Copyright 2026 The iscsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "iscsim/exponential_race.hpp"

#include <queue>
#include <utility>

namespace iscsim {

ProposalPool::ProposalPool(RandomStream stream, std::uint64_t size, std::shared_ptr<const ProbabilityModel> proposal,
                           std::uint64_t bins, BinMode bin_mode)
    : stream_{stream},
      exp_stream_{stream.child(0)},
      sample_stream_{stream.child(1)},
      label_stream_{stream.child(2)},
      size_{size},
      proposal_{std::move(proposal)},
      bins_{bins},
      bin_mode_{bin_mode} {
  if (size_ == 0) throw std::invalid_argument("ProposalPool: size must be positive");
  if (!proposal_) throw std::invalid_argument("ProposalPool: null proposal");
  if (!proposal_->has_sampler()) throw std::invalid_argument("ProposalPool: proposal has no sampler");
  if (bins_ == 0) throw std::invalid_argument("ProposalPool: bin count must be positive");
}

std::uint64_t index_of_rank(const std::function<double(std::uint64_t)>& exponential_at, std::uint64_t size,
                            std::uint64_t k) {
  if (k == 0 || k > size) throw std::out_of_range("index_of_rank: rank outside 1..N");
  // Max-heap on (S, index) keeps the k smallest pairs seen so far.
  std::priority_queue<std::pair<double, std::uint64_t>> heap;
  for (std::uint64_t i = 1; i <= size; ++i) {
    const std::pair<double, std::uint64_t> item{exponential_at(i), i};
    if (heap.size() < k) {
      heap.push(item);
    } else if (item < heap.top()) {
      heap.pop();
      heap.push(item);
    }
  }
  return heap.top().second;
}

}  // namespace iscsim
