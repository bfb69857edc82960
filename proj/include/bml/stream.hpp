// Copyright 2026 The bml Authors
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

#pragma once

#include <bml/core.hpp>
#include <bml/random.hpp>

#include <cstdint>
#include <limits>

namespace bml {

/// i.i.d. examples x ~ P labeled by a fixed target, with a consumption
/// counter and an optional hard budget.
class ExampleStream {
public:
    static constexpr std::uint64_t kUnlimited = std::numeric_limits<std::uint64_t>::max();

    ExampleStream(Distribution P, Concept target, std::uint64_t seed, std::uint64_t budget = kUnlimited)
        : P_(std::move(P)), target_(std::move(target)), sampler_(P_), rng_(seed), budget_(budget) {
        detail::check_lengths(P_.size(), target_.size(), "ExampleStream");
    }

    bool exhausted() const noexcept { return consumed_ >= budget_; }

    LabeledExample next() {
        require(!exhausted(), ErrorKind::stream_exhausted,
                "example stream exhausted after " + std::to_string(consumed_) + " examples");
        ++consumed_;
        const Index x = sampler_(rng_);
        return LabeledExample{x, target_[x]};
    }

    /// Unlabeled draw from P (does not touch the label channel).
    Index next_point() {
        require(!exhausted(), ErrorKind::stream_exhausted,
                "example stream exhausted after " + std::to_string(consumed_) + " examples");
        ++consumed_;
        return sampler_(rng_);
    }

    /// Marks n draws as consumed without materializing them.
    void skip(std::uint64_t n) {
        if (budget_ - consumed_ < n) {
            consumed_ = budget_;
            fail(ErrorKind::stream_exhausted, "example stream exhausted after " + std::to_string(consumed_) + " examples");
        }
        consumed_ += n;
    }

    std::uint64_t consumed() const noexcept { return consumed_; }
    std::uint64_t budget() const noexcept { return budget_; }
    const Distribution& distribution() const noexcept { return P_; }
    const Concept& target() const noexcept { return target_; }
    Rng& rng() noexcept { return rng_; }

private:
    Distribution P_;
    Concept target_;
    PointSampler sampler_;
    Rng rng_;
    std::uint64_t budget_;
    std::uint64_t consumed_ = 0;
};

}  // namespace bml
