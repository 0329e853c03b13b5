// Copyright 2026 The ACV Authors
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

#ifndef ACV_COMMON_HPP_
#define ACV_COMMON_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace acv {

enum class ErrorCode {
  kInvalidArgument = 1,
  kParse,
  kEpisodeTerminated,
  kOracleUnresolved,
  kDivergence,
  kSessionIncomplete,
  kMismatch,
  kIo,
};

// Exception type for every failure raised by the library. The message carries
// a stable token (e.g. "episode-terminated") followed by optional detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void Require(bool condition, const std::string& what) {
  if (!condition) Fail(ErrorCode::kInvalidArgument, what);
}

// Deterministic pseudo-random stream. Wraps SplitMix64 seeding over a
// xoshiro256** core so that results are identical across standard libraries
// (std::uniform_*_distribution is implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t Next();
  // Uniform in [0, 1).
  double Uniform();
  // Uniform integer in [0, bound). bound > 0.
  std::uint64_t Below(std::uint64_t bound);

  // Derives an independent seed for a named sub-stream.
  static std::uint64_t Derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::uint64_t s_[4];
};

}  // namespace acv

#endif  // ACV_COMMON_HPP_
