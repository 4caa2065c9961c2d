/* Copyright 2026 The unetpipe Authors. All Rights Reserved.

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
#ifndef UNETPIPE_TESTS_ORACLE_CONSTANTS_HPP
#define UNETPIPE_TESTS_ORACLE_CONSTANTS_HPP

// Regression constants produced by tests/oracles/enumerate_unet.py for the
// 5-block U-Net on a (1, 16, 16, 16) input with unit cost multipliers and
// kernel volume 27. Regenerate with the script and keep it passing --check.

#include <cstdint>

namespace unetpipe::oracle {

inline constexpr std::int64_t kUnet32Params = 30634848;
inline constexpr std::int64_t kUnet64Params = 122537664;
inline constexpr std::int64_t kUnet128Params = 490147200;
inline constexpr std::int64_t kUnet32ConvParams = 30633984;
inline constexpr std::int64_t kUnet64ConvParams = 122535936;
inline constexpr std::int64_t kUnet128ConvParams = 490143744;
inline constexpr std::int64_t kUnet32Compute = 33595392;
inline constexpr std::int64_t kUnet32Activations = 1901312;
inline constexpr std::int64_t kUnet32Layers = 54;
inline constexpr std::int64_t kUnet32Crossings = 20;
inline constexpr std::int64_t kUnet32PassthroughOverhead = 1282048;

// Smallest U-Net: base 1, 2 blocks, (1, 4, 4, 4).
inline constexpr std::int64_t kUnetB2Crossings = 2;
inline constexpr std::int64_t kUnetB2PassthroughOverhead = 128;

}  // namespace unetpipe::oracle

#endif  // UNETPIPE_TESTS_ORACLE_CONSTANTS_HPP
