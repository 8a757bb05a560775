/* Copyright 2026 The twdkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Umbrella header for the whole library.

#ifndef TWD_TWD_HPP_
#define TWD_TWD_HPP_

#include "twd/config.hpp"       // IWYU pragma: export
#include "twd/core_types.hpp"   // IWYU pragma: export
#include "twd/data_io.hpp"      // IWYU pragma: export
#include "twd/errors.hpp"       // IWYU pragma: export
#include "twd/eval_harness.hpp" // IWYU pragma: export
#include "twd/metrics.hpp"      // IWYU pragma: export
#include "twd/predictors.hpp"   // IWYU pragma: export
#include "twd/rng.hpp"          // IWYU pragma: export
#include "twd/synthetic_gen.hpp" // IWYU pragma: export
#include "twd/twd_augment.hpp"  // IWYU pragma: export

#endif  // TWD_TWD_HPP_
