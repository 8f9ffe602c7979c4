// Copyright 2026 The RUC Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "ruc/analysis.hpp"
#include "ruc/augment.hpp"
#include "ruc/corpus.hpp"
#include "ruc/errors.hpp"
#include "ruc/eval.hpp"
#include "ruc/io.hpp"
#include "ruc/matrix.hpp"
#include "ruc/parallel.hpp"
#include "ruc/rng.hpp"
#include "ruc/scoring.hpp"
#include "ruc/synthetic.hpp"
#include "ruc/text.hpp"
#include "ruc/vadsim.hpp"

namespace ruc {

inline constexpr const char *kVersion = "0.1.0";

}  // namespace ruc
